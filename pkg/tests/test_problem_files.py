"""Shipped problem files: they validate, resolve against their meshes and the desk-scale one synthesizes."""

import json
import math
from pathlib import Path

import pytest

from analysis.problem import build_problem
from app import EXIT_OK, main
from core.schemas import parse_config

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

EXAMPLES = {
    "example1_parabolic.json": {"masks": 12 * 8, "axis": "x", "mutual": False, "smn": 9},
    "example2_elliptical.json": {"masks": 12 * 8, "axis": "x", "mutual": False, "smn": 9},
    "example3_vshape.json": {"masks": 10 * 10, "axis": None, "mutual": True, "smn": 8},
    "example4_void_region.json": {"masks": 12 * 10, "axis": None, "mutual": False, "smn": 10},
    "desk_parabolic.json": {"masks": 8 * 5, "axis": "x", "mutual": False, "smn": 5},
}


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_problem_file_resolves(name):
    expected = EXAMPLES[name]
    path = PROBLEMS / name
    config = parse_config(path)
    problem = build_problem(config, path)

    assert len(problem.initial_design.masks) == expected["masks"]
    assert config.symmetry.axis == expected["axis"]
    assert config.contact.mutual_contact is expected["mutual"]
    assert len(problem.smn_ids) == expected["smn"]
    assert len(problem.target_points) >= 3
    if expected["axis"] is not None:
        assert problem.roller_nodes


def test_void_region_example_keeps_ports_outside_region():
    path = PROBLEMS / "example4_void_region.json"
    problem = build_problem(parse_config(path), path)
    assert problem.void_region_elements
    assert not set(problem.void_region_elements) & set(problem.port_elements)


def test_desk_target_lies_on_parabola():
    path = PROBLEMS / "desk_parabolic.json"
    problem = build_problem(parse_config(path), path)
    smn = problem.mesh.positions[list(problem.smn_ids)]
    assert smn == pytest.approx(problem.target_points)
    vertex_y = problem.target_points[2, 1]
    h = math.sqrt(3.0)
    for x, y in problem.target_points:
        assert x == pytest.approx(1.5 + 2.0 * ((y - vertex_y) / (3.0 * h)) ** 2)


@pytest.mark.slow
def test_desk_scale_synthesis_halves_objective(tmp_path):
    out = tmp_path / "run"
    assert main(["synth", str(PROBLEMS / "desk_parabolic.json"), "-o", str(out)]) == EXIT_OK

    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["stop_reason"] in ("max_iterations", "target")
    assert summary["best_objective"] < 0.5 * summary["initial_objective"]
    for name in ("config.json", "run_info.json", "iterations.csv", "best_design.txt", "best_material.txt",
                 "desired_curve.txt", "desired_curve_full.txt", "best_actual_curve.txt",
                 "best_actual_curve_full.txt", "best_shape_report.json", "best_end_compliance.txt",
                 "best_contact_report.txt", "best_deformed_positions.txt", "best.svg"):
        assert (out / name).is_file(), name
    assert (out / "frames" / "frame_00000.svg").is_file()
