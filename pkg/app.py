"""
Contact-Aided Shape-Morphing Mechanism Synthesizer
Command-line entry point: synthesis runs, single-design replay and mesh dumps.

This is the main entry point that orchestrates all modules.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

# Import configuration
from config import APP_NAME, APP_VERSION

# Import core modules
from core.exceptions import ConfigError, SynthesisError
from core.hexmesh import format_mesh
from core.schemas import ProblemConfig, parse_config, resolve_relative, serialize_config

# Import analysis modules
from analysis.evaluation import Candidate, evaluate, resolve_material
from analysis.optimizer import run
from analysis.problem import SynthesisProblem, build_problem, full_curve

# Import utilities
from utils.io_formats import (
    atomic_write_text,
    format_material,
    format_positions,
    get_output_directory,
    read_design,
    run_info,
    write_csv,
    write_curve,
    write_design,
    write_json,
)
from utils.run_logging import configure_logging
from utils.run_stats import RunStatsTracker
from utils.svg_export import render_design

logger = logging.getLogger(APP_NAME)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


# ============================================================================
# ARTIFACTS
# ============================================================================

def _portable_config(config: ProblemConfig, config_path: Path) -> ProblemConfig:
    """Config copy with file references made absolute so the run directory replays."""
    copy = config.model_copy(deep=True)
    if copy.target_curve.path is not None:
        copy.target_curve.path = str(resolve_relative(config_path, copy.target_curve.path).resolve())
    if copy.optimizer.initial_design is not None:
        copy.optimizer.initial_design = str(
            resolve_relative(config_path, copy.optimizer.initial_design).resolve())
    return copy


def _pct(value: Optional[float]) -> Optional[float]:
    return None if value is None else 100.0 * value


def shape_report(candidate: Candidate) -> Dict:
    """Objective breakdown, shape invariants (percent) and end-compliance."""
    analysis = candidate.analysis
    return {
        "objective": candidate.objective,
        "shape_objective": candidate.shape_objective,
        "feasible": candidate.feasible,
        "failure": candidate.failure,
        "volume_fraction": candidate.volume_fraction,
        "force": candidate.design.force,
        "zeta_s_percent": _pct(analysis.zeta_s) if analysis else None,
        "zeta_l_percent": _pct(analysis.zeta_l) if analysis else None,
        "end_compliance": analysis.end_compliance if analysis else None,
        "diagnostics": {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v)
                        for k, v in candidate.diagnostics.items()},
    }


def format_contact_report(rows: List[Dict]) -> str:
    """'slave_segment master kind mode gap pressure' per active pair."""
    lines = ["# slave_segment master kind mode gap pressure"]
    lines += [f"{r['slave_segment']} {r['master']} {r['kind']} {r['mode']} {r['gap']:.17g} {r['pressure']:.17g}"
              for r in rows]
    return "\n".join(lines) + "\n"


def export_candidate(out_dir: Path, problem: SynthesisProblem, candidate: Candidate, prefix: str) -> None:
    """Design, material field, curves, shape report and contact report of one candidate."""
    mirror = problem.mirror
    write_design(out_dir / f"{prefix}_design.txt", candidate.design)
    if candidate.material is not None:
        atomic_write_text(out_dir / f"{prefix}_material.txt", format_material(candidate.material))
    write_curve(out_dir / "desired_curve.txt", problem.target_points)
    write_json(out_dir / f"{prefix}_shape_report.json", shape_report(candidate))

    analysis = candidate.analysis
    if analysis is None:
        return
    write_curve(out_dir / f"{prefix}_actual_curve.txt", analysis.actual_curve)
    if mirror is not None:
        write_curve(out_dir / "desired_curve_full.txt", full_curve(problem.target_points, mirror))
        write_curve(out_dir / f"{prefix}_actual_curve_full.txt", full_curve(analysis.actual_curve, mirror))
    atomic_write_text(out_dir / f"{prefix}_end_compliance.txt", f"{analysis.end_compliance:.17g}\n")
    atomic_write_text(out_dir / f"{prefix}_contact_report.txt", format_contact_report(analysis.contact_report))
    atomic_write_text(out_dir / f"{prefix}_deformed_positions.txt", format_positions(analysis.deformed))
    render_design(
        out_dir / f"{prefix}.svg",
        analysis.positions,
        analysis.connectivity,
        deformed=analysis.deformed,
        rigid_surfaces=analysis.rigid_surfaces,
        contact_points=analysis.contact_points,
        desired_curve=problem.target_points,
        actual_curve=analysis.actual_curve,
        mirror=mirror,
        title=f"f = {candidate.objective:.6g}",
    )


def render_frame(path: Path, problem: SynthesisProblem, candidate: Candidate, iteration: int) -> None:
    """SVG frame of the incumbent; penalized incumbents show the design only."""
    analysis = candidate.analysis
    if analysis is not None:
        render_design(path, analysis.positions, analysis.connectivity, deformed=analysis.deformed,
                      rigid_surfaces=analysis.rigid_surfaces, contact_points=analysis.contact_points,
                      desired_curve=problem.target_points, actual_curve=analysis.actual_curve,
                      mirror=problem.mirror, title=f"iteration {iteration}: f = {candidate.objective:.6g}")
        return
    _, material, positions, _, _, _ = resolve_material(problem, candidate.design)
    connectivity = problem.mesh.elements[np.flatnonzero(material.solid)]
    render_design(path, positions, connectivity, mirror=problem.mirror,
                  title=f"iteration {iteration}: f = {candidate.objective:.6g}")


# ============================================================================
# COMMANDS
# ============================================================================

def run_synthesis(
    config_path: Path,
    out_dir: Path,
    seed: Optional[int] = None,
    frames_every: Optional[int] = None
) -> int:
    """
    Hill-climb a problem file and write every artifact to out_dir.

    Returns:
        Exit status
    """
    out_dir = get_output_directory(out_dir)
    configure_logging(out_dir)
    config = parse_config(config_path)
    if seed is not None:
        config.seed = seed
    if frames_every is not None:
        config.output.frames_every = frames_every

    problem = build_problem(config, config_path)
    atomic_write_text(out_dir / "config.json", serialize_config(_portable_config(config, config_path)))
    write_json(out_dir / "run_info.json", run_info(config.seed, command="synth", config=str(config_path)))

    stats = RunStatsTracker()
    frames_dir = out_dir / "frames"
    every = config.output.frames_every

    def on_iteration(iteration: int, incumbent: Candidate, candidate: Candidate, accepted: bool) -> None:
        if every > 0 and iteration % every == 0:
            render_frame(frames_dir / f"frame_{iteration:05d}.svg", problem, incumbent, iteration)

    result = run(problem, on_iteration=on_iteration, on_evaluation=stats.add_evaluation)

    write_csv(out_dir / "iterations.csv", result.history)
    write_design(out_dir / "best_design.txt", result.best.design)
    export_candidate(out_dir, problem, result.best, "best")
    summary = {
        "stop_reason": result.stop_reason,
        "iterations": result.iterations,
        "initial_objective": float(result.history["f_incumbent"].iloc[0]),
        "best_objective": result.best.objective,
        "statistics": stats.get_summary(),
    }
    write_json(out_dir / "summary.json", summary)
    logger.info("Finished after %d iterations (%s): f = %.6g",
                result.iterations, result.stop_reason, result.best.objective)
    return EXIT_OK


def replay(design_path: Path, config_path: Path, out_dir: Path, dump_steps: bool = False) -> int:
    """
    Evaluate a single design and export its analysis artifacts.

    Returns:
        Exit status
    """
    out_dir = get_output_directory(out_dir)
    configure_logging(out_dir)
    config = parse_config(config_path)
    problem = build_problem(config, config_path)
    design = read_design(design_path)
    write_json(out_dir / "run_info.json", run_info(config.seed, command="replay", design=str(design_path)))

    step_callback = None
    if dump_steps or config.output.dump_load_steps:
        steps_dir = out_dir / "load_steps"
        counter = {"step": 0}

        def step_callback(load_factor: float, u: np.ndarray) -> None:
            counter["step"] += 1
            # displacements only; rewritten to positions after the solve
            atomic_write_text(
                steps_dir / f"step_{counter['step']:03d}.txt",
                f"# load_factor {load_factor:.17g}\n" + format_positions(u.reshape(-1, 2)),
            )

    candidate = evaluate(design, problem, step_callback)
    if step_callback is not None and candidate.analysis is not None:
        _rewrite_step_dumps(out_dir / "load_steps", candidate.analysis.positions)

    export_candidate(out_dir, problem, candidate, "replay")
    logger.info("Replay objective %.17g%s", candidate.objective,
                "" if candidate.failure is None else f" (penalized: {candidate.failure})")
    return EXIT_OK


def _rewrite_step_dumps(steps_dir: Path, reference: np.ndarray) -> None:
    """Turn dumped displacements into nodal positions once the reference is known."""
    for path in sorted(steps_dir.glob("step_*.txt")):
        lines = path.read_text(encoding="utf-8").splitlines()
        header, body = lines[0], lines[1:]
        u = np.array([[float(v) for v in line.split()[1:]] for line in body]).reshape(-1, 2)
        atomic_write_text(path, header + "\n" + format_positions(reference + u))


def mesh_dump(config_path: Path) -> int:
    config = parse_config(config_path)
    d = config.domain
    problem = build_problem(config, config_path)
    sys.stdout.write(format_mesh(problem.mesh))
    logger.debug("Dumped %dx%d mesh (a = %g)", d.cols, d.rows, d.edge_length)
    return EXIT_OK


# ============================================================================
# ARGUMENT PARSING
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="Synthesize contact-aided shape-morphing compliant mechanisms.",
    )
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Run the hill climber on a problem file.")
    synth.add_argument("config", type=Path, help="JSON problem file")
    synth.add_argument("-o", "--output", type=Path, required=True, help="Output directory")
    synth.add_argument("--seed", type=int, default=None, help="Override the problem seed")
    synth.add_argument("--frames-every", type=int, default=None, help="SVG frame interval (0 disables)")

    rep = sub.add_parser("replay", help="Analyze a single design file.")
    rep.add_argument("design", type=Path, help="Design file ('x y r s f' lines, 'F <force>')")
    rep.add_argument("config", type=Path, help="JSON problem file")
    rep.add_argument("-o", "--output", type=Path, required=True, help="Output directory")
    rep.add_argument("--dump-steps", action="store_true", help="Write nodal positions per load step")

    dump = sub.add_parser("mesh-dump", help="Print the honeycomb node/element listing.")
    dump.add_argument("config", type=Path, help="JSON problem file")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return run_synthesis(args.config, args.output, args.seed, args.frames_every)
        if args.command == "replay":
            return replay(args.design, args.config, args.output, args.dump_steps)
        configure_logging(None, logging.WARNING)
        return mesh_dump(args.config)
    except ConfigError as exc:
        logging.getLogger(APP_NAME).error("Configuration error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SynthesisError as exc:
        logging.getLogger(APP_NAME).error("Synthesis failed: %s", exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
