"""Tests for contact detection, projection, penalty forces and augmentation."""

import math

import numpy as np
import pytest

from core.contact import (
    ContactModel,
    ContactScene,
    ContactSettings,
    MultiplierField,
    contact_force,
    contact_report,
    contact_stiffness,
    contact_traction,
    detect_pairs,
    gap_field,
    max_penetration,
    project_point,
    uzawa_update,
)
from core.design_rep import RigidSurface
from core.exceptions import DegenerateProjectionError
from core.geometry import segment_distance
from core.polyfem import FEProblem, MaterialParams, NewtonSettings, build_elements, newton_solve

from .helpers import quad_grid, regular_polygon


def settings(**overrides):
    values = dict(eps_mutual=2425.0, eps_self=200.0, search_radius=0.5)
    values.update(overrides)
    return ContactSettings(**values)


def circle_surface(center, radius, segments=64):
    pts = regular_polygon(segments, radius, center)
    return RigidSurface(center=np.asarray(center, dtype=float), radius=radius, segments=pts)


def two_squares(gap_current=-0.01, gap_reference=0.05):
    """Square A [0,1]^2 below a wider square B; B's bottom edge penetrates A's top in the current state."""
    def squares(offset):
        return np.array([
            [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0],
            [-0.5, 1.0 + offset], [1.5, 1.0 + offset], [1.5, 2.0 + offset], [-0.5, 2.0 + offset],
        ])
    loops = [[0, 1, 2, 3], [4, 5, 6, 7]]
    return loops, squares(gap_reference), squares(gap_current)


# ---------------------------------------------------------------- traction

def test_open_gap_no_traction():
    np.testing.assert_array_equal(contact_traction(0.1, np.array([0.0, 1.0]), 2425.0), np.zeros(2))


def test_penalty_traction_magnitude():
    eps = 60.0 * 2100.0 / (30.0 * math.sqrt(3.0))
    assert eps == pytest.approx(2425.0, abs=0.5)
    t = contact_traction(-0.01, np.array([0.0, 1.0]), 2425.0)
    assert np.linalg.norm(t) == pytest.approx(24.25)


def test_penalty_traction_linear_in_eps():
    n = np.array([0.6, 0.8])
    np.testing.assert_allclose(contact_traction(-0.02, n, 200.0), 0.5 * contact_traction(-0.02, n, 400.0))


def test_multiplier_augments_traction():
    t = contact_traction(0.0, np.array([1.0, 0.0]), 100.0, lam=3.0)
    np.testing.assert_allclose(t, [3.0, 0.0])


# ---------------------------------------------------------------- detection

def test_distant_loops_have_no_pairs():
    positions = np.vstack([regular_polygon(8, 1.0, (0.0, 0.0)), regular_polygon(8, 1.0, (10.0, 0.0))])
    scene = ContactScene([list(range(8)), list(range(8, 16))], [], positions, settings())
    assert detect_pairs(scene, positions) == []


def test_loop_near_rigid_circle_is_paired():
    r = 0.5
    positions = regular_polygon(8, 1.0, (0.0, 0.0))
    surface = circle_surface((0.0, -1.0 - 2.0 - 0.1 * r), 2.0)
    for mode in ("polyline", "circle"):
        scene = ContactScene([list(range(8))], [surface], positions, settings(rigid_projection=mode))
        pairs = detect_pairs(scene, positions)
        assert any(p.mode == "mutual" for p in pairs)


def test_detection_matches_brute_force(rng):
    for _ in range(5):
        centers = rng.uniform(0.0, 6.0, size=(4, 2))
        positions = np.vstack([regular_polygon(8, 1.0, c, phase=float(rng.uniform(0, 1))) for c in centers])
        loops = [list(range(8 * k, 8 * k + 8)) for k in range(4)]
        surface = circle_surface(rng.uniform(0.0, 6.0, size=2), 1.5, 32)
        cfg = settings()
        scene = ContactScene(loops, [surface], positions, cfg)

        expected = set()
        seg = scene.segment_nodes
        for i in range(len(seg)):
            for j in range(i + 1, len(seg)):
                d_loop = scene.loop_distance(i, j)
                if d_loop is not None and d_loop <= cfg.exclusion:
                    continue
                if segment_distance(*positions[seg[i]], *positions[seg[j]]) <= cfg.search_radius:
                    expected.add((i, j, "self"))
            for k, (p, q) in enumerate(scene.chords):
                if segment_distance(positions[seg[i, 0]], positions[seg[i, 1]], p, q) <= cfg.search_radius:
                    expected.add((i, k, "mutual"))

        found = {(p.slave, p.master, p.mode) for p in detect_pairs(scene, positions)}
        assert found == expected


def test_self_pairs_respect_exclusion_window():
    positions = regular_polygon(8, 0.3)
    scene = ContactScene([list(range(8))], [], positions, settings(search_radius=1.0))
    for pair in detect_pairs(scene, positions):
        assert scene.loop_distance(pair.slave, pair.master) > 2


# ---------------------------------------------------------------- projection

def test_projection_onto_circle():
    surface = circle_surface((1.0, 2.0), 3.0)
    proj = project_point(np.array([1.0, 7.0]), surface)
    np.testing.assert_allclose(proj.point, [1.0, 5.0])
    np.testing.assert_allclose(proj.normal, [0.0, 1.0])


def test_projection_of_point_on_target():
    positions = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]])
    scene = ContactScene([[0, 1, 2, 3]], [], positions, settings())
    x = np.array([0.7, 0.0])
    proj = project_point(x, scene.flexible_segments(positions))
    np.testing.assert_allclose(proj.point, x)
    assert proj.segment == 0


def test_projection_matches_segment_scan(rng):
    positions = regular_polygon(12, 2.0)
    scene = ContactScene([list(range(12))], [], positions, settings())
    segments = scene.flexible_segments(positions)
    for x in rng.uniform(-3.0, 3.0, size=(50, 2)):
        proj = project_point(x, segments)
        best = min(np.linalg.norm(x - project_point(x, [s]).point) for s in segments)
        assert np.linalg.norm(x - proj.point) == pytest.approx(best, abs=1e-12)


def test_projection_tie_goes_to_lower_segment():
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    scene = ContactScene([[0, 1, 2, 3]], [], positions, settings())
    proj = project_point(np.array([1.5, -0.5]), scene.flexible_segments(positions))
    assert proj.segment == 0


def test_projection_from_circle_center_fails():
    with pytest.raises(DegenerateProjectionError):
        project_point(np.array([1.0, 1.0]), circle_surface((1.0, 1.0), 2.0))


# ---------------------------------------------------------------- forces

def block_on_plane_like_circle(y_left, y_right, mode="circle"):
    positions = np.array([[-0.5, y_left], [0.5, y_right], [0.5, 1.0], [-0.5, 1.0]])
    radius = 1e5
    surface = circle_surface((0.0, -radius), radius, 4096)
    cfg = settings(self_contact=False, rigid_projection=mode)
    return ContactScene([[0, 1, 2, 3]], [surface], positions, cfg), positions


def test_no_penetration_no_force():
    scene, positions = block_on_plane_like_circle(0.05, 0.02)
    pairs = detect_pairs(scene, positions)
    np.testing.assert_array_equal(contact_force(pairs, scene, positions), 0.0)
    assert contact_stiffness(pairs, scene, positions).nnz == 0


def test_total_force_is_penalty_times_mean_penetration():
    scene, positions = block_on_plane_like_circle(-0.01, -0.02)
    pairs = detect_pairs(scene, positions)
    f = contact_force(pairs, scene, positions)
    length = np.linalg.norm(positions[1] - positions[0])
    expected = 2425.0 * 0.015 * length * 1.0
    # the residual carries the negative of the force on the body
    assert -f[1::2].sum() == pytest.approx(expected, rel=1e-4)
    assert abs(f[0::2].sum()) < 1e-5 * expected


def test_self_contact_forces_balance():
    loops, reference, current = two_squares()
    scene = ContactScene(loops, [], reference, settings())
    pairs = detect_pairs(scene, current)
    f = contact_force(pairs, scene, current)
    assert np.linalg.norm(f) > 0
    assert abs(f[0::2].sum()) <= 1e-9 * np.linalg.norm(f)
    assert abs(f[1::2].sum()) <= 1e-9 * np.linalg.norm(f)


def test_reference_side_filter_rejects_initial_overlap():
    loops, _, current = two_squares()
    scene = ContactScene(loops, [], current, settings())
    pairs = detect_pairs(scene, current)
    np.testing.assert_array_equal(contact_force(pairs, scene, current), 0.0)


def test_self_contact_falls_back_past_non_facing_master():
    square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]

    def sliver(bottom):
        return [[-0.5, bottom], [1.5, bottom], [1.5, bottom + 0.005], [-0.5, bottom + 0.005]]

    reference = np.array(square + sliver(1.04))
    current = np.array(square + sliver(0.99))
    cfg = settings()
    scene = ContactScene([[0, 1, 2, 3], [4, 5, 6, 7]], [], reference, cfg)
    pairs = detect_pairs(scene, current)
    # the sliver's upper edge is nearest to the square's top but faces away from it
    assert {(2, 4), (2, 6)} <= {(p.slave, p.master) for p in pairs}

    f = contact_force(pairs, scene, current)
    on_square = -f[:8].reshape(-1, 2).sum(axis=0)
    assert on_square[1] == pytest.approx(-cfg.eps_self * 0.01 * 1.0 * cfg.thickness)
    assert abs(on_square[0]) < 1e-12



def fd_stiffness(pairs, scene, x, multipliers=None, h=1e-7):
    n = x.size
    K = np.zeros((n, n))
    for j in range(n):
        xp, xm = x.copy().ravel(), x.copy().ravel()
        xp[j] += h
        xm[j] -= h
        K[:, j] = (contact_force(pairs, scene, xp.reshape(-1, 2), multipliers)
                   - contact_force(pairs, scene, xm.reshape(-1, 2), multipliers)) / (2 * h)
    return K


def test_self_contact_stiffness_matches_differences(rng):
    loops, reference, current = two_squares()
    current = current + 0.003 * rng.standard_normal(current.shape)
    scene = ContactScene(loops, [], reference, settings())
    pairs = detect_pairs(scene, current)
    multipliers = MultiplierField.zeros(scene.n_segments, 2)
    multipliers.values["self"][:] = 0.5
    K = contact_stiffness(pairs, scene, current, multipliers).toarray()
    fd = fd_stiffness(pairs, scene, current, multipliers)
    assert np.linalg.norm(K) > 0
    assert np.linalg.norm(K - fd) <= 1e-4 * np.linalg.norm(K)


@pytest.mark.parametrize("mode", ["circle", "polyline"])
def test_rigid_stiffness_matches_differences_and_stays_on_slave(mode):
    scene, positions = block_on_plane_like_circle(-0.01, -0.02, mode)
    positions = positions + np.array([[0.0, 0.0], [0.01, -0.003], [0.0, 0.0], [0.0, 0.0]])
    pairs = detect_pairs(scene, positions)
    K = contact_stiffness(pairs, scene, positions).toarray()
    fd = fd_stiffness(pairs, scene, positions)
    assert np.linalg.norm(K - fd) <= 1e-4 * np.linalg.norm(K)
    touched = np.flatnonzero(np.abs(K).sum(axis=0) + np.abs(K).sum(axis=1))
    assert set(touched.tolist()) <= {0, 1, 2, 3}


@pytest.mark.parametrize("mode", ["circle", "polyline"])
def test_mutual_force_balances_integrated_rigid_traction(mode):
    positions = np.array([[-0.5, -0.04], [0.5, -0.03], [0.5, 1.0], [-0.5, 1.0]])
    surface = circle_surface((0.0, -5.0), 5.0, 256)
    cfg = settings(self_contact=False, rigid_projection=mode)
    scene = ContactScene([[0, 1, 2, 3]], [surface], positions, cfg)
    pairs = detect_pairs(scene, positions)
    on_body = -contact_force(pairs, scene, positions).reshape(-1, 2).sum(axis=0)

    target = surface if mode == "circle" else scene.rigid_segments()
    a, b = positions[0], positions[1]
    length = np.linalg.norm(b - a)
    on_surface = np.zeros(2)
    for xi, w in zip(*np.polynomial.legendre.leggauss(2)):
        x = 0.5 * (1.0 - xi) * a + 0.5 * (1.0 + xi) * b
        proj = project_point(x, target)
        g = float((x - proj.point) @ proj.normal)
        on_surface -= contact_traction(g, proj.normal, cfg.eps_mutual) * 0.5 * w * cfg.thickness * length

    assert np.linalg.norm(on_surface) > 0
    np.testing.assert_allclose(on_body, -on_surface, rtol=1e-9, atol=1e-12)


def test_long_rigid_chords_with_small_search_radius():
    surface = circle_surface((0.0, -1e6), 1e6, 8)
    positions = np.array([[-0.5, -0.01], [0.5, -0.02], [0.5, 1.0], [-0.5, 1.0]])
    cfg = settings(self_contact=False, search_radius=1e-3)
    scene = ContactScene([[0, 1, 2, 3]], [surface], positions, cfg)
    pairs = detect_pairs(scene, positions)
    expected = {
        (i, k) for i, (a, b) in enumerate(scene.segment_nodes) for k, (p, q) in enumerate(scene.chords)
        if segment_distance(positions[a], positions[b], p, q) <= cfg.search_radius
    }
    assert {(p.slave, p.master) for p in pairs} == expected
    assert expected



# ---------------------------------------------------------------- augmentation

def test_uzawa_clamps_open_gaps():
    lam = MultiplierField.zeros(2, 2)
    lam.values["self"][:] = 5.0
    gaps = {"self": np.full((2, 2), 0.1), "mutual": np.full((2, 2), np.nan)}
    out = uzawa_update(lam, gaps, {"self": 100.0, "mutual": 100.0})
    np.testing.assert_array_equal(out.values["self"], 0.0)
    assert out.outer_iterations == 1


def test_uzawa_recursion_grows_linearly():
    eps, g = 250.0, -0.004
    lam = MultiplierField.zeros(1, 2)
    gaps = {"mutual": np.full((1, 2), g), "self": np.full((1, 2), np.nan)}
    previous = 0.0
    for k in range(1, 6):
        lam = uzawa_update(lam, gaps, {"mutual": eps, "self": eps})
        assert lam.values["mutual"][0, 0] == pytest.approx(k * eps * abs(g))
        assert lam.values["mutual"][0, 0] > previous
        previous = lam.values["mutual"][0, 0]


def test_max_penetration_ignores_open_and_missing():
    assert max_penetration({"self": np.array([[np.nan, 0.2]]), "mutual": np.array([[np.nan, np.nan]])}) == 0.0
    assert max_penetration({"self": np.array([[-0.03, 0.2]]), "mutual": np.array([[-0.01, np.nan]])}) == 0.03


class RecordingContact(ContactModel):
    def __init__(self, scene):
        super().__init__(scene)
        self.penetrations = []
        self.updates = 0

    def max_penetration(self, positions):
        value = super().max_penetration(positions)
        self.penetrations.append(value)
        return value

    def uzawa_update(self, positions):
        self.updates += 1
        super().uzawa_update(positions)


def pressed_block():
    """5x2 quad block whose top is pushed 0.2 down onto a rigid circle."""
    positions, cells = quad_grid(5, 2)
    loop = [0, 1, 2, 3, 4, 5, 11, 17, 16, 15, 14, 13, 12, 6]
    surface = circle_surface((2.5, -50.0), 50.0)
    cfg = settings(self_contact=False, rigid_projection="circle")
    model = RecordingContact(ContactScene([loop], [surface], positions, cfg))

    top = np.flatnonzero(np.isclose(positions[:, 1], 2.0))
    fixed = np.zeros(positions.size, dtype=bool)
    prescribed = np.zeros(positions.size)
    fixed[2 * top] = fixed[2 * top + 1] = True
    prescribed[2 * top + 1] = -0.2

    problem = FEProblem(
        positions=positions,
        elements=build_elements(positions, cells),
        material=MaterialParams(2100.0, 0.33, 1.0),
        fixed_dofs=fixed,
        f_ext=np.zeros(positions.size),
        prescribed=prescribed,
        contact=model,
    )
    return problem, model


def test_block_pressed_on_circle_augments_to_tolerance():
    problem, model = pressed_block()
    positions = problem.positions
    marks = []
    gap_tol = 1e-4
    state = newton_solve(problem, NewtonSettings(gap_tol=gap_tol),
                         step_callback=lambda lam, u: marks.append(len(model.penetrations)))

    assert state.converged
    assert "uzawa_unconverged" not in state.flags
    assert max(model.penetrations) > gap_tol

    start = 0
    for end in marks:
        sequence = model.penetrations[start:end]
        assert sequence[-1] <= gap_tol
        assert all(b < a for a, b in zip(sequence, sequence[1:]))
        start = end

    deformed = positions + state.u.reshape(-1, 2)
    report = model.report(deformed)
    assert report and all(row["mode"] == "mutual" and row["kind"] == "circle" for row in report)
    gaps = gap_field(model.pairs, model.scene, deformed)
    assert max_penetration(gaps) <= gap_tol


def test_contact_report_rows():
    scene, positions = block_on_plane_like_circle(-0.01, -0.02)
    rows = contact_report(detect_pairs(scene, positions), scene, positions)
    assert len(rows) == 1
    row = rows[0]
    assert row["slave_segment"] == 0
    assert row["gap"] < 0 < row["pressure"]


def test_unreachable_gap_tolerance_spends_full_uzawa_budget():
    problem, model = pressed_block()
    budget = 3
    updates = []
    state = newton_solve(problem, NewtonSettings(gap_tol=1e-14, uzawa_max_iterations=budget),
                         step_callback=lambda lam, u: updates.append(model.updates))
    assert state.converged
    assert "uzawa_unconverged" in state.flags
    per_step = np.diff([0] + updates)
    assert per_step.tolist() == [budget] * len(updates)
    assert state.uzawa_iterations == budget * len(updates)
