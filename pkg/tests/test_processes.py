import numpy as np
import pytest

from ergolab.flows import (
    GOLDEN,
    identity_flow,
    rotation_flow,
    shift_perm,
    step_flow,
)
from ergolab.functions import AtomFunction, sawtooth
from ergolab.processes import (
    ConvergenceReport,
    cesaro_decomposition_check,
    commutation_check,
    convergence_table,
    em_process,
    ergodic_envelope_check,
    ergodic_envelope_constant,
    limits,
    me_process,
    sup_integrability_report,
)
from ergolab.spaces import (
    Filtration,
    VectorNorm,
    circle_space,
    discrete_space,
    make_factor_partition,
    make_dyadic_partition,
    product_space,
)

import oracles


def _golden_setup(max_level=4):
    f = sawtooth(d=1)
    flow = rotation_flow(GOLDEN)
    filt = Filtration(circle_space(), "decreasing", max_level=max_level)
    return f, flow, filt


def _quad_antideriv(y):
    return y ** 2 / 2 - y / 2


def test_me_entry_frozen_cells():
    f, flow, filt = _golden_setup()
    grid = me_process(f, flow, filt, np.array([1.0, 2.5]),
                      np.array([0.0, 2.0]))
    entry = grid.entry(2.5, 2.0)  # level 2, four cells
    cells = entry.coeffs[:, 0, 0]
    assert np.allclose(cells,
                       [-0.03614561800016822, 0.04941985962555731,
                        0.030166278062294938, -0.04344051968768414],
                       rtol=1e-12)
    # independent path: A_t saw(x) = (G(frac(x+L)) - G(x)) / L, then
    # per-cell composite midpoint averages
    L = 2.5 * GOLDEN
    for i in range(4):
        pts = (i + oracles.midpoints(20_001)) / 4
        vals = (_quad_antideriv((pts + L) % 1.0) - _quad_antideriv(pts)) / L
        assert cells[i] == pytest.approx(float(np.mean(vals)), abs=1e-8)


def test_em_entry_frozen_value():
    f, flow, filt = _golden_setup()
    grid = em_process(f, flow, filt, np.array([1.0, 2.5]),
                      np.array([0.0, 2.0]))
    entry = grid.entry(2.5, 2.0)
    assert entry(0.1)[0] == pytest.approx(-0.04489356881873894, rel=1e-12)
    # E(saw|level 2) steps through -3/8, -1/8, 1/8, 3/8; averaging that
    # step function along the orbit has an elementary closed form
    cv = np.array([-0.375, -0.125, 0.125, 0.375])
    csum = np.concatenate([[0.0], np.cumsum(cv / 4)])

    def step_antideriv(y):
        k = min(int(y * 4), 3)
        return csum[k] + cv[k] * (y - k / 4)

    L = 2.5 * GOLDEN
    ref = (step_antideriv((0.1 + L) % 1.0) - step_antideriv(0.1)) / L
    assert entry(0.1)[0] == pytest.approx(ref, abs=1e-13)


def test_grid_entries_match_recompute():
    f, flow, filt = _golden_setup()
    t_grid = np.array([0.5, 1.0, 3.0])
    s_grid = np.array([0.0, 1.0, 2.0])
    for grid in (me_process(f, flow, filt, t_grid, s_grid),
                 em_process(f, flow, filt, t_grid, s_grid)):
        for (t, s), fn in grid.items():
            again = grid.recompute_entry(t, s)
            x = (np.arange(100) + 0.37) / 100
            assert np.max(np.abs(fn(x) - again(x))) < 1e-14


def test_grid_items_row_major():
    f, flow, filt = _golden_setup()
    grid = me_process(f, flow, filt, np.array([1.0, 2.0]),
                      np.array([0.0, 1.0]))
    keys = [k for k, _ in grid.items()]
    assert keys == [(1.0, 0.0), (1.0, 1.0), (2.0, 0.0), (2.0, 1.0)]


def test_grid_validation():
    f, flow, filt = _golden_setup()
    with pytest.raises(ValueError):
        me_process(f, flow, filt, np.array([0.0, 1.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        me_process(f, flow, filt, np.array([2.0, 1.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        em_process(f, flow, filt, np.array([1.0]), np.array([-1.0, 0.0]))


def test_limits_ergodic_rotation():
    f, flow, filt = _golden_setup()
    lim = limits(f, flow, filt, t_max=100.0)
    x = np.linspace(0.0, 0.99, 7)
    # mean-zero input: all three limits vanish for the ergodic rotation
    # with a decreasing filtration (terminal partition is trivial)
    assert np.max(np.abs(lim.ergodic_limit(x))) < 1e-15
    assert np.max(np.abs(lim.me_limit(x))) < 1e-15
    assert np.max(np.abs(lim.em_limit(x))) < 1e-15


def test_limits_identity_flow_surrogate():
    sp = discrete_space(np.full(4, 0.25))
    f = AtomFunction(sp, np.array([1.0, -1.0, 2.0, -2.0]))
    filt = Filtration(sp, "decreasing", max_level=2)
    lim = limits(f, identity_flow(sp), filt, t_max=8.0)
    # identity flow: the time average never moves
    assert np.allclose(lim.ergodic_limit.values, f.values)
    assert np.allclose(lim.me_limit.values, 0.0)
    with pytest.raises(ValueError):
        limits(f, identity_flow(sp), filt, t_max=0.0)


def test_decomposition_identity_rotation():
    flow = rotation_flow(GOLDEN)
    g = sawtooth(d=2, amplitudes=[1.0, 0.5], phases=[0.0, 0.3])
    for t in (1.0, 2.5, 7.25, 33.0):
        assert cesaro_decomposition_check(flow, g, t) <= 1e-10


def test_decomposition_identity_step():
    sp = discrete_space(np.full(4, 0.25))
    g = AtomFunction(sp, np.array([0.8, -0.35, 0.55, -0.9]))
    flow = step_flow(sp, shift_perm(sp), h=0.5)
    for t in (1.0, 2.7, 6.25):
        assert cesaro_decomposition_check(flow, g, t) <= 1e-12
    bad = step_flow(sp, shift_perm(sp), h=0.3)
    with pytest.raises(ValueError):
        cesaro_decomposition_check(bad, g, 2.0)
    with pytest.raises(ValueError):
        cesaro_decomposition_check(flow, g, 0.5)


def test_commutation_zero_for_factor_partition():
    sp = product_space(8, np.array([0.6, 0.4]))
    rng = np.random.default_rng(3)
    f = AtomFunction(sp, rng.normal(size=(16, 2)))
    flow = step_flow(sp, shift_perm(sp), h=1.0)
    part = make_factor_partition(sp, 1)
    assert commutation_check(flow, f, part) <= 1e-12


def test_commutation_nonzero_for_rotation():
    f, flow, _ = _golden_setup()
    part = make_dyadic_partition(2)
    # rotations smear cells across cell boundaries; the defect is a
    # diagnostic size, not a roundoff artifact
    assert commutation_check(flow, f, part) > 1e-3


def test_convergence_table_me():
    f, flow, filt = _golden_setup()
    t_grid = np.array([1.0, 2.0, 3.0, 5.0, 8.0])
    s_grid = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    grid = me_process(f, flow, filt, t_grid, s_grid)
    lim = limits(f, flow, filt, t_max=16.0)
    report = convergence_table(grid, lim.me_limit, 2.0,
                               VectorNorm("euclidean", 1), threshold=0.05)
    assert len(report) == 25
    assert len(report.diagonal) == 5
    assert report.passed
    # terminal diagonal entry conditions on the trivial partition, so the
    # error is exactly zero there
    assert report.diagonal[-1][3] == 0.0


def test_convergence_report_slack_rule():
    rows = [(1.0, 0.0, 0.1, 0.1), (2.0, 1.0, 0.2, 0.2)]
    report = ConvergenceReport(rows, rows, threshold=0.5)
    assert not report.monotone and not report.passed
    rows2 = [(1.0, 0.0, 0.1, 0.1), (2.0, 1.0, 0.105, 0.105)]
    report2 = ConvergenceReport(rows2, rows2, threshold=0.5)
    assert report2.monotone and report2.passed
    report3 = ConvergenceReport(rows2, rows2, threshold=None)
    assert report3.passed is None


def test_sup_integrability_frozen():
    f, flow, filt = _golden_setup()
    val = sup_integrability_report(f, flow, np.array([0.5, 1.0, 2.0, 4.0]))
    assert val == pytest.approx(0.19614198679505535, rel=1e-12)
    # dense reference: max of the closed-form averages, then quadrature
    pts = oracles.midpoints(200_001)
    members = []
    for t in (0.5, 1.0, 2.0, 4.0):
        L = t * GOLDEN
        members.append(np.abs(_quad_antideriv((pts + L) % 1.0)
                              - _quad_antideriv(pts)) / L)
    ref = float(np.mean(np.max(members, axis=0)))
    assert val == pytest.approx(ref, abs=1e-7)

    sval = sup_integrability_report(f, filt, np.array([0.0, 1.0, 2.0, 3.0]))
    assert sval == pytest.approx(85.0 / 256.0, rel=1e-14)


def test_sup_integrability_validation():
    f, flow, filt = _golden_setup()
    with pytest.raises(ValueError):
        sup_integrability_report(f, flow, np.array([]))
    with pytest.raises(TypeError):
        sup_integrability_report(f, "neither", np.array([1.0]))


def test_envelope_constant_rotation_exact():
    f, flow, _ = _golden_setup()
    # centered antiderivative of the sawtooth peaks at 1/8
    assert ergodic_envelope_constant(flow, f) == pytest.approx(
        0.25 / GOLDEN, rel=1e-14)
    with pytest.raises(ValueError):
        ergodic_envelope_constant(rotation_flow(0.25), f)


def test_envelope_constant_step():
    sp = discrete_space(np.full(4, 0.25))
    f = AtomFunction(sp, np.array([1.0, 0.0, 0.0, -1.0]))
    flow = step_flow(sp, shift_perm(sp), h=0.5)
    assert ergodic_envelope_constant(flow, f) == pytest.approx(2.0)


def test_envelope_check_bounds_errors():
    f, flow, _ = _golden_setup()
    t_grid = np.array([1.0, 3.0, 10.0, 100.0, 1000.0])
    report = ergodic_envelope_check(flow, f, t_grid)
    assert report.passed
    for t, err, bound in report.rows:
        assert err <= bound + 1e-12
        assert bound == pytest.approx(report.constant / t)
