"""Verifiers for the maximal-function inequalities and sup-family checks.

Each checker replaces a supremum over continuous parameters by the sup
over a finite grid.  That only weakens the left side, so the inequality
direction stays sound: a PASS certifies a necessary condition, while any
FAIL is a hard defect.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .condexp import cond_exp, cond_exp_dominant
from .fields import exceedance_measure, grid_sup_field, lp_norm, pointwise_norm
from .flows import cesaro_average, dominant_cesaro
from .functions import AtomFunction, CircleFunction
from .processes import em_process, me_process
from .spaces import VectorNorm

_PASS_SLACK = 1e-9
_SUBMART_TOL = 1e-12


class DominantReport(NamedTuple):
    lhs: float
    bound: float
    ratio: float
    passed: bool


class MaximalReport(NamedTuple):
    exceedance: float
    bound: float
    passed: bool


def _require_p(p):
    if not p > 1.0:
        raise ValueError("the inequality constant degenerates unless p > 1")


def _require_decreasing(filtration):
    if filtration.direction != "decreasing":
        raise ValueError(
            "this inequality is stated for decreasing filtrations; got "
            f"{filtration.direction!r}")


def _grid_sup(grid, vnorm):
    return grid_sup_field([pointwise_norm(fn, vnorm) for _, fn in grid.items()])


def _dominant_report(grid, f, p, vnorm):
    lhs = float(_grid_sup(grid, vnorm).lp(p))
    constant = (p / (p - 1.0)) ** 2
    bound = constant * float(lp_norm(f, p, vnorm))
    ratio = lhs / bound if bound > 0.0 else 0.0
    return DominantReport(lhs, bound, ratio, lhs <= bound + _PASS_SLACK)


def _maximal_report(grid, f, p, eps, vnorm):
    if eps <= 0.0:
        raise ValueError("exceedance threshold must be positive")
    exc = float(exceedance_measure(_grid_sup(grid, vnorm), eps))
    bound = (p / (p - 1.0)) * float(lp_norm(f, p, vnorm)) / eps
    return MaximalReport(exc, bound, exc <= bound + _PASS_SLACK)


def dominant_ineq_me(f, flow, filtration, p, t_grid, s_grid, vnorm):
    """Strong-type bound on the grid-sup of conditioned averages.

    lhs is the L_p size of the pointwise sup over the (t, s) grid of
    ||E(A_t f|F_s)||_X; the bound is (p/(p-1))^2 ||f||_p.
    """
    _require_p(p)
    _require_decreasing(filtration)
    grid = me_process(f, flow, filtration, t_grid, s_grid)
    return _dominant_report(grid, f, p, vnorm)


def dominant_ineq_em(f, flow, filtration, p, t_grid, s_grid, vnorm):
    """Companion strong-type bound with the operators in swapped order."""
    _require_p(p)
    _require_decreasing(filtration)
    grid = em_process(f, flow, filtration, t_grid, s_grid)
    return _dominant_report(grid, f, p, vnorm)


def maximal_ineq_me(f, flow, filtration, p, t_grid, s_grid, eps, vnorm):
    """Weak-type bound: measure of {grid-sup >= eps} vs (p/(p-1)) ||f||_p / eps.

    The exceedance set is measured exactly from the piecewise
    representation, not sampled.
    """
    _require_p(p)
    _require_decreasing(filtration)
    grid = me_process(f, flow, filtration, t_grid, s_grid)
    return _maximal_report(grid, f, p, eps, vnorm)


def maximal_ineq_em(f, flow, filtration, p, t_grid, s_grid, eps, vnorm):
    """Weak-type bound for averaged conditionings."""
    _require_p(p)
    _require_decreasing(filtration)
    grid = em_process(f, flow, filtration, t_grid, s_grid)
    return _maximal_report(grid, f, p, eps, vnorm)


def _sample_points(space, npoints):
    if space.kind == "circle":
        return (np.arange(npoints) + 0.5) / npoints
    return np.arange(space.natoms)


def _norm_at(fn, vnorm, pts):
    if isinstance(fn, AtomFunction):
        return vnorm(fn.values)
    return vnorm(fn(pts))


def domination_chain_check(f, flow, partition, t_grid, vnorm, npoints=1000):
    """Worst signed defect of the two-step pointwise domination chain.

    For each grid time: ||A_t f||_X must not exceed the dominant average
    of ||f||_X anywhere, and ||E(A_t f|F)||_X must not exceed the
    dominant conditioning of that average.  Positive return values mean
    the chain was violated by that amount; values <= 1e-10 are healthy.
    """
    pts = _sample_points(f.space, npoints)
    norm_f = pointwise_norm(f, vnorm)
    worst = -np.inf
    for t in np.asarray(t_grid, dtype=float):
        avg = cesaro_average(flow, float(t), f)
        dom = dominant_cesaro(flow, float(t), norm_f)
        gap1 = _norm_at(avg, vnorm, pts) - dom.eval(pts)
        cavg = cond_exp(avg, partition)
        cdom = cond_exp_dominant(dom, partition)
        gap2 = _norm_at(cavg, vnorm, pts) - cdom.eval(pts)
        worst = max(worst, float(np.max(gap1)), float(np.max(gap2)))
    return worst


# -- submartingale families ----------------------------------------------------


def _finest_points(filtration):
    space = filtration.space
    if space.kind == "circle":
        cells = filtration.partition_at_level(filtration.max_level)
        bounds = np.asarray(cells.cell_bounds_float())
        return (bounds[:-1] + bounds[1:]) / 2.0
    return np.arange(space.natoms)


def _values_at(fn, pts):
    if isinstance(fn, AtomFunction):
        return fn.values[:, 0]
    return fn(pts)[:, 0]


class SubmartingaleFamily:
    """Finite family of scalar submartingales on one increasing filtration.

    ``processes`` maps index i to the list of time slices g^i at each
    grid time.  Construction validates adaptedness (each slice constant
    on its partition cells) and the submartingale property per index,
    rejecting the input with the offending index and time.
    """

    def __init__(self, filtration, s_grid, processes):
        if filtration.direction != "increasing":
            raise ValueError("submartingale families need an increasing filtration")
        s_grid = np.asarray(s_grid, dtype=float)
        if s_grid.ndim != 1 or s_grid.size < 1 or np.any(np.diff(s_grid) <= 0.0):
            raise ValueError("time grid must be nonempty and strictly increasing")
        processes = [list(slices) for slices in processes]
        if not processes:
            raise ValueError("family must contain at least one process")
        for i, slices in enumerate(processes):
            if len(slices) != s_grid.size:
                raise ValueError(f"process {i} has {len(slices)} slices, "
                                 f"expected {s_grid.size}")
        self.filtration = filtration
        self.s_grid = s_grid
        self.processes = processes
        self._pts = _finest_points(filtration)
        self._validate()

    def _validate(self):
        pts = self._pts
        for i, slices in enumerate(self.processes):
            for k, g in enumerate(slices):
                if g.d != 1:
                    raise ValueError(f"process {i} at time {self.s_grid[k]} "
                                     "is not scalar")
                part = self.filtration.partition(self.s_grid[k])
                proj = cond_exp(g, part)
                gap = np.max(np.abs(_values_at(g, pts) - _values_at(proj, pts)))
                if gap > _SUBMART_TOL:
                    raise ValueError(
                        f"process {i} is not adapted at time {self.s_grid[k]} "
                        f"(defect {gap:.3e})")
            for k in range(len(slices) - 1):
                part = self.filtration.partition(self.s_grid[k])
                e_next = cond_exp(slices[k + 1], part)
                drop = np.max(_values_at(slices[k], pts) - _values_at(e_next, pts))
                if drop > _SUBMART_TOL:
                    raise ValueError(
                        f"process {i} violates the submartingale property "
                        f"between times {self.s_grid[k]} and {self.s_grid[k + 1]} "
                        f"(drop {drop:.3e})")

    @property
    def n_indices(self):
        return len(self.processes)

    def sup_slice(self, k):
        """Pointwise sup over the index set at grid time number k."""
        pts = self._pts
        vals = np.max([_values_at(g[k], pts) for g in self.processes], axis=0)
        space = self.filtration.space
        if space.kind == "circle":
            cells = self.filtration.partition_at_level(self.filtration.max_level)
            bounds = np.asarray(cells.cell_bounds_float())
            return CircleFunction.piecewise_constant(bounds, vals[:, None], space)
        return AtomFunction(space, vals[:, None])


@dataclass(frozen=True)
class SubmartingaleReport:
    sup_defect: float
    terminal_defect: float
    positive_part_bound: float
    passed: bool


def submartingale_sup_check(family):
    """Check that the pointwise index-sup is again a submartingale and
    that its terminal slice matches the sup of terminal slices exactly.

    Also reports the largest integral of the positive part of the sup
    across times; the sup property only has content when that quantity
    is finite, which is automatic at this scale.
    """
    pts = family._pts
    sups = [family.sup_slice(k) for k in range(family.s_grid.size)]
    worst = 0.0
    for k in range(len(sups) - 1):
        part = family.filtration.partition(family.s_grid[k])
        e_next = cond_exp(sups[k + 1], part)
        drop = np.max(_values_at(sups[k], pts) - _values_at(e_next, pts))
        worst = max(worst, float(drop))
    terminal = np.max([_values_at(g[-1], pts) for g in family.processes], axis=0)
    term_defect = float(np.max(np.abs(_values_at(sups[-1], pts) - terminal)))
    bound = 0.0
    for g in sups:
        pos = np.maximum(_values_at(g, pts), 0.0)
        if isinstance(g, AtomFunction):
            bound = max(bound, float(np.sum(pos * g.space.weights)))
        else:
            cells = family.filtration.partition_at_level(family.filtration.max_level)
            widths = np.diff(np.asarray(cells.cell_bounds_float()))
            bound = max(bound, float(np.sum(pos * widths)))
    passed = worst <= _SUBMART_TOL and term_defect == 0.0
    return SubmartingaleReport(float(worst), term_defect, bound, passed)


def random_submartingale_family(filtration, s_grid, n_indices, rng, scale=1.0):
    """Generate a valid family by adding martingale increments plus
    nonnegative adapted bumps; the submartingale property is exact by
    construction.
    """
    if filtration.space.kind != "circle":
        raise ValueError("random families are generated on circle filtrations")
    if filtration.direction != "increasing":
        raise ValueError("submartingale families need an increasing filtration")
    s_grid = np.asarray(s_grid, dtype=float)
    n_fine = 2 ** filtration.max_level
    bounds = np.linspace(0.0, 1.0, n_fine + 1)
    processes = []
    for _ in range(n_indices):
        level = filtration.level(s_grid[0])
        vals = np.repeat(rng.normal(0.0, scale, 2 ** level), n_fine // 2 ** level)
        slices = [CircleFunction.piecewise_constant(bounds, vals[:, None],
                                                    filtration.space)]
        for k in range(1, s_grid.size):
            prev_level = filtration.level(s_grid[k - 1])
            level = filtration.level(s_grid[k])
            if level > prev_level:
                # paired +/- jumps on child cells keep the conditional mean
                half = rng.normal(0.0, scale, 2 ** prev_level)
                inc = np.repeat(np.stack([half, -half], axis=1).ravel(),
                                n_fine // 2 ** (prev_level + 1))
                vals = vals + inc
            bump = np.repeat(rng.uniform(0.0, scale / 2, 2 ** level),
                             n_fine // 2 ** level)
            vals = vals + bump
            slices.append(CircleFunction.piecewise_constant(
                bounds, vals[:, None], filtration.space))
        processes.append(slices)
    return SubmartingaleFamily(filtration, s_grid, processes)
