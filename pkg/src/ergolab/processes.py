"""Process grids built by composing time averages with conditioning.

The two grids studied here apply the same pair of operators in opposite
order: one conditions an ergodic average, the other averages a
conditional expectation.  Entries are honest function objects, so every
diagnostic below can recompute them from scratch and compare.
"""

from dataclasses import dataclass

import numpy as np

from .condexp import cond_exp
from .fields import grid_sup_field, pointwise_norm
from .flows import Flow, apply_flow, cesaro_average
from .functions import AtomFunction, CircleFunction, merge_sum
from .spaces import Filtration, VectorNorm

# slack factor / floor for "errors do not grow along the diagonal"
_DIAG_SLACK = 1.1
_DIAG_FLOOR = 1e-12

_DEFAULT_T_PROBES = (0.3, 0.7, 1.0, 1.9, 2.5, 4.0)


def _max_norm(d):
    return VectorNorm("max", d)


def _constant_like(f, value):
    if isinstance(f, AtomFunction):
        return AtomFunction.constant(value, f.space)
    return CircleFunction.constant(value, f.space)


def _combine(funcs, weights):
    if isinstance(funcs[0], AtomFunction):
        acc = sum(w * g.values for w, g in zip(weights, funcs))
        return AtomFunction(funcs[0].space, acc)
    return merge_sum(funcs, weights)


def _sup_defect(diff, vnorm=None):
    """Sup over the space of the vector norm of a difference function."""
    if vnorm is None:
        vnorm = _max_norm(diff.d)
    if isinstance(diff, AtomFunction):
        return float(np.max(vnorm(diff.values)))
    return float(pointwise_norm(diff, vnorm).sup())


def _check_grid(grid, name, positive):
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d grid")
    if np.any(np.diff(g) <= 0.0):
        raise ValueError(f"{name} must be strictly increasing")
    if positive and g[0] <= 0.0:
        raise ValueError(f"{name} values must be positive")
    if not positive and g[0] < 0.0:
        raise ValueError(f"{name} values must be nonnegative")
    return g


class ProcessGrid:
    """Rectangular table of process entries over (t, s) parameter grids."""

    def __init__(self, kind, f, flow, filtration, t_grid, s_grid, table):
        if kind not in ("ME", "EM"):
            raise ValueError(f"unknown process kind {kind!r}")
        self.kind = kind
        self.t_grid = t_grid
        self.s_grid = s_grid
        self.table = table
        self._f = f
        self._flow = flow
        self._filtration = filtration

    def entry(self, t, s):
        return self.table[(float(t), float(s))]

    def items(self):
        """Entries in row-major order: t outer, s inner."""
        for t in self.t_grid:
            for s in self.s_grid:
                yield (float(t), float(s)), self.table[(float(t), float(s))]

    def recompute_entry(self, t, s):
        """Rebuild one entry from scratch, bypassing the table."""
        part = self._filtration.partition(float(s))
        if self.kind == "ME":
            return cond_exp(cesaro_average(self._flow, float(t), self._f), part)
        return cesaro_average(self._flow, float(t), cond_exp(self._f, part))

    def __repr__(self):
        return (f"ProcessGrid({self.kind}, {len(self.t_grid)}x"
                f"{len(self.s_grid)})")


def me_process(f, flow, filtration, t_grid, s_grid):
    """Grid of conditioned averages: entry (t,s) conditions A_t f on F_s."""
    t_grid = _check_grid(t_grid, "t_grid", positive=True)
    s_grid = _check_grid(s_grid, "s_grid", positive=False)
    table = {}
    for t in t_grid:
        avg = cesaro_average(flow, float(t), f)
        for s in s_grid:
            table[(float(t), float(s))] = cond_exp(avg, filtration.partition(float(s)))
    return ProcessGrid("ME", f, flow, filtration, t_grid, s_grid, table)


def em_process(f, flow, filtration, t_grid, s_grid):
    """Grid of averaged conditionings: entry (t,s) averages E(f|F_s) up to t."""
    t_grid = _check_grid(t_grid, "t_grid", positive=True)
    s_grid = _check_grid(s_grid, "s_grid", positive=False)
    table = {}
    for s in s_grid:
        proj = cond_exp(f, filtration.partition(float(s)))
        for t in t_grid:
            table[(float(t), float(s))] = cesaro_average(flow, float(t), proj)
    return ProcessGrid("EM", f, flow, filtration, t_grid, s_grid, table)


@dataclass(frozen=True)
class ProcessLimits:
    """The three limit objects a process grid is compared against."""

    ergodic_limit: object
    me_limit: object
    em_limit: object


def limits(f, flow, filtration, t_max):
    """Limit objects: ergodic limit of A_t f, its conditioning at the
    terminal level, and the averaged terminal conditioning.

    For ergodic flows the ergodic limit is the exact constant mean;
    otherwise A_{t_max} f stands in as a finite-horizon surrogate, so
    t_max should dominate every t the caller will compare against.
    """
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    if flow.ergodic:
        ergodic_limit = _constant_like(f, f.mean())
    else:
        ergodic_limit = cesaro_average(flow, float(t_max), f)
    terminal = filtration.terminal()
    me_limit = cond_exp(ergodic_limit, terminal)
    em_limit = cesaro_average(flow, float(t_max), cond_exp(f, terminal))
    return ProcessLimits(ergodic_limit, me_limit, em_limit)


def cesaro_decomposition_check(flow, g, t, vnorm=None):
    """Defect of regrouping A_t into unit-time block averages.

    A_t g is reassembled as an average of shifted copies of A_1 g plus a
    fractional tail, each side computed by an independent path.  The
    identity is purely algebraic, so it holds for any flow and any g.
    """
    if t < 1.0:
        raise ValueError("regrouping needs t >= 1")
    if flow.kind == "step":
        inv = 1.0 / flow.h
        if abs(inv - np.rint(inv)) > 1e-9:
            raise ValueError("unit-time blocks need 1/h to be an integer")
    n = int(np.floor(t + 1e-12))
    alpha = t - n
    if alpha < 1e-12:
        alpha = 0.0
    lhs = cesaro_average(flow, float(t), g)
    unit = cesaro_average(flow, 1.0, g)
    terms = [apply_flow(flow, float(k), unit) for k in range(n)]
    weights = [1.0 / t] * n
    if alpha > 0.0:
        terms.append(apply_flow(flow, float(n), cesaro_average(flow, alpha, g)))
        weights.append(alpha / t)
    rhs = _combine(terms, weights)
    return _sup_defect(lhs - rhs, vnorm)


def commutation_check(flow, f, partition, t_grid=None, vnorm=None):
    """Worst defect of swapping the flow with conditioning over a t-grid.

    Zero (to roundoff) exactly when the flow maps partition cells onto
    partition cells; otherwise the returned size is a diagnostic, not a
    failure.
    """
    if t_grid is None:
        t_grid = _DEFAULT_T_PROBES
    ef = cond_exp(f, partition)
    worst = 0.0
    for t in t_grid:
        moved = apply_flow(flow, float(t), f)
        lhs = apply_flow(flow, float(t), ef)
        rhs = cond_exp(moved, partition)
        worst = max(worst, _sup_defect(lhs - rhs, vnorm))
    return worst


class ConvergenceReport:
    """Sequence of (t, s, lp_error, sup_error) rows plus a diagonal verdict.

    Iterating the report yields the row-major error rows.  ``diagonal``
    holds the (t_k, s_k) rows; the report passes when neither diagonal
    error sequence grows by more than the slack factor between steps and
    the final sup error clears the threshold.
    """

    def __init__(self, rows, diagonal, threshold):
        self.rows = rows
        self.diagonal = diagonal
        self.threshold = threshold
        self.final_sup_error = diagonal[-1][3]
        self.monotone = all(
            b <= _DIAG_SLACK * a + _DIAG_FLOOR
            for j in (2, 3)
            for a, b in zip([r[j] for r in diagonal], [r[j] for r in diagonal][1:]))
        if threshold is None:
            self.passed = None
        else:
            self.passed = self.monotone and self.final_sup_error <= threshold

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, i):
        return self.rows[i]


def convergence_table(grid, target, p, vnorm, threshold=None):
    """Per-entry errors of a process grid against a target function."""
    rows = []
    errs = {}
    for (t, s), fn in grid.items():
        nf = pointwise_norm(fn - target, vnorm)
        lp = float(nf.lp(p))
        sup = float(nf.sup())
        rows.append((t, s, lp, sup))
        errs[(t, s)] = (lp, sup)
    k = min(len(grid.t_grid), len(grid.s_grid))
    diagonal = []
    for i in range(k):
        t, s = float(grid.t_grid[i]), float(grid.s_grid[i])
        diagonal.append((t, s) + errs[(t, s)])
    return ConvergenceReport(rows, diagonal, threshold)


def sup_integrability_report(f, source, grid, vnorm=None):
    """L1 size of the pointwise sup of the norm over a finite grid.

    ``source`` selects the family: a flow supplies time averages A_t f,
    a filtration supplies conditionings E(f|F_s).  Always finite at desk
    scale; a lower bound for the true sup over all parameters.
    """
    if vnorm is None:
        vnorm = _max_norm(f.d)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("parameter grid must be nonempty")
    if isinstance(source, Flow):
        members = [cesaro_average(source, float(t), f) for t in grid]
    elif isinstance(source, Filtration):
        members = [cond_exp(f, source.partition(float(s))) for s in grid]
    else:
        raise TypeError("second argument must be a flow or a filtration")
    fields = [pointwise_norm(g, vnorm) for g in members]
    return float(grid_sup_field(fields).lp(1.0))


def ergodic_envelope_constant(flow, f, vnorm=None):
    """Constant C with sup_x ||A_t f - mean||_X <= C / t, all t > 0.

    Rotations: twice the sup of the centered antiderivative over the
    angle.  Single-cycle step flows: one full period of worst-case
    deviation, h * natoms * max ||f - mean||.
    """
    if not flow.ergodic:
        raise ValueError("envelope constant needs an ergodic flow")
    if vnorm is None:
        vnorm = _max_norm(f.d)
    centered = f - _constant_like(f, f.mean())
    if flow.kind == "rotation":
        prim = centered.antiderivative()
        return float(2.0 * pointwise_norm(prim, vnorm).sup() / flow.theta)
    peak = float(np.max(vnorm(centered.values)))
    return float(flow.h * f.space.natoms * peak)


@dataclass(frozen=True)
class EnvelopeReport:
    constant: float
    rows: tuple
    passed: bool


def ergodic_envelope_check(flow, f, t_grid, vnorm=None):
    """Verify sup ||A_t f - mean||_X <= C/t on a grid of times."""
    constant = ergodic_envelope_constant(flow, f, vnorm)
    mean_fn = _constant_like(f, f.mean())
    rows = []
    ok = True
    for t in np.asarray(t_grid, dtype=float):
        err = _sup_defect(cesaro_average(flow, float(t), f) - mean_fn, vnorm)
        bound = constant / float(t)
        rows.append((float(t), err, bound))
        ok = ok and err <= bound + 1e-12
    return EnvelopeReport(constant, tuple(rows), ok)
