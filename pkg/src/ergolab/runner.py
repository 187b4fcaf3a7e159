"""Scenario runner: builds objects from configs, executes checks, writes artifacts.

Persisted artifacts never contain wall times, so identical config + seed
reproduces them byte for byte; timings go to the console only.
"""

import json
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .condexp import (LinearFunctional, cond_exp, defining_property_check,
                      functional_commutation_check)
from .fields import lp_norm, pointwise_norm, sup_norm
from .flows import (apply_flow, cesaro_average, identity_flow, rotation_flow,
                    shift_perm, step_flow)
from .functions import (AtomFunction, CircleFunction, from_smooth,
                        harmonic_generator, hat, sawtooth)
from .inequalities import (dominant_ineq_em, dominant_ineq_me,
                           domination_chain_check, maximal_ineq_em,
                           maximal_ineq_me, random_submartingale_family,
                           submartingale_sup_check)
from .processes import (cesaro_decomposition_check, commutation_check,
                        convergence_table, em_process, ergodic_envelope_check,
                        limits, me_process, sup_integrability_report)
from .spaces import (Filtration, VectorNorm, circle_space, discrete_space,
                     partition_at_level, product_space)

VERSION = "0.1.0"


# -- config -> objects ----------------------------------------------------------


def build_space(cfg):
    if cfg.space_kind == "circle":
        return circle_space()
    if cfg.space_kind == "discrete":
        if cfg.space_weights is not None:
            w = np.asarray(cfg.space_weights, dtype=float)
        else:
            w = np.full(cfg.space_atoms, 1.0 / cfg.space_atoms)
        return discrete_space(w)
    return product_space(cfg.space_cyclic_size,
                         np.asarray(cfg.space_factor_weights, dtype=float))


def build_flow(cfg, space):
    if cfg.flow_kind == "rotation":
        return rotation_flow(cfg.flow_theta, space)
    if cfg.flow_kind == "identity":
        return identity_flow(space)
    if cfg.flow_map is None or cfg.flow_map == "shift":
        perm = shift_perm(space)
    else:
        perm = np.array([int(tok) for tok in cfg.flow_map[5:].split(",")])
    return step_flow(space, perm, cfg.flow_h)


def build_function(cfg, space):
    kind = cfg.function_kind
    if kind == "sawtooth":
        return sawtooth(cfg.function_d, cfg.function_amplitudes,
                        cfg.function_phases, space)
    if kind == "hat":
        return hat(cfg.function_d, cfg.function_amplitudes,
                   cfg.function_phases, space)
    if kind == "smooth":
        gen = harmonic_generator(cfg.function_d, cfg.function_amplitudes,
                                 cfg.function_phases, cfg.function_harmonic)
        # desk-scale fidelity; tighter targets just multiply pieces
        return from_smooth(gen, cfg.function_d, target=2e-5, space=space)
    if kind == "explicit":
        k1 = max(len(comp) for piece in cfg.function_pieces for comp in piece)
        coeffs = np.zeros((len(cfg.function_pieces), k1, cfg.function_d))
        for i, piece in enumerate(cfg.function_pieces):
            for j, comp in enumerate(piece):
                coeffs[i, :len(comp), j] = comp
        return CircleFunction.from_pieces(np.asarray(cfg.function_breaks),
                                          coeffs, space)
    return AtomFunction(space, np.asarray(cfg.function_values, dtype=float))


@dataclass
class ScenarioContext:
    cfg: object
    space: object
    flow: object
    f: object
    filtration: object
    vnorm: object
    t_grid: np.ndarray
    s_grid: np.ndarray
    rng: object
    _cache: dict = field(default_factory=dict)

    def me_grid(self):
        if "me" not in self._cache:
            self._cache["me"] = me_process(self.f, self.flow, self.filtration,
                                           self.t_grid, self.s_grid)
        return self._cache["me"]

    def em_grid(self):
        if "em" not in self._cache:
            self._cache["em"] = em_process(self.f, self.flow, self.filtration,
                                           self.t_grid, self.s_grid)
        return self._cache["em"]

    def proc_limits(self):
        if "limits" not in self._cache:
            self._cache["limits"] = limits(self.f, self.flow, self.filtration,
                                           2.0 * float(self.t_grid[-1]))
        return self._cache["limits"]


def build_context(cfg, rng):
    space = build_space(cfg)
    flow = build_flow(cfg, space)
    f = build_function(cfg, space)
    filtration = Filtration(space, cfg.filtration_direction,
                            cfg.filtration_max_level)
    vnorm = VectorNorm(cfg.vector_norm, f.d)
    return ScenarioContext(cfg, space, flow, f, filtration, vnorm,
                           np.asarray(cfg.t_grid), np.asarray(cfg.s_grid), rng)


# -- check records ---------------------------------------------------------------


@dataclass
class CheckRecord:
    name: str
    status: str
    value: float = None
    bound: float = None
    tolerance: float = None
    note: str = ""
    wall_time: float = 0.0
    rows: tuple = ()
    plots: tuple = ()


def _verdict(defect, tol):
    return "PASS" if defect <= tol else "FAIL"


def _sample_points(space, n=1000):
    if space.kind == "circle":
        # offset keeps samples away from dyadic and shifted breakpoints
        return (np.arange(n) + 0.431) / n
    return np.arange(space.natoms)


def _sample_defect(a, b, vnorm, pts):
    if isinstance(a, AtomFunction):
        return float(np.max(vnorm(a.values - b.values)))
    return float(np.max(vnorm(a(pts) - b(pts))))


def _levels(ctx):
    return range(ctx.cfg.filtration_max_level + 1)


# -- operator contract checks ----------------------------------------------------


def _chk_defining_property(ctx):
    rows = []
    worst = 0.0
    for lvl in _levels(ctx):
        d = float(defining_property_check(ctx.f, ctx.filtration.partition_at_level(lvl)))
        rows.append((None, float(lvl), "defect", d))
        worst = max(worst, d)
    return CheckRecord("defining_property", _verdict(worst, 1e-12), worst,
                       tolerance=1e-12, rows=tuple(rows))


def _chk_tower_idempotence(ctx):
    pts = _sample_points(ctx.space)
    worst = 0.0
    rows = []
    for lvl in _levels(ctx):
        part = ctx.filtration.partition_at_level(lvl)
        once = cond_exp(ctx.f, part)
        twice = cond_exp(once, part)
        d_idem = _sample_defect(twice, once, ctx.vnorm, pts)
        rows.append((None, float(lvl), "idempotence_defect", d_idem))
        worst = max(worst, d_idem)
        for finer in _levels(ctx):
            if finer <= lvl:
                continue
            through = cond_exp(cond_exp(ctx.f, ctx.filtration.partition_at_level(finer)),
                               part)
            d_tower = _sample_defect(through, once, ctx.vnorm, pts)
            worst = max(worst, d_tower)
        rows.append((None, float(lvl), "tower_defect", worst))
    return CheckRecord("tower_idempotence", _verdict(worst, 1e-12), worst,
                       tolerance=1e-12, rows=tuple(rows))


def _chk_functional_commutation(ctx):
    weights = ctx.rng.normal(size=ctx.f.d)
    functional = LinearFunctional(weights)
    worst = 0.0
    rows = []
    for lvl in _levels(ctx):
        part = ctx.filtration.partition_at_level(lvl)
        d = float(functional_commutation_check(ctx.f, part, functional))
        rows.append((None, float(lvl), "defect", d))
        worst = max(worst, d)
    return CheckRecord("functional_commutation", _verdict(worst, 1e-12), worst,
                       tolerance=1e-12, rows=tuple(rows))


def _chk_flow_isometry(ctx):
    base_lp = float(lp_norm(ctx.f, ctx.cfg.p, ctx.vnorm))
    base_sup = float(sup_norm(ctx.f, ctx.vnorm))
    worst = 0.0
    rows = []
    for t in _probe_times(ctx, 6):
        moved = apply_flow(ctx.flow, t, ctx.f)
        d_lp = abs(float(lp_norm(moved, ctx.cfg.p, ctx.vnorm)) - base_lp)
        d_sup = abs(float(sup_norm(moved, ctx.vnorm)) - base_sup)
        rows.append((t, None, "lp_defect", d_lp))
        rows.append((t, None, "sup_defect", d_sup))
        worst = max(worst, d_lp, d_sup)
    return CheckRecord("flow_isometry", _verdict(worst, 1e-10), worst,
                       tolerance=1e-10, rows=tuple(rows))


def _chk_semigroup_law(ctx):
    pts = _sample_points(ctx.space)
    worst = 0.0
    rows = []
    probes = _probe_times(ctx, 3)
    if ctx.flow.kind == "step":
        # the step evolution composes only on the lattice of step widths
        h = ctx.flow.h
        probes = sorted({max(h, h * round(t / h)) for t in probes})
    for t1 in probes:
        for t2 in probes:
            joint = apply_flow(ctx.flow, t1 + t2, ctx.f)
            nested = apply_flow(ctx.flow, t1, apply_flow(ctx.flow, t2, ctx.f))
            d = _sample_defect(joint, nested, ctx.vnorm, pts)
            rows.append((t1 + t2, None, "defect", d))
            worst = max(worst, d)
    return CheckRecord("semigroup_law", _verdict(worst, 1e-10), worst,
                       tolerance=1e-10, rows=tuple(rows))


def _chk_contraction(ctx):
    base = float(lp_norm(ctx.f, ctx.cfg.p, ctx.vnorm))
    worst = -np.inf
    rows = []
    for t in ctx.t_grid:
        avg = cesaro_average(ctx.flow, float(t), ctx.f)
        excess = float(lp_norm(avg, ctx.cfg.p, ctx.vnorm)) - base
        rows.append((float(t), None, "norm_excess", excess))
        worst = max(worst, excess)
    return CheckRecord("contraction", _verdict(worst, 1e-9), worst,
                       tolerance=1e-9, rows=tuple(rows))


def _probe_times(ctx, k, cap=None):
    ts = ctx.t_grid if cap is None else ctx.t_grid[ctx.t_grid <= cap]
    if ts.size == 0:
        ts = ctx.t_grid[:1]
    idx = np.unique(np.linspace(0, len(ts) - 1, k).round().astype(int))
    return [float(ts[i]) for i in idx]


# -- process checks --------------------------------------------------------------


def _chk_decomposition(ctx):
    # the identity is uniform in t; large probes only cost time
    t_max = min(float(ctx.t_grid[-1]), 64.0)
    probes = sorted({1.0, 2.5, min(7.5, t_max), t_max})
    probes = [t for t in probes if 1.0 <= t <= t_max]
    worst = 0.0
    rows = []
    for t in probes:
        d = float(cesaro_decomposition_check(ctx.flow, ctx.f, t, ctx.vnorm))
        rows.append((t, None, "defect", d))
        worst = max(worst, d)
    return CheckRecord("decomposition", _verdict(worst, 1e-9), worst,
                       tolerance=1e-9, rows=tuple(rows))


def _chk_commutation(ctx):
    part = ctx.filtration.partition_at_level(ctx.cfg.filtration_max_level)
    d = float(commutation_check(ctx.flow, ctx.f, part, vnorm=ctx.vnorm))
    status = "PASS" if d <= 1e-12 else "DIAGNOSTIC"
    return CheckRecord("commutation", status, d, tolerance=1e-12,
                       rows=((None, None, "defect", d),))


def _convergence_record(ctx, name, grid, target):
    table = convergence_table(grid, target, ctx.cfg.p, ctx.vnorm,
                              threshold=ctx.cfg.threshold)
    rows = []
    for t, s, lp_err, sup_err in table:
        rows.append((t, s, "lp_error", lp_err))
        rows.append((t, s, "sup_error", sup_err))
    plots = [{"suffix": "errors", "columns": ("t", "error"),
              "rows": [(t, sup_err) for t, _, _, sup_err in table.diagonal]}]
    if ctx.flow.ergodic and name == "me_convergence":
        from .processes import ergodic_envelope_constant
        c = ergodic_envelope_constant(ctx.flow, ctx.f, ctx.vnorm)
        plots.append({"suffix": "envelope", "columns": ("t", "bound"),
                      "rows": [(t, c / t) for t, _, _, _ in table.diagonal]})
    status = "PASS" if table.passed else "FAIL"
    note = "" if table.monotone else "diagonal errors grew beyond slack"
    return CheckRecord(name, status, float(table.final_sup_error),
                       bound=ctx.cfg.threshold, tolerance=0.0, note=note,
                       rows=tuple(rows), plots=tuple(plots))


def _chk_me_convergence(ctx):
    return _convergence_record(ctx, "me_convergence", ctx.me_grid(),
                               ctx.proc_limits().me_limit)


def _chk_em_convergence(ctx):
    return _convergence_record(ctx, "em_convergence", ctx.em_grid(),
                               ctx.proc_limits().em_limit)


def _chk_joint_vs_iterated(ctx):
    grid = ctx.me_grid()
    target = ctx.proc_limits().me_limit
    table = convergence_table(grid, target, ctx.cfg.p, ctx.vnorm)
    errs = {(t, s): sup_err for t, s, _, sup_err in table}
    s_last = float(ctx.s_grid[-1])
    rows = []
    plot_rows = []
    k = min(len(ctx.t_grid), len(ctx.s_grid))
    for i in range(k):
        t, s = float(ctx.t_grid[i]), float(ctx.s_grid[i])
        joint = errs[(t, s)]
        iterated = errs[(t, s_last)]
        rows.append((t, s, "joint_error", joint))
        rows.append((t, s_last, "iterated_error", iterated))
        plot_rows.append((t, joint, iterated))
    plots = ({"suffix": "diagonal", "columns": ("t", "joint", "iterated"),
              "rows": plot_rows},)
    return CheckRecord("joint_vs_iterated", "DIAGNOSTIC",
                       float(plot_rows[-1][1]), rows=tuple(rows), plots=plots)


def _chk_ergodic_envelope(ctx):
    report = ergodic_envelope_check(ctx.flow, ctx.f, ctx.t_grid, ctx.vnorm)
    rows = []
    for t, err, bound in report.rows:
        rows.append((t, None, "sup_error", err))
        rows.append((t, None, "bound", bound))
    plots = ({"suffix": "errors", "columns": ("t", "error"),
              "rows": [(t, e) for t, e, _ in report.rows]},
             {"suffix": "envelope", "columns": ("t", "bound"),
              "rows": [(t, b) for t, _, b in report.rows]})
    status = "PASS" if report.passed else "FAIL"
    return CheckRecord("ergodic_envelope", status, report.constant,
                       tolerance=1e-12, rows=tuple(rows), plots=plots)


# -- inequality checks -----------------------------------------------------------


def _ineq_rows(rep):
    return tuple((None, None, metric, float(getattr(rep, metric)))
                 for metric in rep._fields if metric != "passed")


def _chk_dominant_me(ctx):
    rep = dominant_ineq_me(ctx.f, ctx.flow, ctx.filtration, ctx.cfg.p,
                           ctx.t_grid, ctx.s_grid, ctx.vnorm)
    return CheckRecord("dominant_ineq_me", "PASS" if rep.passed else "FAIL",
                       rep.ratio, bound=rep.bound, tolerance=1e-9,
                       rows=_ineq_rows(rep))


def _chk_dominant_em(ctx):
    rep = dominant_ineq_em(ctx.f, ctx.flow, ctx.filtration, ctx.cfg.p,
                           ctx.t_grid, ctx.s_grid, ctx.vnorm)
    return CheckRecord("dominant_ineq_em", "PASS" if rep.passed else "FAIL",
                       rep.ratio, bound=rep.bound, tolerance=1e-9,
                       rows=_ineq_rows(rep))


def _chk_maximal_me(ctx):
    rep = maximal_ineq_me(ctx.f, ctx.flow, ctx.filtration, ctx.cfg.p,
                          ctx.t_grid, ctx.s_grid, ctx.cfg.epsilon, ctx.vnorm)
    return CheckRecord("maximal_ineq_me", "PASS" if rep.passed else "FAIL",
                       rep.exceedance, bound=rep.bound, tolerance=1e-9,
                       rows=_ineq_rows(rep))


def _chk_maximal_em(ctx):
    rep = maximal_ineq_em(ctx.f, ctx.flow, ctx.filtration, ctx.cfg.p,
                          ctx.t_grid, ctx.s_grid, ctx.cfg.epsilon, ctx.vnorm)
    return CheckRecord("maximal_ineq_em", "PASS" if rep.passed else "FAIL",
                       rep.exceedance, bound=rep.bound, tolerance=1e-9,
                       rows=_ineq_rows(rep))


def _chk_domination_chain(ctx):
    part = ctx.filtration.partition_at_level(ctx.cfg.filtration_max_level)
    d = float(domination_chain_check(ctx.f, ctx.flow, part,
                                     _probe_times(ctx, 6, cap=64.0), ctx.vnorm))
    return CheckRecord("domination_chain", _verdict(d, 1e-10), d,
                       tolerance=1e-10, rows=((None, None, "defect", d),))


def _chk_sup_integrability(ctx):
    over_flow = float(sup_integrability_report(ctx.f, ctx.flow, ctx.t_grid,
                                               ctx.vnorm))
    over_filt = float(sup_integrability_report(ctx.f, ctx.filtration,
                                               ctx.s_grid, ctx.vnorm))
    rows = ((None, None, "flow_sup_l1", over_flow),
            (None, None, "filtration_sup_l1", over_filt))
    return CheckRecord("sup_integrability", "DIAGNOSTIC",
                       max(over_flow, over_filt), rows=rows)


# -- martingale-side checks ------------------------------------------------------


def _chk_martingale_surrogate(ctx):
    if ctx.space.kind != "circle":
        raise ValueError("martingale surrogate needs a circle scenario")
    if not ctx.f.is_continuous():
        raise ValueError("martingale surrogate needs a continuous function")
    lip = float(pointwise_norm(ctx.f.derivative(), ctx.vnorm).sup())
    worst_ratio = 0.0
    ok = True
    rows = []
    for lvl in _levels(ctx):
        part = partition_at_level(ctx.space, lvl)
        err = float(lp_norm(cond_exp(ctx.f, part) - ctx.f, 1.0, ctx.vnorm))
        bound = lip * 2.0 ** (-lvl)
        rows.append((None, float(lvl), "l1_error", err))
        rows.append((None, float(lvl), "bound", bound))
        ok = ok and err <= bound + 1e-12
        if bound > 0.0:
            worst_ratio = max(worst_ratio, err / bound)
    plots = ({"suffix": "errors", "columns": ("level", "error"),
              "rows": [(r[1], r[3]) for r in rows if r[2] == "l1_error"]},)
    return CheckRecord("martingale_surrogate", "PASS" if ok else "FAIL",
                       worst_ratio, bound=1.0, tolerance=1e-12,
                       rows=tuple(rows), plots=plots)


def _chk_submartingale_sup(ctx):
    if ctx.space.kind != "circle":
        raise ValueError("submartingale families are generated on the circle")
    filt = Filtration(ctx.space, "increasing", ctx.cfg.filtration_max_level)
    times = np.arange(ctx.cfg.filtration_max_level + 1, dtype=float)
    family = random_submartingale_family(filt, times, 5, ctx.rng)
    rep = submartingale_sup_check(family)
    rows = ((None, None, "sup_defect", rep.sup_defect),
            (None, None, "terminal_defect", rep.terminal_defect),
            (None, None, "positive_part_bound", rep.positive_part_bound))
    return CheckRecord("submartingale_sup", "PASS" if rep.passed else "FAIL",
                       rep.sup_defect, tolerance=1e-12, rows=rows)


def _chk_me_em_coincidence(ctx):
    me = ctx.me_grid()
    em = ctx.em_grid()
    pts = _sample_points(ctx.space)
    worst = 0.0
    for (t, s), fn in me.items():
        worst = max(worst, _sample_defect(fn, em.entry(t, s), ctx.vnorm, pts))
    lim = ctx.proc_limits()
    limit_gap = _sample_defect(lim.me_limit, lim.em_limit, ctx.vnorm, pts)
    passed = worst <= 1e-10 and limit_gap <= 1e-9
    rows = ((None, None, "entry_defect", worst),
            (None, None, "limit_defect", limit_gap))
    return CheckRecord("me_em_coincidence", "PASS" if passed else "DIAGNOSTIC",
                       worst, tolerance=1e-10, rows=rows)


CHECKS = {
    "defining_property": _chk_defining_property,
    "tower_idempotence": _chk_tower_idempotence,
    "functional_commutation": _chk_functional_commutation,
    "flow_isometry": _chk_flow_isometry,
    "semigroup_law": _chk_semigroup_law,
    "contraction": _chk_contraction,
    "decomposition": _chk_decomposition,
    "commutation": _chk_commutation,
    "me_convergence": _chk_me_convergence,
    "em_convergence": _chk_em_convergence,
    "joint_vs_iterated": _chk_joint_vs_iterated,
    "ergodic_envelope": _chk_ergodic_envelope,
    "dominant_ineq_me": _chk_dominant_me,
    "dominant_ineq_em": _chk_dominant_em,
    "maximal_ineq_me": _chk_maximal_me,
    "maximal_ineq_em": _chk_maximal_em,
    "domination_chain": _chk_domination_chain,
    "sup_integrability": _chk_sup_integrability,
    "martingale_surrogate": _chk_martingale_surrogate,
    "submartingale_sup": _chk_submartingale_sup,
    "me_em_coincidence": _chk_me_em_coincidence,
}

CHECK_NAMES = tuple(CHECKS)


# -- reports and artifacts -------------------------------------------------------


@dataclass
class RunReport:
    scenario: str
    seed: int
    version: str
    records: list
    config_echo: str
    artifacts: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.status != "FAIL" for r in self.records)


def run_scenario(cfg, out_dir=None, seed=None):
    """Execute a scenario's checks in declaration order.

    Check-level rejections become FAIL records; they never abort the run.
    """
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    rng = np.random.default_rng(cfg.seed)
    ctx = build_context(cfg, rng)
    records = []
    for name in cfg.checks:
        start = time.perf_counter()
        try:
            rec = CHECKS[name](ctx)
        except (ValueError, TypeError) as exc:
            rec = CheckRecord(name, "FAIL", note=str(exc))
        rec.wall_time = time.perf_counter() - start
        records.append(rec)
    report = RunReport(cfg.name, cfg.seed, VERSION, records, cfg.echo())
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = write_csv(report, out_dir)
        plot_paths = emit_plot_data(report, out_dir)
        report.artifacts = [os.path.basename(csv_path)] \
            + [os.path.basename(p) for p in plot_paths]
        write_json(report, out_dir)
    return report


def _fmt(v):
    return "" if v is None else repr(float(v))


def write_csv(report, out_dir):
    """Per-entry metric rows, one file per scenario, stable order."""
    path = os.path.join(out_dir, f"{report.scenario}.csv")
    lines = ["scenario,check,t,s,metric,value"]
    for rec in report.records:
        for t, s, metric, value in rec.rows:
            lines.append(f"{report.scenario},{rec.name},{_fmt(t)},{_fmt(s)},"
                         f"{metric},{_fmt(value)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def emit_plot_data(report, out_dir):
    """Whitespace-delimited series files for external plotting tools."""
    paths = []
    for rec in report.records:
        for plot in rec.plots:
            name = f"{report.scenario}_{rec.name}_{plot['suffix']}.dat"
            path = os.path.join(out_dir, name)
            lines = ["# " + " ".join(plot["columns"])]
            for row in plot["rows"]:
                lines.append(" ".join(repr(float(v)) for v in row))
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(lines) + "\n")
            paths.append(path)
    return paths


def write_json(report, out_dir):
    """Self-contained machine-readable report; wall times excluded so the
    bytes are reproducible."""
    path = os.path.join(out_dir, f"{report.scenario}.json")
    payload = {
        "scenario": report.scenario,
        "version": report.version,
        "seed": report.seed,
        "config": report.config_echo,
        "records": [
            {"name": r.name, "status": r.status, "value": r.value,
             "bound": r.bound, "tolerance": r.tolerance, "note": r.note}
            for r in report.records
        ],
        "artifacts": report.artifacts,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
