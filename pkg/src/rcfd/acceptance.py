"""The nine acceptance checks, runnable from the CLI (`rcfd verify`) and from pytest.

Each check returns a :class:`CriterionResult`; none of them raises on a
failed comparison. Simulation runs are cached per process so the collision
check and the comparative suite share their RCFD runs.
"""
from __future__ import annotations

import contextlib
import io
import math
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .analytic import back2f_stationary, eta_protocol
from .analytic.brute import check_factors
from .config import ExperimentConfig
from .core import (ContentionObservation, NodeRole, Slot, TxKind, default_mapping,
                   resolve_contention)
from .enumeration import enumerate_no_collision
from .mac.back2f import simulate_rounds
from .sweeps import NOTE, RunSpec, SIM_CASES, aggregate, data_rows, execute
from .timings import PhyTimings

TABLE_N = (2, 10, 20, 50)
RCFD_TABLE = (1.8570, 1.0316, 0.9773, 0.9474)
BACK2F_TABLE = (0.9319, 0.9304, 0.9287, 0.9235)
FDMAC_TABLE = (1.6908, 0.9390, 0.8840, 0.8485)

SUITE_GRID = (3, 4, 5, 6)
SUITE_RANDOM = (10, 20, 30)
SUITE_REPS = 10
SUITE_T = 20.0
SUITE_BUDGET = 30 * 60.0
SUITE_PROTOCOLS = ("rcfd", "back2f", "fdmac", "dcf", "dcf-rtscts")
TIME_DOMAIN = ("fdmac", "dcf", "dcf-rtscts")


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        word = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number} {word}: {self.name} [{self.elapsed:.1f} s] {self.detail}"


_RUN_CACHE: dict = {}


def cached_run(spec: RunSpec) -> dict:
    key = (spec.protocol, spec.scenario, spec.size, spec.rep, spec.payload, spec.rate, spec.cfg)
    if key not in _RUN_CACHE:
        _RUN_CACHE[key] = execute(spec)
    return _RUN_CACHE[key]


def suite_config() -> ExperimentConfig:
    return ExperimentConfig(sim_time=SUITE_T, n_s=SUITE_REPS, protocols=SUITE_PROTOCOLS)


def _table_check(number, name, proto, want, tol, relative, budget_s, **kw) -> CriterionResult:
    t0 = time.perf_counter()
    got = [eta_protocol(proto, n, **kw).eta for n in TABLE_N]
    el = time.perf_counter() - t0
    errs = [abs(g - w) / (w if relative else 1.0) for g, w in zip(got, want)]
    ok_vals = all(e <= tol for e in errs)
    ok_time = el < budget_s
    vals = ", ".join(f"N={n}: {g:.4f} vs {w:.4f}" for n, g, w in zip(TABLE_N, got, want))
    detail = f"{vals}; max {'rel' if relative else 'abs'} err {max(errs):.2e} (tol {tol:g}); " \
             f"runtime {el:.3f} s (limit {budget_s:g} s)"
    return CriterionResult(number, name, ok_vals and ok_time, detail, el, dict(eta=got))


def c1_rcfd_table() -> CriterionResult:
    return _table_check(1, "analytic RCFD table", "rcfd", RCFD_TABLE, 0.001, False, 1.0,
                        timings=PhyTimings(), t_d_mode="calibrated", t_h=0.0)


def c2_back2f_table() -> CriterionResult:
    return _table_check(2, "analytic BACK2F table", "back2f", BACK2F_TABLE, 0.005, False, 300.0,
                        timings=PhyTimings(), t_d_mode="calibrated", S=52)


def c3_fdmac_table() -> CriterionResult:
    return _table_check(3, "analytic FD MAC table", "fdmac", FDMAC_TABLE, 0.02, True, 1.0,
                        timings=PhyTimings(), t_d_mode="calibrated")


def c4_chain_factors() -> CriterionResult:
    t0 = time.perf_counter()
    compared, worst, sum_dev, bad = 0, 0.0, 0.0, []
    for N in range(1, 5):
        for S in range(2, 7):
            r = check_factors(N, S)
            compared += r["compared"]
            worst = max(worst, r["max_error"])
            sum_dev = max(sum_dev, r["max_sum_dev"])
            bad += r["mismatches"]
    ok = not bad and worst < 1e-12 and sum_dev < 1e-9
    detail = (f"{compared} factor values over N<=4, S<=6; max abs err {worst:.1e}; "
              f"max |sum-1| {sum_dev:.1e}; mismatches {len(bad)}")
    return CriterionResult(4, "chain factors vs exhaustive draws", ok, detail,
                           time.perf_counter() - t0)


def c5_chain_vs_mc(slots: int = 10 ** 6, seed: int = 2024) -> CriterionResult:
    t0 = time.perf_counter()
    parts, ok = [], True
    rng = np.random.default_rng(seed)
    data = {}
    for N, S in ((3, 4), (5, 8)):
        chain = back2f_stationary(N, S).P_s
        mc = simulate_rounds(N, S, slots, rng)
        z = abs(chain - mc.p_s) / mc.se
        ok &= z <= 3.0
        data[(N, S)] = (chain, mc.p_s, mc.se)
        parts.append(f"(N={N},S={S}) chain {chain:.6f} vs MC {mc.p_s:.6f} +- {mc.se:.6f} "
                     f"({z:.1f} SE)")
    return CriterionResult(5, "BACK2F chain vs Monte Carlo", ok, "; ".join(parts) + " (limit 3 SE)",
                           time.perf_counter() - t0, data)


def _capacity_order(N: int, S: int) -> int:
    m = 1
    while m * S // 2 < N:
        m *= 2
    return m


def c6_no_collision(sim: bool = True, seeds: int = 10) -> CriterionResult:
    t0 = time.perf_counter()
    parts, ok = [], True
    conflicts = physical = cases = 0
    for N in range(2, 5):
        for S in (2, 4, 6, 8):
            rep = enumerate_no_collision(N, S, _capacity_order(N, S))
            conflicts += rep.conflicts
            physical += rep.physical
            cases += rep.draw_vectors
    ok &= conflicts == 0
    parts.append(f"enumeration: {cases} draw vectors, {conflicts} conflicting decisions "
                 f"({physical} physically overlapped receptions counted apart)")
    data = dict(conflicts=conflicts, physical=physical)
    if sim:
        cfg = suite_config()
        collided = {}
        for scenario, sizes, case in (("grid", (3, 5), "sim-grid-caseI"),
                                      ("random", (10, 30), "sim-random")):
            _, payload, rate = SIM_CASES[case]
            for size in sizes:
                rows = [cached_run(RunSpec("rcfd", scenario, size, rep, payload, rate, cfg))
                        for rep in range(seeds)]
                errs = [r["error"] for r in rows if r["error"]]
                c = sum(r.get("collided") or 0 for r in rows)
                collided[(scenario, size)] = c
                ok &= c == 0 and not errs
                parts.append(f"{scenario} {size}: {c} collided data frames over {seeds} seeds"
                             + (f" ({len(errs)} failed runs)" if errs else ""))
        data["collided"] = collided
    return CriterionResult(6, "RCFD no-collision property", ok, "; ".join(parts),
                           time.perf_counter() - t0, data)


def worked_scenario(number: int):
    """Resolve worked scenario 1 or 2: nodes n1, n2, n3 (ids 0, 1, 2) on a line, S = 6.

    Returns the contention outcome.
    """
    adj = {0: {1}, 1: {0, 2}, 2: {1}}
    smap = default_mapping(3, 6)
    if number == 1:
        picks = {0: Slot(3), 2: Slot(4)}        # s4 and s5
        intents = {0: 1, 2: 1}
        has = None
    elif number == 2:
        picks = {0: Slot(1), 1: Slot(5)}        # s2 and s6
        intents = {0: 1, 1: 0}
        has = lambda rr, pt: True  # noqa: E731
    else:
        raise ValueError("scenario is 1 or 2")
    return resolve_contention(adj, smap, picks, intents, has_packet_for=has)


def _slots(*idx):
    return frozenset(Slot(i) for i in idx)


def c7_worked_scenarios() -> CriterionResult:
    t0 = time.perf_counter()
    checks = {}
    o1 = worked_scenario(1)
    roles, dec, obs = o1.roles, o1.decisions, o1.observations
    checks["sc1 both PT"] = (roles[0] is NodeRole.PRIMARY_TRANSMITTER
                             and roles[2] is NodeRole.PRIMARY_TRANSMITTER)
    checks["sc1 n2 hears s1,s3,s5"] = (obs[1].round2_heard_set1 | obs[1].round2_heard_set2
                                       == _slots(0, 2, 4))
    checks["sc1 n2 RR, CTS on s2,s4"] = (roles[1] is NodeRole.RTS_RECEIVER and o1.cts_recipient[1] == 0
                                         and obs[0].round3_heard_set1 | obs[0].round3_heard_set2
                                         == _slots(1, 3))
    checks["sc1 n3 sees s4, F2(n3)=s6"] = (obs[2].round3_heard_set2 == _slots(3))
    checks["sc1 n1 transmits to n2"] = (dec[0].kind is TxKind.PRIMARY and dec[0].dest == 1)
    checks["sc1 n3 denied"] = dec[2].kind is TxKind.HOLD
    checks["sc1 n2 no data"] = dec[1].kind is TxKind.HOLD

    o2 = worked_scenario(2)
    roles, dec, obs = o2.roles, o2.decisions, o2.observations
    checks["sc2 only n1 PT"] = (roles[0] is NodeRole.PRIMARY_TRANSMITTER
                                and roles[1] is not NodeRole.PRIMARY_TRANSMITTER)
    checks["sc2 RTS on s1,s5"] = obs[1].round2_heard_set1 | obs[1].round2_heard_set2 == _slots(0, 4)
    checks["sc2 n2 RR, CTS on s2,s4"] = (roles[1] is NodeRole.RTS_RECEIVER
                                         and obs[0].round3_heard_set1 | obs[0].round3_heard_set2
                                         == _slots(1, 3))
    checks["sc2 n1 primary to n2"] = dec[0].kind is TxKind.PRIMARY and dec[0].dest == 1
    checks["sc2 n2 secondary to n1"] = dec[1].kind is TxKind.SECONDARY_FD and dec[1].dest == 0
    checks["sc2 n3 silent"] = dec[2].kind is TxKind.HOLD
    # swapped roles give the same exchange
    adj = {0: {1}, 1: {0, 2}, 2: {1}}
    sw = resolve_contention(adj, default_mapping(3, 6), {0: Slot(5), 1: Slot(1)}, {0: 1, 1: 0},
                            has_packet_for=lambda rr, pt: True)
    checks["sc2 swapped"] = (sw.decisions[1].kind is TxKind.PRIMARY
                             and sw.decisions[0].kind is TxKind.SECONDARY_FD)
    failed = [k for k, v in checks.items() if not v]
    detail = f"{len(checks) - len(failed)}/{len(checks)} narrative checks hold" + \
             (f"; failed: {', '.join(failed)}" if failed else "")
    return CriterionResult(7, "worked scenarios 1 and 2", not failed, detail,
                           time.perf_counter() - t0, dict(checks=checks))


def suite_specs(cfg: ExperimentConfig | None = None, reps: int = SUITE_REPS) -> list[RunSpec]:
    """Comparative suite in repetition-major order, so a cut-off run still covers every point."""
    cfg = cfg or suite_config()
    points = [("sim-grid-caseI", g) for g in SUITE_GRID] + \
             [("sim-grid-caseII", g) for g in SUITE_GRID] + \
             [("sim-random", n) for n in SUITE_RANDOM]
    specs = []
    for rep in range(reps):
        for fig, size in points:
            scenario, payload, rate = SIM_CASES[fig]
            for p in cfg.protocols:
                specs.append(RunSpec(p, scenario, size, rep, payload, rate, cfg))
    return specs


def _figure_of(spec: RunSpec) -> str:
    for fig, (scenario, payload, rate) in SIM_CASES.items():
        if (scenario, payload, rate) == (spec.scenario, spec.payload, spec.rate):
            return fig
    raise KeyError(spec)


def suite_orderings(agg: dict) -> tuple[list[str], list[str]]:
    """Check the figure-level orderings on aggregated rows keyed by (figure, size, protocol)."""
    held, broken = [], []

    def record(ok, text):
        (held if ok else broken).append(text)

    points = sorted({(f, s) for f, s, _ in agg})
    for fig, size in points:
        rows = {p: agg[(fig, size, p)] for f, s, p in agg if (f, s) == (fig, size)}
        if "rcfd" not in rows or rows["rcfd"]["gamma_mean"] is None:
            continue
        g = {p: r["gamma_mean"] for p, r in rows.items() if r["gamma_mean"] is not None}
        best = max((v for p, v in g.items() if p != "rcfd"), default=-math.inf)
        record(g["rcfd"] > best, f"{fig} {size}: gamma rcfd {g['rcfd']:.3f} vs best other {best:.3f}")
        if fig == "sim-grid-caseII":
            d = {p: r["delta_ns_mean"] for p, r in rows.items() if r["delta_ns_mean"] is not None}
            freq = max(d.get("rcfd", math.inf), d.get("back2f", math.inf))
            time_dom = min((d[p] for p in TIME_DOMAIN if p in d), default=math.inf)
            record(freq < time_dom, f"{fig} {size}: delay rcfd {d.get('rcfd', 0) / 1e6:.0f} ms, "
                   f"back2f {d.get('back2f', 0) / 1e6:.0f} ms vs time-domain min "
                   f"{time_dom / 1e6:.0f} ms")
        if fig == "sim-random":
            j = {p: r["jain_mean"] for p, r in rows.items() if r["jain_mean"] is not None}
            bestj = max((v for p, v in j.items() if p != "rcfd"), default=-math.inf)
            record(j["rcfd"] > bestj, f"{fig} {size}: jain rcfd {j['rcfd']:.3f} vs best other {bestj:.3f}")
    return held, broken


def c8_comparative(budget_s: float = SUITE_BUDGET, reps: int = SUITE_REPS,
                   progress=None) -> CriterionResult:
    t0 = time.perf_counter()
    specs = suite_specs(reps=reps)
    done = []
    for i, spec in enumerate(specs):
        if time.perf_counter() - t0 > budget_s:
            break
        done.append((spec, cached_run(spec)))
        if progress:
            progress(i + 1, len(specs), time.perf_counter() - t0)
    el = time.perf_counter() - t0
    complete = len(done) == len(specs)
    per_point = len(specs) // reps
    reps_done = len(done) // per_point
    # orderings use whole repetitions only, so every point has the same sample size
    used = done[:reps_done * per_point]
    by_fig: dict = {}
    for spec, row in used:
        by_fig.setdefault(_figure_of(spec), []).append(row)
    agg = {}
    for fig, runs in by_fig.items():
        for r in aggregate(fig, runs):
            agg[(fig, r["size"], r["protocol"])] = r
    held, broken = suite_orderings(agg)
    failed_runs = sum(1 for _, r in used if r["error"])
    ok = complete and not broken and failed_runs == 0 and el < budget_s
    detail = (f"{len(done)}/{len(specs)} runs in {el:.0f} s (limit {budget_s:.0f} s), "
              f"{reps_done} complete repetitions used; {len(held)} orderings hold, "
              f"{len(broken)} broken" + (f" [{'; '.join(broken)}]" if broken else "")
              + f"; failed runs {failed_runs}. Note: {NOTE}")
    return CriterionResult(8, "comparative simulation orderings", ok, detail, el,
                           dict(agg=agg, held=held, broken=broken, complete=complete))


def c9_determinism() -> CriterionResult:
    from .cli import main

    t0 = time.perf_counter()
    commands = [
        ["simulate", "protocols=rcfd,dcf,back2f", "g=3", "n_s=2", "sim_time=2", "ts_max=0.5"],
        ["sweep", "sim-random", "protocols=rcfd,fdmac", "random_n=10", "n_s=2", "sim_time=2",
         "ts_max=0.5"],
        ["sweep", "throughput-vs-n", "protocols=rcfd,dcf"],
    ]
    parts, ok = [], True
    with tempfile.TemporaryDirectory() as tmp:
        for k, cmd in enumerate(commands):
            outs = []
            for attempt in range(2):
                path = os.path.join(tmp, f"run{k}_{attempt}.csv")
                with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
                    code = main(["--seed", "7", "--out", path] + cmd)
                with open(path, encoding="utf-8") as f:
                    outs.append(data_rows(f.read()))
                ok &= code == 0
            same = outs[0] == outs[1] and len(outs[0]) > 1
            ok &= same
            parts.append(f"{' '.join(cmd[:2])}: {len(outs[0]) - 1} rows, "
                         f"{'identical' if same else 'DIFFERENT'}")
    return CriterionResult(9, "byte-identical reruns", ok, "; ".join(parts), time.perf_counter() - t0)


CRITERIA = {1: c1_rcfd_table, 2: c2_back2f_table, 3: c3_fdmac_table, 4: c4_chain_factors,
            5: c5_chain_vs_mc, 6: c6_no_collision, 7: c7_worked_scenarios, 8: c8_comparative,
            9: c9_determinism}


def run_all(selected=None, printer=print) -> list[CriterionResult]:
    out = []
    for n in sorted(selected or CRITERIA):
        try:
            res = CRITERIA[n]()
        except Exception as e:  # a crash is a failed criterion, not a crashed report
            res = CriterionResult(n, CRITERIA[n].__name__, False, f"raised {type(e).__name__}: {e}")
        out.append(res)
        if printer:
            printer(res.line())
    return out
