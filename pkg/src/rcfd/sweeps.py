"""Parameter sweeps behind the analytic table, the analytic figures and the simulation figures.

Every sweep returns a list of row dicts in grid order; :func:`write_csv` turns
them into the CSV layout shared by all commands.
"""
from __future__ import annotations

import csv
import io
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analytic import back2f_stationary, eta_protocol
from .analytic.throughput import eta_back2f
from .config import ExperimentConfig
from .sim.runner import SimConfig, Simulation
from .sim.topology import build_grid, build_random

FIGURES = ("throughput-vs-n", "throughput-vs-length", "sim-grid-caseI", "sim-grid-caseII",
           "sim-random")
TABLE_PROTOCOLS = ("fdmac", "back2f", "rcfd", "dcf", "dcf-rtscts")
FIG_N = tuple(range(2, 51))
FIG_LENGTHS = tuple(range(100, 2301, 100))
FIG_LENGTH_N = 10

# (scenario, payload bytes, rate Mbit/s)
SIM_CASES = {
    "sim-grid-caseI": ("grid", 1000, 6),
    "sim-grid-caseII": ("grid", 200, 54),
    "sim-random": ("random", 500, 18),
}

NOTE = ("values come from this package's event-driven engine with a range-cutoff channel; "
        "they reproduce orderings, not the published ns3 curve values")

TABLE_COLUMNS = ["protocol", "N", "L", "R", "t_d_mode", "eta", "P_s", "P_tr", "runtime_ms"]
CURVE_COLUMNS = ["figure", "protocol", "N", "L", "R", "t_d_mode", "eta", "P_s", "P_tr"]
RUN_COLUMNS = ["protocol", "scenario", "size", "nodes", "L", "R", "rep", "seed", "gamma",
               "delta_ns", "jain", "offered_bps", "generated", "delivered", "collided",
               "discard_retry_limit", "discard_queue_overflow", "discard_age_limit",
               "in_queue", "in_flight", "attempts", "error"]
SWEEP_COLUMNS = ["figure", "protocol", "scenario", "size", "nodes", "L", "R", "n_s",
                 "gamma_mean", "gamma_sd", "delta_ns_mean", "delta_ns_sd", "jain_mean",
                 "jain_sd", "collided_total", "failed_runs", "error"]


# -- analytic -------------------------------------------------------------------

def _analytic_kw(cfg: ExperimentConfig, protocol: str, payload: int, rate: int) -> dict:
    kw = dict(timings=cfg.timings(), L=payload, R=rate, t_d_mode=cfg.t_d_mode, t_d=cfg.t_d)
    if protocol == "fdmac":
        kw["success"] = cfg.fd_success
    elif protocol == "rcfd":
        kw["t_h"] = cfg.t_h
    elif protocol == "back2f":
        kw["S"] = cfg.subcarriers
    return kw


def run_table_analysis(cfg: ExperimentConfig | None = None) -> list[dict]:
    """Saturation throughput rows for every (protocol, N) of the comparison table."""
    cfg = cfg or ExperimentConfig()
    rows = []
    protos = [p for p in TABLE_PROTOCOLS if p in cfg.protocols]
    for proto in protos:
        for n in cfg.n:
            t0 = time.perf_counter()
            rep = eta_protocol(proto, n, **_analytic_kw(cfg, proto, cfg.payload, cfg.rate))
            ms = (time.perf_counter() - t0) * 1e3
            rows.append(dict(protocol=proto, N=n, L=cfg.payload, R=cfg.rate, t_d_mode=rep.t_d_mode,
                             eta=rep.eta, P_s=rep.values["P_s"], P_tr=rep.values["P_tr"],
                             runtime_ms=ms))
    return rows


def throughput_vs_n(cfg: ExperimentConfig, ns=FIG_N) -> list[dict]:
    rows = []
    for proto in cfg.protocols:
        for n in ns:
            rep = eta_protocol(proto, n, **_analytic_kw(cfg, proto, cfg.payload, cfg.rate))
            rows.append(dict(figure="throughput-vs-n", protocol=proto, N=n, L=cfg.payload,
                             R=cfg.rate, t_d_mode=rep.t_d_mode, eta=rep.eta,
                             P_s=rep.values["P_s"], P_tr=rep.values["P_tr"]))
    return rows


def throughput_vs_length(cfg: ExperimentConfig, lengths=FIG_LENGTHS, n: int = FIG_LENGTH_N) -> list[dict]:
    rows = []
    b2f_ps = None
    for proto in cfg.protocols:
        for L in lengths:
            kw = _analytic_kw(cfg, proto, L, cfg.rate)
            if proto == "back2f":
                # P_s does not depend on the payload
                if b2f_ps is None:
                    b2f_ps = back2f_stationary(n, cfg.subcarriers).P_s
                rep = eta_back2f(n, p_s=b2f_ps, **kw)
            else:
                rep = eta_protocol(proto, n, **kw)
            rows.append(dict(figure="throughput-vs-length", protocol=proto, N=n, L=L, R=cfg.rate,
                             t_d_mode=rep.t_d_mode, eta=rep.eta, P_s=rep.values["P_s"],
                             P_tr=rep.values["P_tr"]))
    return rows


# -- simulation -----------------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    """One simulation run; picklable so it can go to a worker process."""

    protocol: str
    scenario: str
    size: int       # grid side or node count
    rep: int
    payload: int
    rate: int
    cfg: ExperimentConfig

    @property
    def seed(self) -> int:
        # shared by all protocols at the same point and repetition, so they
        # see the same topology and the same packet arrivals
        return int(np.random.SeedSequence([self.cfg.seed, self.size, self.rep,
                                           0 if self.scenario == "grid" else 1]).generate_state(1)[0])

    def topology(self):
        if self.scenario == "grid":
            topo = build_grid(self.size, self.cfg.d)
            r = self.cfg.radius("grid")
            if not math.isclose(r, topo.radius):
                from .sim.topology import from_positions
                topo = from_positions(topo.positions, r)
            return topo
        rng = np.random.default_rng(np.random.SeedSequence([self.cfg.seed, self.size, self.rep, 2]))
        return build_random(self.size, self.cfg.l, self.cfg.radius("random"), rng)

    def sim_config(self) -> SimConfig:
        c = self.cfg
        return SimConfig(protocol=self.protocol, T=c.sim_time, payload=self.payload, rate=self.rate,
                         t_d_mode=c.t_d_mode, t_d=c.t_d, loss_p=c.loss(self.scenario),
                         q_max=c.q_max, delta_max=c.delta_max, n_tx_max=c.n_tx_max,
                         pairing=c.pairing, modulation_order=c.modulation_order)


def execute(spec: RunSpec) -> dict:
    """Run one simulation; failures come back as a row with the error column set."""
    row = dict(protocol=spec.protocol, scenario=spec.scenario, size=spec.size, nodes=None,
               L=spec.payload, R=spec.rate, rep=spec.rep, seed=spec.seed, error="")
    try:
        topo = spec.topology()
        row["nodes"] = topo.n
        sim = Simulation(topo, spec.sim_config(), spec.cfg.traffic(spec.payload),
                         spec.cfg.timings(), spec.seed)
        m = sim.run()
    except Exception as e:  # partial-failure policy: record and go on
        row["error"] = f"{type(e).__name__}: {e}"
        return row
    row.update(gamma=m.gamma, delta_ns=int(round(m.delta * 1e9)), jain=m.jain, offered_bps=m.offered,
               generated=m.generated, delivered=m.delivered, collided=m.collided,
               discard_retry_limit=m.discarded.get("retry-limit", 0),
               discard_queue_overflow=m.discarded.get("queue-overflow", 0),
               discard_age_limit=m.discarded.get("age-limit", 0),
               in_queue=m.in_queue, in_flight=m.in_flight, attempts=m.attempts)
    return row


def run_many(specs, jobs: int = 1) -> list[dict]:
    """Run specs with at most ``jobs`` worker processes; output order follows input order."""
    specs = list(specs)
    if jobs <= 1 or len(specs) <= 1:
        return [execute(s) for s in specs]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(execute, specs, chunksize=1))


def sim_specs(figure: str, cfg: ExperimentConfig, sizes=None) -> list[RunSpec]:
    scenario, payload, rate = SIM_CASES[figure]
    if sizes is None:
        sizes = cfg.grid if scenario == "grid" else cfg.random_n
    return [RunSpec(p, scenario, s, rep, payload, rate, cfg)
            for s in sizes for p in cfg.protocols for rep in range(cfg.n_s)]


def aggregate(figure: str, runs: list[dict]) -> list[dict]:
    """Mean and sample standard deviation over repetitions, one row per (size, protocol)."""
    groups: dict = {}
    for r in runs:
        groups.setdefault((r["size"], r["protocol"]), []).append(r)
    rows = []
    for (size, proto), rs in groups.items():
        ok = [r for r in rs if not r["error"]]
        first = rs[0]

        def stat(key, fn):
            v = [r[key] for r in ok]
            if not v:
                return None
            if fn == "mean":
                return float(np.mean(v))
            return float(np.std(v, ddof=1)) if len(v) > 1 else 0.0

        errors = sorted({r["error"] for r in rs if r["error"]})
        nodes = next((r["nodes"] for r in rs if r["nodes"] is not None), None)
        dm, ds = stat("delta_ns", "mean"), stat("delta_ns", "sd")
        rows.append(dict(figure=figure, protocol=proto, scenario=first["scenario"], size=size,
                         nodes=nodes, L=first["L"], R=first["R"], n_s=len(rs),
                         gamma_mean=stat("gamma", "mean"), gamma_sd=stat("gamma", "sd"),
                         delta_ns_mean=None if dm is None else int(round(dm)),
                         delta_ns_sd=None if ds is None else int(round(ds)),
                         jain_mean=stat("jain", "mean"), jain_sd=stat("jain", "sd"),
                         collided_total=sum(r["collided"] for r in ok) if ok else None,
                         failed_runs=len(rs) - len(ok), error="; ".join(errors)))
    return rows


def run_figure_sweep(figure: str, cfg: ExperimentConfig | None = None, jobs: int | None = None,
                     sizes=None) -> list[dict]:
    cfg = cfg or ExperimentConfig()
    if figure == "throughput-vs-n":
        return throughput_vs_n(cfg)
    if figure == "throughput-vs-length":
        return throughput_vs_length(cfg)
    if figure not in SIM_CASES:
        raise ValueError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    runs = run_many(sim_specs(figure, cfg, sizes), jobs or cfg.jobs)
    return aggregate(figure, runs)


# -- CSV ------------------------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            return str(v)
        return f"{v:.6g}"
    return str(v)


def metadata(cfg: ExperimentConfig, command: str, extra=()) -> list[str]:
    lines = [f"rcfd {__version__}", f"command: {command}"]
    lines += [f"{k}={v}" for k, v in cfg.items()]
    lines += list(extra)
    return lines


def write_csv(rows: list[dict], columns: list[str], meta: list[str] = (), out=None) -> str:
    """Write '#' metadata lines, the header and the rows; returns the text written."""
    buf = io.StringIO()
    for line in meta:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    return text


def data_rows(text: str) -> list[str]:
    """CSV lines other than the '#' metadata block."""
    return [ln for ln in text.splitlines() if not ln.startswith("#")]
