"""Experiment configuration: plain ``key = value`` files plus command-line overrides.

Blank lines and text after ``#`` are ignored. List values are comma separated.
Every problem found is reported at once, with its line number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import CapacityExceeded, ConfigError, DuplicateKey
from .sim.runner import PROTOCOLS
from .sim.traffic import TrafficSource
from .timings import BITS_PER_SYMBOL, TD_MODES, PhyTimings

SCENARIOS = ("grid", "random")
TIMING_KEYS = tuple(f.name for f in fields(PhyTimings))


@dataclass(frozen=True)
class ExperimentConfig:
    """Effective settings of one invocation. Defaults follow the simulation parameter table."""

    mode: str = "simulate"
    protocols: tuple = PROTOCOLS
    scenario: str = "grid"
    # analytic sweep and single-domain node counts
    n: tuple = (2, 10, 20, 50)
    # simulation sizes: grid side g (g*g nodes) and random node counts
    grid: tuple = (3, 4, 5, 6, 7, 8, 9, 10)
    random_n: tuple = (10, 20, 30, 40, 50)
    g: int = 3            # single `simulate` run, grid scenario
    nodes: int = 20       # single `simulate` run, random scenario
    payload: int = 1000   # bytes
    rate: int = 6         # Mbit/s
    t_d_mode: str = "calibrated"
    t_d: float | None = None
    t_h: float = 0.0
    # PHY timing table, us
    t_ack: float = 50
    t_rts: float = 58
    t_cts: float = 50
    t_sifs: float = 10
    t_difs: float = 28
    t_p: float = 1
    t_slot: float = 9
    t_round: float = 6
    t_scan: float | None = None
    t_header: float = 0
    w_initial: int = 16
    stage_cap: int = 6
    subcarriers: int = 52
    modulation_order: int | None = None   # None: smallest power of two that fits
    fd_success: str = "exchange"
    # topology
    d: float = 100.0
    l: float = 500.0
    r: float | None = None  # None: d*sqrt(2) on the grid, 60 m for random
    # traffic
    lambda_s: float = 0.5
    ts_max: float = 5.0
    t_on: float = 0.1
    t_off: float = 0.1
    rs: float = 1e6
    # run control
    sim_time: float = 20.0
    n_s: int = 10
    seed: int = 1
    loss_p: float | None = None  # None: 0 on the grid, 0.1 for random
    q_max: int = 1000
    delta_max: float = 1.0
    n_tx_max: int = 7
    pairing: str = "full-queue"
    out: str | None = None
    jobs: int = 1

    def timings(self) -> PhyTimings:
        return PhyTimings(**{k: getattr(self, k) for k in TIMING_KEYS})

    def traffic(self, payload: int | None = None) -> TrafficSource:
        return TrafficSource(payload=payload or self.payload, rate_bps=self.rs,
                             lambda_s=self.lambda_s, ts_max=self.ts_max, t_on=self.t_on,
                             t_off=self.t_off)

    def radius(self, scenario: str | None = None) -> float:
        if self.r is not None:
            return self.r
        return self.d * math.sqrt(2) if (scenario or self.scenario) == "grid" else 60.0

    def loss(self, scenario: str | None = None) -> float:
        if self.loss_p is not None:
            return self.loss_p
        return 0.0 if (scenario or self.scenario) == "grid" else 0.1

    def items(self) -> list[tuple[str, str]]:
        """(key, value) pairs in field order, formatted the way they parse back."""
        return [(f.name, format_value(getattr(self, f.name))) for f in fields(self)]

    def with_(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


# -- value parsers; each raises ValueError with a readable message -------------

def _int(s):
    return int(s)


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not finite")
    return v


def _opt(parse):
    def p(s):
        return None if s.lower() in ("none", "auto", "") else parse(s)
    return p


def _choice(options):
    def p(s):
        if s not in options:
            raise ValueError(f"{s!r} not one of {', '.join(options)}")
        return s
    return p


def _list(parse):
    def p(s):
        items = [x.strip() for x in s.split(",") if x.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(parse(x) for x in items)
    return p


def _proto_list(s):
    if s == "all":
        return PROTOCOLS
    return _list(_choice(PROTOCOLS))(s)


PARSERS = {
    "mode": _choice(("analytic", "simulate")),
    "protocols": _proto_list,
    "scenario": _choice(SCENARIOS),
    "n": _list(_int), "grid": _list(_int), "random_n": _list(_int),
    "g": _int, "nodes": _int, "payload": _int, "rate": _int,
    "t_d_mode": _choice(TD_MODES), "t_d": _opt(_float), "t_h": _float,
    "t_scan": _opt(_float), "w_initial": _int, "stage_cap": _int, "subcarriers": _int,
    "modulation_order": _opt(_int), "fd_success": _choice(("exchange", "attempt")),
    "d": _float, "l": _float, "r": _opt(_float),
    "lambda_s": _float, "ts_max": _float, "t_on": _float, "t_off": _float, "rs": _float,
    "sim_time": _float, "n_s": _int, "seed": _int, "loss_p": _opt(_float),
    "q_max": _int, "delta_max": _float, "n_tx_max": _int,
    "pairing": _choice(("full-queue", "head-only")), "out": _opt(str), "jobs": _int,
}
for _k in ("t_ack", "t_rts", "t_cts", "t_sifs", "t_difs", "t_p", "t_slot", "t_round", "t_header"):
    PARSERS[_k] = _float
assert set(PARSERS) == {f.name for f in fields(ExperimentConfig)}


def _check(cfg: ExperimentConfig) -> list[str]:
    """Range checks on a fully parsed config."""
    bad = []
    pos_ints = ("payload", "n_s", "q_max", "n_tx_max", "jobs", "w_initial", "subcarriers")
    for k in pos_ints:
        if getattr(cfg, k) < 1:
            bad.append(f"{k} must be >= 1")
    for k in ("d", "l", "sim_time", "delta_max", "lambda_s", "ts_max", "t_on", "rs"):
        if getattr(cfg, k) <= 0:
            bad.append(f"{k} must be > 0")
    for k in TIMING_KEYS + ("t_h", "t_off"):
        v = getattr(cfg, k)
        if v is not None and v < 0:
            bad.append(f"{k} must be >= 0")
    if cfg.t_d is not None and cfg.t_d <= 0:
        bad.append("t_d must be > 0")
    if cfg.t_d_mode == "override" and cfg.t_d is None:
        bad.append("t_d_mode=override needs t_d")
    if cfg.rate not in BITS_PER_SYMBOL:
        bad.append(f"rate {cfg.rate} not in {sorted(BITS_PER_SYMBOL)}")
    if cfg.subcarriers % 2:
        bad.append("subcarriers must be even")
    if cfg.r is not None and cfg.r <= 0:
        bad.append("r must be > 0")
    if cfg.loss_p is not None and not 0 <= cfg.loss_p < 1:
        bad.append("loss_p must be in [0, 1)")
    if cfg.modulation_order is not None and cfg.modulation_order < 1:
        bad.append("modulation_order must be >= 1")
    if any(v < 2 for v in cfg.n):
        bad.append("n values must be >= 2")
    if any(v < 2 for v in cfg.grid) or cfg.g < 2:
        bad.append("grid sizes must be >= 2")
    if any(v < 2 for v in cfg.random_n) or cfg.nodes < 2:
        bad.append("random node counts must be >= 2")
    if cfg.ts_max >= cfg.sim_time:
        bad.append("ts_max (transient) must be shorter than sim_time")
    return bad


def check_capacity(cfg: ExperimentConfig) -> None:
    """Raise CapacityExceeded if RCFD is asked for more nodes than the slot map holds."""
    if "rcfd" not in cfg.protocols or cfg.modulation_order is None:
        return
    cap = cfg.modulation_order * cfg.subcarriers // 2
    sizes = list(cfg.n)
    if cfg.mode == "simulate":
        sizes += [g * g for g in cfg.grid] + [cfg.g * cfg.g] + list(cfg.random_n) + [cfg.nodes]
    over = sorted({s for s in sizes if s > cap})
    if over:
        raise CapacityExceeded(
            f"rcfd with S={cfg.subcarriers}, m={cfg.modulation_order} holds {cap} nodes; "
            f"asked for {', '.join(map(str, over))}")


def _split(line: str):
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    if "=" not in body:
        raise ValueError(f"expected key = value, got {body!r}")
    k, v = body.split("=", 1)
    return k.strip(), v.strip()


def parse_config(path: str | Path | None = None, overrides=(), text: str | None = None,
                 base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read a config file (or ``text``), apply ``key=value`` overrides, validate.

    Raises DuplicateKey when a key repeats in the file, ConfigError listing
    every violation otherwise, and CapacityExceeded when RCFD cannot map the
    requested node count.
    """
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    where = str(path) if path is not None else "<config>"
    violations, values, seen = [], {}, {}
    dup = False
    for lineno, line in enumerate((text or "").splitlines(), 1):
        try:
            kv = _split(line)
        except ValueError as e:
            violations.append(f"{where}:{lineno}: {e}")
            continue
        if kv is None:
            continue
        k, v = kv
        if k in seen:
            dup = True
            violations.append(f"{where}:{lineno}: duplicate key {k!r} (first set on line {seen[k]})")
            continue
        seen[k] = lineno
        values[k] = (v, f"{where}:{lineno}")
    for item in overrides:
        if isinstance(item, tuple):
            k, v = item
        elif "=" in item:
            k, v = (x.strip() for x in item.split("=", 1))
        else:
            violations.append(f"flag: expected key=value, got {item!r}")
            continue
        values[k] = (str(v), f"flag {k}")
    parsed = {}
    for k, (v, loc) in values.items():
        if k not in PARSERS:
            violations.append(f"{loc}: unknown key {k!r}")
            continue
        try:
            parsed[k] = PARSERS[k](v)
        except ValueError as e:
            violations.append(f"{loc}: bad value for {k}: {e}")
    if violations:
        raise (DuplicateKey if dup else ConfigError)(violations)
    cfg = replace(base or ExperimentConfig(), **parsed)
    bad = _check(cfg)
    if bad:
        raise ConfigError(bad)
    check_capacity(cfg)
    return cfg
