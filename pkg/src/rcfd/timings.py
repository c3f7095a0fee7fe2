"""PHY timing constants and data-frame airtime."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from .errors import UnsupportedRate

# data bits per OFDM symbol for each 802.11a/g rate (Mbit/s)
BITS_PER_SYMBOL = {6: 24, 9: 36, 12: 48, 18: 72, 24: 96, 36: 144, 48: 192, 54: 216}

PREAMBLE_US = 20      # PLCP preamble + SIGNAL
SYMBOL_US = 4
SERVICE_BITS = 16
TAIL_BITS = 6
# MAC header (QoS data, 26 B) + FCS (4 B); used by the calibrated mode
MAC_OVERHEAD_BYTES = 30

TD_MODES = ("ofdm-exact", "calibrated", "override")


@dataclass(frozen=True)
class PhyTimings:
    """Timing table shared by the analytic models and the simulator.

    Durations are in microseconds. ``t_scan`` defaults to ``t_difs`` when left
    as None. ``stage_cap`` is the backoff stage at which the window stops
    doubling.
    """

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

    def __post_init__(self):
        if self.t_scan is None:
            object.__setattr__(self, "t_scan", self.t_difs)
        for f in fields(self):
            v = getattr(self, f.name)
            if v < 0:
                raise ValueError(f"{f.name} must be nonnegative, got {v}")
        if self.w_initial < 1:
            raise ValueError("w_initial must be >= 1")
        if self.subcarriers < 1:
            raise ValueError("subcarriers must be >= 1")

    def with_(self, **kw) -> "PhyTimings":
        return replace(self, **kw)

    def ns(self, name: str) -> int:
        """Duration ``name`` converted to integer nanoseconds."""
        return us_to_ns(getattr(self, name))

    @property
    def t_access(self) -> float:
        """Fixed RCFD channel-access time: scan plus three contention rounds."""
        return self.t_scan + 3 * self.t_round


def us_to_ns(us: float) -> int:
    ns = round(us * 1000)
    if abs(ns - us * 1000) > 1e-6:
        raise ValueError(f"{us} us is not a whole number of nanoseconds")
    return int(ns)


def _ofdm_airtime(nbytes: int, rate: int) -> int:
    nbits = SERVICE_BITS + 8 * nbytes + TAIL_BITS
    return PREAMBLE_US + SYMBOL_US * math.ceil(nbits / BITS_PER_SYMBOL[rate])


def t_data(L: int, R: int, mode: str = "ofdm-exact", value: float | None = None) -> float:
    """Airtime of a data frame in microseconds.

    Parameters
    ----------
    L : int
        Payload in bytes.
    R : int
        PHY rate in Mbit/s, one of the OFDM rates.
    mode : str
        ``"ofdm-exact"`` counts payload symbols only. ``"calibrated"`` adds the
        30-byte MAC header and FCS, which gives 1400 us for 1000 B at 6 Mbit/s.
        ``"override"`` returns ``value`` unchanged.
    """
    if mode == "override":
        if value is None or value < 0:
            raise ValueError("override mode needs a nonnegative value")
        return float(value)
    if L <= 0:
        raise ValueError("payload must be positive")
    if R not in BITS_PER_SYMBOL:
        raise UnsupportedRate(f"rate {R} Mbit/s not in {sorted(BITS_PER_SYMBOL)}")
    if mode == "ofdm-exact":
        return float(_ofdm_airtime(L, R))
    if mode == "calibrated":
        return float(_ofdm_airtime(L + MAC_OVERHEAD_BYTES, R))
    raise ValueError(f"unknown t_d mode {mode!r}")
