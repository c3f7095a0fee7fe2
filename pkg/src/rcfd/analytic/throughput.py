"""Normalized saturation throughput of DCF, FD MAC, BACK2F and RCFD."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from ..errors import InvalidN
from ..timings import PhyTimings, t_data
from .back2f_chain import back2f_stationary
from .bianchi import bianchi_fixed_point

PROTOCOLS = ("dcf", "dcf-rtscts", "fdmac", "back2f", "rcfd")


class PtrPs(NamedTuple):
    p_tr: float
    p_s: float
    undefined: bool = False


@dataclass
class ThroughputReport:
    protocol: str
    n: int
    payload: int | None
    rate: int | None
    eta: float
    t_d: float
    t_d_mode: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


def ptr_ps(N: int, tau: float) -> PtrPs:
    """Probability of at least one attempt in a slot and of that slot being a success."""
    if N < 1 or not 0.0 <= tau <= 1.0:
        raise ValueError("need N >= 1 and tau in [0, 1]")
    p_tr = 1.0 - (1.0 - tau) ** N
    if p_tr == 0.0:
        return PtrPs(0.0, 1.0, True)
    return PtrPs(p_tr, N * tau * (1.0 - tau) ** (N - 1) / p_tr)


def _resolve_td(L, R, t_d_mode, t_d):
    if t_d is not None:
        return float(t_d), "override"
    return t_data(L, R, t_d_mode), t_d_mode


def dcf_durations(timings: PhyTimings, t_d: float, rts_cts: bool) -> tuple[float, float]:
    """Busy time of a successful and of a collided slot, (T_S, T_C)."""
    t = timings
    if rts_cts:
        ts = t.t_difs + t.t_rts + t.t_cts + t_d + 3 * t.t_sifs + t.t_ack + 4 * t.t_p
        tc = t.t_difs + t.t_rts + t.t_p
    else:
        ts = t.t_difs + t_d + t.t_sifs + t.t_ack + 2 * t.t_p
        tc = t.t_difs + t_d + t.t_p
    return ts, tc


def renewal_eta(p_tr, p_succ, payload_time, t_slot, ts, tc, p_s_busy=None):
    """Payload time over mean slot length for a slotted renewal process.

    ``payload_time`` is the expected payload airtime per slot; ``p_s_busy`` is
    the success share of busy slots used in the denominator.
    """
    if p_s_busy is None:
        p_s_busy = p_succ
    den = (1 - p_tr) * t_slot + p_tr * p_s_busy * ts + p_tr * (1 - p_s_busy) * tc
    return payload_time / den


def eta_dcf(N: int, timings: PhyTimings | None = None, L: int = 1000, R: int = 6,
            rts_cts: bool = False, t_d_mode: str = "calibrated", t_d: float | None = None,
            tau: float | None = None) -> ThroughputReport:
    """Saturation throughput of 802.11 DCF, basic access or RTS/CTS.

    ``tau`` overrides the fixed point, which is handy for limits and checks.
    """
    timings = timings or PhyTimings()
    td, mode = _resolve_td(L, R, t_d_mode, t_d)
    if tau is None:
        tau = bianchi_fixed_point(N, timings.w_initial, timings.stage_cap).tau
    pp = ptr_ps(N, tau)
    ts, tc = dcf_durations(timings, td, rts_cts)
    eta = renewal_eta(pp.p_tr, pp.p_s, pp.p_tr * pp.p_s * td, timings.t_slot, ts, tc)
    return ThroughputReport(
        "dcf-rtscts" if rts_cts else "dcf", N, L, R, eta, td, mode,
        dict(tau=tau, P_tr=pp.p_tr, P_s=pp.p_s, undefined=pp.undefined, T_S=ts, T_C=tc, T_d=td))


def fd_success(N: int, tau: float) -> tuple[float, float, float]:
    """(P_tr, P_s,fd, P_s,hd) for FD MAC with uniformly chosen destinations."""
    if N < 2:
        raise InvalidN("FD MAC needs N >= 2")
    p_tr = 1.0 - (1.0 - tau) ** N
    if p_tr == 0.0:
        return 0.0, 0.0, 0.0
    p_fd = N * tau * (1 - tau) ** (N - 2) * (2 - tau) / (2 * (N - 1) * p_tr)
    p_hd = N * (N - 2) * tau * (1 - tau) ** (N - 1) / ((N - 1) * p_tr)
    return p_tr, p_fd, p_hd


def eta_fd(N: int, timings: PhyTimings | None = None, L: int = 1000, R: int = 6,
           t_d_mode: str = "calibrated", t_d: float | None = None,
           success: str = "exchange", tau: float | None = None) -> ThroughputReport:
    """Saturation throughput of FD MAC over the RTS/CTS slot durations.

    ``success`` picks the success share of busy slots in the mean slot
    length. ``"exchange"`` (default) uses P_s,hd + P_s,fd, the probability
    that the busy slot holds a successful exchange. ``"attempt"`` uses the
    single-attempt P_s = N tau (1-tau)^(N-1) / P_tr.
    """
    if N < 2:
        raise InvalidN("FD MAC needs N >= 2")
    timings = timings or PhyTimings()
    td, mode = _resolve_td(L, R, t_d_mode, t_d)
    if tau is None:
        tau = bianchi_fixed_point(N, timings.w_initial, timings.stage_cap).tau
    p_tr, p_fd, p_hd = fd_success(N, tau)
    ts, tc = dcf_durations(timings, td, True)
    if success == "exchange":
        busy = p_hd + p_fd
    elif success == "attempt":
        busy = ptr_ps(N, tau).p_s
    else:
        raise ValueError(f"unknown success convention {success!r}")
    eta = renewal_eta(p_tr, busy, td * p_tr * (p_hd + 2 * p_fd), timings.t_slot, ts, tc, busy)
    return ThroughputReport("fdmac", N, L, R, eta, td, mode,
                            dict(tau=tau, P_tr=p_tr, P_s=busy, P_s_fd=p_fd, P_s_hd=p_hd,
                                 T_S=ts, T_C=tc, T_d=td, success=success))


def back2f_durations(timings: PhyTimings, t_d: float) -> tuple[float, float]:
    t = timings
    ts = t.t_difs + 2 * t.t_round + t_d + t.t_sifs + t.t_ack + 2 * t.t_p
    tc = t.t_difs + 2 * t.t_round + t_d + t.t_p
    return ts, tc


def eta_back2f(N: int, S: int | None = None, timings: PhyTimings | None = None, L: int = 1000,
               R: int = 6, t_d_mode: str = "calibrated", t_d: float | None = None,
               p_s: float | None = None) -> ThroughputReport:
    """Saturation throughput of BACK2F; P_s from the stationary chain unless given."""
    timings = timings or PhyTimings()
    S = S or timings.subcarriers
    td, mode = _resolve_td(L, R, t_d_mode, t_d)
    if p_s is None:
        p_s = back2f_stationary(N, S).P_s
    ts, tc = back2f_durations(timings, td)
    eta = p_s * td / (p_s * ts + (1 - p_s) * tc)
    return ThroughputReport("back2f", N, L, R, eta, td, mode,
                            dict(P_tr=1.0, P_s=p_s, T_S=ts, T_C=tc, T_d=td, S=S))


def rcfd_duration(timings: PhyTimings, t_d: float, t_h: float | None = None) -> float:
    t = timings
    t_h = t.t_header if t_h is None else t_h
    return t.t_difs + 3 * t.t_round + t_h + t_d + t.t_sifs + t.t_ack + 2 * t.t_p


def eta_rcfd(N: int, timings: PhyTimings | None = None, L: int = 1000, R: int = 6,
             t_d_mode: str = "calibrated", t_d: float | None = None,
             t_h: float | None = None) -> ThroughputReport:
    """Saturation throughput of RCFD in one collision domain.

    Every slot carries one exchange; the RTS receiver holds a packet for the
    transmitter with probability 1/(N-1), which makes the exchange full duplex.
    """
    if N < 2:
        raise InvalidN("RCFD throughput needs N >= 2")
    timings = timings or PhyTimings()
    td, mode = _resolve_td(L, R, t_d_mode, t_d)
    p_fd = 1.0 / (N - 1)
    p_hd = 1.0 - p_fd
    ts = rcfd_duration(timings, td, t_h)
    eta = td * (p_hd + 2 * p_fd) / ts
    return ThroughputReport("rcfd", N, L, R, eta, td, mode,
                            dict(P_tr=1.0, P_s=1.0, P_s_fd=p_fd, P_s_hd=p_hd, T_S=ts, T_d=td))


def eta_protocol(protocol: str, N: int, **kw) -> ThroughputReport:
    """Dispatch by protocol tag."""
    if protocol == "dcf":
        return eta_dcf(N, rts_cts=False, **kw)
    if protocol == "dcf-rtscts":
        return eta_dcf(N, rts_cts=True, **kw)
    if protocol == "fdmac":
        return eta_fd(N, **kw)
    if protocol == "back2f":
        return eta_back2f(N, **kw)
    if protocol == "rcfd":
        return eta_rcfd(N, **kw)
    raise ValueError(f"unknown protocol {protocol!r}")
