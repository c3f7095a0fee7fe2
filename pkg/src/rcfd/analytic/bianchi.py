"""Saturated 802.11 DCF fixed point (two-dimensional backoff chain)."""
from __future__ import annotations

from typing import NamedTuple

from scipy.optimize import brentq

from ..errors import NonConvergence


class BianchiSolution(NamedTuple):
    tau: float
    p: float
    residual: float


def tau_of_p(p: float, W: int, m: int) -> float:
    """Per-slot attempt probability of one station given collision probability p.

    Equal to 2(1-2p) / ((1-2p)(W+1) + pW(1-(2p)^m)); the geometric sum form
    below has no removable singularity at p = 1/2.
    """
    geo = sum((2 * p) ** k for k in range(m))
    return 2.0 / (W + 1 + p * W * geo)


def p_of_tau(tau: float, N: int) -> float:
    return 1.0 - (1.0 - tau) ** (N - 1)


def bianchi_fixed_point(N: int, W: int = 16, m: int = 6, maxiter: int = 200) -> BianchiSolution:
    """Solve tau = tau(p), p = 1-(1-tau)^(N-1) by bracketed root finding."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        tau = tau_of_p(0.0, W, m)
        return BianchiSolution(tau, 0.0, 0.0)

    def f(t):
        return t - tau_of_p(p_of_tau(t, N), W, m)

    # f(0) < 0 and f(1) > 0 for any W >= 1, so [0, 1] always brackets a root
    try:
        tau = brentq(f, 0.0, 1.0, xtol=1e-16, rtol=1e-15, maxiter=maxiter)
    except RuntimeError as exc:
        raise NonConvergence(str(exc)) from exc
    res = abs(f(tau))
    if res >= 1e-10:
        raise NonConvergence(f"residual {res:g} after root finding")
    return BianchiSolution(tau, p_of_tau(tau, N), res)
