"""BACK2F: two frequency-domain backoff rounds per contention.

Round 1: every contender emits on subcarrier ``myback``. A node whose value
equals the lowest one it heard wins; everybody subtracts that minimum and
losers keep the remainder for the next contention. Round 2: round-1 winners
draw ``myback2`` and the lowest ones transmit data. Round-2 winners draw a
fresh ``myback`` after transmitting; round-2 losers hold residual 0.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class B2Phase(enum.Enum):
    SCAN = "scan"
    ROUND1 = "round1"
    ROUND2 = "round2"
    TRANSMIT = "transmit"


@dataclass
class Back2fRoundState:
    myback: int
    myback2: int = 0
    phase: B2Phase = B2Phase.SCAN


class Heard(NamedTuple):
    """Lowest subcarrier index heard in a round, own emission included."""
    minimum: int


def back2f_step(state: Back2fRoundState, obs: Heard | None, S: int, rng) -> str:
    """Advance one node through one step of a contention.

    Call with ``obs=None`` to leave the scan state (the node emits
    ``myback``), then with the round-1 minimum, then with the round-2
    minimum. Returns one of ``"round1"``, ``"round2"``, ``"lost"``,
    ``"transmit"``. After ``"transmit"`` the state is back in scan with a
    fresh ``myback``.
    """
    if state.phase is B2Phase.SCAN:
        if obs is not None:
            raise ValueError("scan step takes no observation")
        state.phase = B2Phase.ROUND1
        return "round1"
    if obs is None:
        raise ValueError("round steps need an observation")
    if state.phase is B2Phase.ROUND1:
        if obs.minimum > state.myback:
            raise ValueError("heard minimum above own emission")
        state.myback -= obs.minimum
        if state.myback > 0:
            state.phase = B2Phase.SCAN
            return "lost"
        state.myback2 = int(rng.integers(S)) if hasattr(rng, "integers") else rng.randrange(S)
        state.phase = B2Phase.ROUND2
        return "round2"
    if state.phase is B2Phase.ROUND2:
        if obs.minimum > state.myback2:
            raise ValueError("heard minimum above own emission")
        if state.myback2 > obs.minimum:
            state.phase = B2Phase.SCAN  # myback stays 0
            return "lost"
        state.myback = int(rng.integers(S)) if hasattr(rng, "integers") else rng.randrange(S)
        state.phase = B2Phase.SCAN
        return "transmit"
    raise ValueError(state.phase)


class McEstimate(NamedTuple):
    p_s: float
    se: float
    slots: int


def simulate_rounds(N: int, S: int, slots: int, rng: np.random.Generator, chains: int = 1000,
                    burn_in: int = 200) -> McEstimate:
    """Monte Carlo of the round dynamics in one collision domain.

    Runs ``chains`` independent copies of an N-node network, each for
    ``burn_in`` discarded contentions plus ``slots // chains`` measured ones,
    and returns the fraction of contentions with a single round-2 winner. The
    standard error comes from the spread of per-chain means.
    """
    per = max(slots // chains, 1)
    my = rng.integers(0, S, size=(chains, N))
    succ = np.zeros(chains)
    rows = np.arange(chains)[:, None]
    for t in range(burn_in + per):
        mn = my.min(axis=1, keepdims=True)
        my = my - mn
        w1 = my == 0
        d2 = np.where(w1, rng.integers(0, S, size=(chains, N)), S)
        m2 = d2.min(axis=1, keepdims=True)
        w2 = d2 == m2
        nwin = w2.sum(axis=1)
        if t >= burn_in:
            succ += nwin == 1
        fresh = rng.integers(0, S, size=(chains, N))
        my = np.where(w2, fresh, my)
    means = succ / per
    p = float(means.mean())
    se = float(means.std(ddof=1) / np.sqrt(chains)) if chains > 1 else float("nan")
    return McEstimate(p, se, per * chains)
