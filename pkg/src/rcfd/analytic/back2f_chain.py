"""Markov chain of the two-round frequency-domain backoff (BACK2F).

A chain state (x, c, y) records, for one contention slot, the number of
round-1 winners x, the lowest round-1 subcarrier c and the number of round-2
winners y. The transition probability out of (k, b, l) factors as

    p(i, a, j | k, b, l) = p(j | i) * p(i | a, k, b, l) * p(a | k, b, l)

Because j depends on i alone, the stationary mass factors the same way:
pi(i, a, j) = rho(i, a) * p(j | i), where rho is the stationary law of the
(x, c) marginal chain. The solver works on that N*S state marginal and never
builds the full N^2*S transition matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator, NamedTuple

import numpy as np

from ..errors import NonConvergence


class MarkovState(NamedTuple):
    x: int  # round-1 winners
    c: int  # lowest round-1 subcarrier
    y: int  # round-2 winners


def p_j_given_i(i: int, j: int, S: int) -> float:
    """Probability that j of i round-2 contenders share the lowest subcarrier."""
    if not 1 <= j <= i:
        return 0.0
    if j == i:
        return 1.0 / S ** (i - 1)
    return sum(comb(i, j) * (1.0 / S) ** j * (1.0 - (c + 1) / S) ** (i - j) for c in range(S - 1))


def p_i_given_akbl(i: int, a: int, k: int, b: int, l: int, N: int, S: int) -> float:
    """Probability of i round-1 winners given the new minimum a and previous state (k, b, l)."""
    if k != l:
        # k - l round-2 losers sit at residual 0; each of the l redrawers hits 0 w.p. 1/S
        if a == 0 and k - l <= i <= k:
            n0 = i - k + l
            return comb(l, n0) * (1.0 / S) ** n0 * (1.0 - 1.0 / S) ** (k - i)
        return 0.0
    if k == N:
        if not 1 <= i <= N:
            return 0.0
        q = 1.0 / (S - a)
        return comb(N, i) * q ** i * (1 - q) ** (N - i) / (1 - (1 - q) ** N)
    if a == 0:
        if 1 <= i <= k:
            q = 1.0 / S
            return comb(k, i) * q ** i * (1 - q) ** (k - i) / (1 - (1 - q) ** k)
        return 0.0
    if a == S - b - 1:
        if N - k <= i <= N:
            n0 = i - N + k
            q = 1.0 / (b + 1)
            return comb(k, n0) * q ** n0 * (1 - q) ** (k - n0)
        return 0.0
    if 0 < a < S - b - 1:
        qa = 1.0 / (S - b - a)  # a round-1 loser's residual equals a
        qb = 1.0 / (S - a)      # a redrawing node picks a
        tot = 0.0
        for n in range(max(i - k, 0), min(N - k, i) + 1):
            tot += (comb(N - k, n) * qa ** n * (1 - qa) ** (N - k - n)
                    * comb(k, i - n) * qb ** (i - n) * (1 - qb) ** (k - i + n))
        return tot / (1 - (1 - qb) ** k * (1 - qa) ** (N - k))
    return 0.0


def p_a_given_kbl(a: int, k: int, b: int, l: int, N: int, S: int) -> float:
    """Probability that the next round-1 minimum is a given previous state (k, b, l)."""
    if k != l:
        return 1.0 if a == 0 else 0.0
    if k == N:
        if not 0 <= a < S:
            return 0.0
        return (1 - a / S) ** N - (1 - (a + 1) / S) ** N
    if a == 0:
        return 1 - (1 - 1 / S) ** k
    if 0 < a <= S - b - 1:
        span = S - b - 1
        return ((1 - a / S) ** k * (1 - (a - 1) / span) ** (N - k)
                - (1 - (a + 1) / S) ** k * (1 - a / span) ** (N - k))
    return 0.0


def valid_state(x: int, c: int, N: int, S: int) -> bool:
    return 1 <= x <= N and 0 <= c < S and (c < S - 1 or x == N)


def _binom_rows(n: int, q: np.ndarray) -> np.ndarray:
    """Binomial(n, q) pmf for a vector of q; shape (len(q), n + 1)."""
    ks = np.arange(n + 1)
    coef = np.array([comb(n, int(v)) for v in ks], dtype=float)
    q = np.asarray(q, dtype=float)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = coef * q ** ks * (1 - q) ** (n - ks)
    return np.nan_to_num(out)


def jump_matrix(N: int, S: int) -> np.ndarray:
    """PJ[i, j] = p(j | i) for 0 <= i, j <= N (row and column 0 unused)."""
    PJ = np.zeros((N + 1, N + 1))
    for i in range(1, N + 1):
        for j in range(1, i + 1):
            PJ[i, j] = p_j_given_i(i, j, S)
    return PJ


def marginal_kernel(N: int, S: int) -> np.ndarray:
    """Transition matrix of the (x, c) marginal chain.

    Row/column index of state (x, c) is (x - 1) * S + c. Rows of invalid states
    (c = S - 1 with x < N) are left zero.
    """
    M = N * S
    K = np.zeros((M, M))
    PJ = jump_matrix(N, S)
    ivec = np.arange(N + 1)
    col = lambda i, a: (i - 1) * S + a  # noqa: E731

    # k = N, l = N: every node redraws; independent of b
    a_all = np.arange(S)
    pa_N = (1 - a_all / S) ** N - (1 - (a_all + 1) / S) ** N
    bn = _binom_rows(N, 1.0 / (S - a_all))           # (S, N+1)
    cond_N = bn[:, 1:] / (1 - bn[:, :1])               # i = 1..N
    block_N = (pa_N[:, None] * cond_N).T               # (N, S) indexed [i-1, a]

    for k in range(1, N + 1):
        # contributions with l < k: a = 0 and i = (k - l) + Binomial(l, 1/S)
        lower = np.zeros(N)
        for l in range(1, k):
            w = PJ[k, l]
            if w == 0.0:
                continue
            pmf = _binom_rows(l, np.array([1.0 / S]))[0]
            lower[k - l - 1:k] += w * pmf
        wkk = PJ[k, k]
        for b in range(S):
            if not valid_state(k, b, N, S):
                continue
            row = np.zeros((N, S))
            row[:, 0] += lower
            if k == N:
                row += wkk * block_N
            else:
                _fill_partial(row, k, b, N, S, wkk)
            K[col(k, b)] = row.ravel()
    return K


def _fill_partial(row: np.ndarray, k: int, b: int, N: int, S: int, w: float) -> None:
    """Add the l = k < N transitions out of (k, b) into ``row`` (shape (N, S))."""
    q0 = 1.0 / S
    pa0 = 1 - (1 - q0) ** k
    bk = _binom_rows(k, np.array([q0]))[0]
    row[0:k, 0] += w * pa0 * bk[1:] / (1 - bk[0])
    top = S - b - 1  # largest residual a round-1 loser can hold
    span = top
    if top > 1:
        a = np.arange(1, top)
        pa = ((1 - a / S) ** k * (1 - (a - 1) / span) ** (N - k)
              - (1 - (a + 1) / S) ** k * (1 - a / span) ** (N - k))
        qa = 1.0 / (S - b - a)
        qb = 1.0 / (S - a)
        A = _binom_rows(N - k, qa)   # losers landing on a
        B = _binom_rows(k, qb)       # redrawers landing on a
        conv = np.zeros((len(a), N + 1))
        for n in range(N - k + 1):
            conv[:, n:n + k + 1] += A[:, n:n + 1] * B
        norm = 1 - B[:, 0] * A[:, 0]
        cond = conv[:, 1:] / norm[:, None]
        row[:, 1:top] += w * (pa[:, None] * cond).T
    if top >= 1:
        a = top
        pa = ((1 - a / S) ** k * (1 - (a - 1) / span) ** (N - k)
              - (1 - (a + 1) / S) ** k * (1 - a / span) ** (N - k))
        # all N - k losers hold the largest residual; redrawers at a w.p. 1/(b+1)
        bb = _binom_rows(k, np.array([1.0 / (b + 1)]))[0]
        row[N - k - 1:N, a] += w * pa * bb


@dataclass(frozen=True)
class Back2fStationary:
    """Stationary law of the BACK2F chain.

    ``rho[x-1, c]`` is the marginal mass of (x, c) and ``PJ[x, y]`` the round-2
    law, so that pi(x, c, y) = rho[x-1, c] * PJ[x, y].
    """

    N: int
    S: int
    rho: np.ndarray
    PJ: np.ndarray
    P_s: float
    iterations: int

    def pi(self, x: int, c: int, y: int) -> float:
        if not valid_state(x, c, self.N, self.S) or not 1 <= y <= x:
            return 0.0
        return float(self.rho[x - 1, c] * self.PJ[x, y])

    def states(self, tol: float = 0.0) -> Iterator[tuple[MarkovState, float]]:
        """Yield (state, mass) for every state with mass above ``tol``."""
        for x in range(1, self.N + 1):
            for c in range(self.S):
                for y in range(1, x + 1):
                    m = self.pi(x, c, y)
                    if m > tol:
                        yield MarkovState(x, c, y), m

    def as_dict(self) -> dict[MarkovState, float]:
        return dict(self.states())


def back2f_stationary(N: int, S: int, tol: float = 1e-10, max_iter: int = 200_000) -> Back2fStationary:
    """Stationary distribution and round success probability P_s.

    Power iteration on the (x, c) marginal chain; stops when the L1 change
    between iterates drops below ``tol``.
    """
    if N < 1 or S < 2:
        raise ValueError("need N >= 1 and S >= 2")
    PJ = jump_matrix(N, S)
    K = marginal_kernel(N, S)
    valid = np.array([valid_state(x, c, N, S) for x in range(1, N + 1) for c in range(S)])
    v = valid / valid.sum()
    it = 0
    while True:
        it += 1
        nxt = v @ K
        nxt /= nxt.sum()
        delta = np.abs(nxt - v).sum()
        v = nxt
        if delta < tol:
            break
        if it >= max_iter:
            raise NonConvergence(f"power iteration L1 change {delta:g} after {it} steps")
    rho = v.reshape(N, S)
    P_s = float(rho.sum(axis=1) @ PJ[1:, 1])
    return Back2fStationary(N, S, rho, PJ, P_s, it)


def apply_transition(pi: dict, N: int, S: int) -> dict:
    """One explicit step pi -> pi P over full (x, c, y) states.

    Uses the scalar factor functions directly; intended for checks on small
    chains.
    """
    out: dict[MarkovState, float] = {}
    for (k, b, l), m in pi.items():
        if m == 0.0:
            continue
        for a in range(S):
            pa = p_a_given_kbl(a, k, b, l, N, S)
            if pa == 0.0:
                continue
            for i in range(1, N + 1):
                pi_ = p_i_given_akbl(i, a, k, b, l, N, S)
                if pi_ == 0.0:
                    continue
                for j in range(1, i + 1):
                    pj = p_j_given_i(i, j, S)
                    key = MarkovState(i, a, j)
                    out[key] = out.get(key, 0.0) + m * pa * pi_ * pj
    return out


def row_sum(k: int, b: int, l: int, N: int, S: int) -> float:
    """Total outgoing probability of full state (k, b, l), via the scalar factors."""
    tot = 0.0
    for a in range(S):
        pa = p_a_given_kbl(a, k, b, l, N, S)
        if pa == 0.0:
            continue
        for i in range(1, N + 1):
            pi_ = p_i_given_akbl(i, a, k, b, l, N, S)
            if pi_:
                tot += pa * pi_ * sum(p_j_given_i(i, j, S) for j in range(1, i + 1))
    return tot
