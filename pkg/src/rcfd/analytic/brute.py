"""Exact enumeration of BACK2F draw outcomes, used to check the chain's factors.

Every factor of the transition law is recomputed here by walking all equally
likely draw vectors with rational arithmetic, under the chain's own modelling
assumptions: after a state (k, b, l)

* the l round-2 winners redraw uniformly on 0..S-1,
* the k - l round-2 losers sit at residual 0,
* the N - k round-1 losers hold a residual uniform on 1..S-b-1.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from .back2f_chain import p_a_given_kbl, p_i_given_akbl, p_j_given_i, valid_state


def jump_law(i: int, S: int) -> dict[int, Fraction]:
    """{j: P(j of i uniform draws on 0..S-1 share the minimum)}."""
    counts: dict[int, int] = {}
    for vec in itertools.product(range(S), repeat=i):
        m = min(vec)
        j = vec.count(m)
        counts[j] = counts.get(j, 0) + 1
    total = S ** i
    return {j: Fraction(c, total) for j, c in counts.items()}


def next_round_law(k: int, b: int, l: int, N: int, S: int) -> dict[tuple[int, int], Fraction]:
    """{(a, i): P(new minimum a held by i nodes)} out of state (k, b, l)."""
    span = S - b - 1
    losers = N - k
    res_range = range(1, span + 1) if losers else range(0)
    counts: dict[tuple[int, int], int] = {}
    total = 0
    zeros = (0,) * (k - l)
    for redraw in itertools.product(range(S), repeat=l):
        for res in itertools.product(res_range, repeat=losers):
            vals = zeros + redraw + res
            a = min(vals)
            key = (a, vals.count(a))
            counts[key] = counts.get(key, 0) + 1
            total += 1
    return {key: Fraction(c, total) for key, c in counts.items()}


def check_factors(N: int, S: int, atol: float = 1e-12) -> dict:
    """Compare every factor for one (N, S) with the enumeration.

    Returns counts of compared values, the largest absolute error and the
    largest deviation of a conditional distribution's total from 1.
    """
    compared = 0
    worst = 0.0
    sum_dev = 0.0
    bad = []
    for i in range(1, N + 1):
        law = jump_law(i, S)
        tot = 0.0
        for j in range(1, i + 1):
            got = p_j_given_i(i, j, S)
            err = abs(got - float(law.get(j, 0)))
            compared += 1
            worst = max(worst, err)
            tot += got
            if err >= atol:
                bad.append(("p_j|i", i, j, got, law.get(j, 0)))
        sum_dev = max(sum_dev, abs(tot - 1))
    for k in range(1, N + 1):
        for b in range(S):
            if not valid_state(k, b, N, S):
                continue
            for l in range(1, k + 1):
                law = next_round_law(k, b, l, N, S)
                pa_exact: dict[int, Fraction] = {}
                for (a, _), p in law.items():
                    pa_exact[a] = pa_exact.get(a, 0) + p
                tot_a = 0.0
                for a in range(S):
                    got = p_a_given_kbl(a, k, b, l, N, S)
                    want = pa_exact.get(a, Fraction(0))
                    err = abs(got - float(want))
                    compared += 1
                    worst = max(worst, err)
                    tot_a += got
                    if err >= atol:
                        bad.append(("p_a|kbl", a, k, b, l, got, want))
                    if want == 0:
                        continue
                    tot_i = 0.0
                    for i in range(1, N + 1):
                        got_i = p_i_given_akbl(i, a, k, b, l, N, S)
                        want_i = law.get((a, i), Fraction(0)) / want
                        err = abs(got_i - float(want_i))
                        compared += 1
                        worst = max(worst, err)
                        tot_i += got_i
                        if err >= atol:
                            bad.append(("p_i|akbl", i, a, k, b, l, got_i, want_i))
                    sum_dev = max(sum_dev, abs(tot_i - 1))
                sum_dev = max(sum_dev, abs(tot_a - 1))
    return dict(N=N, S=S, compared=compared, max_error=worst, max_sum_dev=sum_dev,
                mismatches=bad)
