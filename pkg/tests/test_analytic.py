"""Saturation models: timing, DCF fixed point, FD MAC, BACK2F chain, RCFD."""
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcfd.analytic import (apply_transition, back2f_stationary, bianchi_fixed_point, eta_back2f,
                           eta_dcf, eta_fd, eta_protocol, eta_rcfd, fd_success, p_a_given_kbl,
                           p_i_given_akbl, p_j_given_i, ptr_ps, tau_of_p)
from rcfd.analytic.back2f_chain import row_sum, valid_state
from rcfd.analytic.brute import check_factors
from rcfd.analytic.throughput import dcf_durations
from rcfd.errors import InvalidN, UnsupportedRate
from rcfd.mac.back2f import simulate_rounds
from rcfd.timings import PhyTimings, t_data

T = PhyTimings()


# -- data airtime -------------------------------------------------------------------

def test_t_data_examples():
    # 16 + 8000 + 6 bits over 24 bits/symbol rounds up to 335 symbols
    assert t_data(1000, 6, "ofdm-exact") == 20 + 4 * 335 == 1360
    assert t_data(1000, 6, "calibrated") == 1400
    assert t_data(1000, 6, "override", 1234.5) == 1234.5
    assert t_data(1000, 54, "ofdm-exact") == 20 + 4 * 38
    with pytest.raises(UnsupportedRate):
        t_data(1000, 7)


# -- DCF fixed point ----------------------------------------------------------------

def test_bianchi_single_station():
    sol = bianchi_fixed_point(1)
    assert sol.tau == pytest.approx(2 / 17)
    assert sol.p == 0.0


@pytest.mark.parametrize("N", [2, 10, 50])
def test_bianchi_self_consistent(N):
    sol = bianchi_fixed_point(N)
    assert sol.residual < 1e-10
    assert sol.p == pytest.approx(1 - (1 - sol.tau) ** (N - 1), abs=1e-12)
    assert sol.tau == pytest.approx(tau_of_p(sol.p, 16, 6), abs=1e-10)


def test_tau_of_p_closed_form():
    for p in (0.1, 0.3, 0.45, 0.7):
        closed = 2 * (1 - 2 * p) / ((1 - 2 * p) * 17 + p * 16 * (1 - (2 * p) ** 6))
        assert tau_of_p(p, 16, 6) == pytest.approx(closed, rel=1e-12)


def test_bianchi_tau_matches_backoff_walk():
    # one station, each attempt fails independently with the fixed-point p
    sol = bianchi_fixed_point(10)
    rng = np.random.default_rng(3)
    W, m = 16, 6
    stage, attempts, slots = 0, 0, 0
    for _ in range(200_000):
        slots += int(rng.integers(W * 2 ** min(stage, m))) + 1
        attempts += 1
        stage = stage + 1 if rng.random() < sol.p else 0
    tau = attempts / slots
    # loose 3-sigma band from a batch estimate
    assert tau == pytest.approx(sol.tau, rel=0.02)


# -- attempt and success shares -------------------------------------------------------

def test_ptr_ps_examples():
    tau = 2 / 17
    assert ptr_ps(1, tau)[:2] == pytest.approx((tau, 1.0))
    assert ptr_ps(2, 1.0)[:2] == (1.0, 0.0)
    p = ptr_ps(3, 0.2)
    assert p.p_tr == pytest.approx(0.488)
    assert p.p_s == pytest.approx(3 * 0.2 * 0.64 / 0.488)
    assert ptr_ps(5, 0.0).undefined


def test_dcf_rtscts_beats_basic_at_large_n():
    assert eta_dcf(50, rts_cts=True).eta > eta_dcf(50).eta
    assert eta_dcf(10).eta > 0


def test_dcf_vanishing_attempts_give_zero():
    assert eta_dcf(10, tau=1e-12).eta < 1e-8


def test_dcf_report_keys():
    assert set(eta_protocol("dcf", 10).values) == {"tau", "P_tr", "P_s", "undefined", "T_S", "T_C", "T_d"}


@pytest.mark.parametrize("rts", [False, True])
def test_dcf_eta_matches_slot_simulation(rts):
    N = 10
    rep = eta_dcf(N, rts_cts=rts)
    tau = rep["tau"]
    ts, tc = dcf_durations(T, rep.t_d, rts)
    rng = np.random.default_rng(17)
    k = rng.binomial(N, tau, size=2_000_000)
    busy_time = np.where(k == 0, T.t_slot, np.where(k == 1, ts, tc)).sum()
    payload = (k == 1).sum() * rep.t_d
    assert payload / busy_time == pytest.approx(rep.eta, rel=0.005)


# -- FD MAC ---------------------------------------------------------------------------

def test_fd_success_two_nodes():
    tau = bianchi_fixed_point(2).tau
    _, p_fd, p_hd = fd_success(2, tau)
    assert p_fd == pytest.approx(1.0)
    assert p_hd == 0.0


def test_fd_success_matches_direct_count():
    # a busy slot is a success when exactly one station sends, or two send to each other
    rng = np.random.default_rng(8)
    N, tau = 6, 0.15
    p_tr, p_fd, p_hd = fd_success(N, tau)
    tx = rng.random((400_000, N)) < tau
    dest = (np.arange(N) + rng.integers(1, N, size=(400_000, N))) % N
    busy = tx.any(axis=1)
    cnt = tx.sum(axis=1)
    single = cnt == 1
    pair = np.zeros_like(single)
    rows = np.nonzero(cnt == 2)[0]
    for r in rows:
        a, b = np.nonzero(tx[r])[0]
        pair[r] = dest[r, a] == b and dest[r, b] == a
    # a lone sender whose receiver has a packet back turns full duplex
    lone_fd = single & (rng.random(400_000) < 1 / (N - 1))
    hd = single & ~lone_fd
    fd = pair | lone_fd
    assert busy.mean() == pytest.approx(p_tr, rel=0.01)
    assert fd.sum() / busy.sum() == pytest.approx(p_fd, rel=0.03)
    assert hd.sum() / busy.sum() == pytest.approx(p_hd, rel=0.01)


def test_fd_invalid_n():
    with pytest.raises(InvalidN):
        eta_fd(1)


# -- BACK2F chain factors -----------------------------------------------------------

def test_p_j_examples():
    assert p_j_given_i(3, 2, 4) == pytest.approx(0.28125)
    assert p_j_given_i(2, 2, 52) == pytest.approx(1 / 52)
    assert p_j_given_i(1, 1, 4) == 1.0
    assert p_j_given_i(3, 0, 4) == 0.0


def test_p_j_against_fraction_count():
    for i, S in ((2, 3), (3, 4), (4, 3)):
        counts = {}
        for v in itertools.product(range(S), repeat=i):
            j = v.count(min(v))
            counts[j] = counts.get(j, 0) + 1
        for j, c in counts.items():
            assert p_j_given_i(i, j, S) == pytest.approx(float(Fraction(c, S ** i)), abs=1e-14)


def test_p_i_and_p_a_examples():
    # one round-2 loser stays at residual 0; the lone redrawer joins it w.p. 1/4
    assert p_i_given_akbl(1, 0, 2, 0, 1, 3, 4) == pytest.approx(0.75)
    assert p_i_given_akbl(2, 0, 2, 0, 1, 3, 4) == pytest.approx(0.25)
    # everyone redraws: minimum of two uniform draws over 4 values equals 1
    assert p_a_given_kbl(1, 2, 0, 2, 2, 4) == pytest.approx(5 / 16)
    # a round-2 loser is still at residual 0
    assert p_a_given_kbl(0, 2, 0, 1, 3, 4) == 1.0


@pytest.mark.parametrize("N,S", [(1, 2), (2, 4), (3, 4), (4, 6), (5, 8)])
def test_transition_rows_sum_to_one(N, S):
    for k in range(1, N + 1):
        for b in range(S):
            if not valid_state(k, b, N, S):
                continue
            for l in range(1, k + 1):
                assert row_sum(k, b, l, N, S) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("N,S", [(2, 3), (3, 4), (4, 3)])
def test_factors_match_exact_enumeration(N, S):
    rep = check_factors(N, S)
    assert rep["compared"] > 0
    assert rep["max_error"] < 1e-12, rep["mismatches"][:3]


def test_stationary_is_fixed_by_transition():
    st_ = back2f_stationary(4, 6)
    pi = st_.as_dict()
    out = apply_transition(pi, 4, 6)
    keys = set(pi) | set(out)
    assert max(abs(pi.get(k, 0) - out.get(k, 0)) for k in keys) < 1e-8
    assert sum(pi.values()) == pytest.approx(1.0)


def test_single_station_always_succeeds():
    assert back2f_stationary(1, 8).P_s == pytest.approx(1.0)
    assert eta_back2f(1, 8).eta == pytest.approx(1400 / (28 + 12 + 1400 + 10 + 50 + 2))


def test_back2f_success_one_uses_success_time():
    r = eta_back2f(10, p_s=1.0)
    assert r.eta == pytest.approx(r["T_d"] / r["T_S"])


@pytest.mark.parametrize("N,S,support", [(3, 4, 21), (4, 6, 54), (5, 8, 110)])
def test_reachable_support(N, S, support):
    # counted (S-1)N(N+1)/2 + N: the full reachable set of the chain
    st_ = back2f_stationary(N, S)
    assert sum(1 for _ in st_.states(1e-15)) == support


@pytest.mark.parametrize("N,S", [(3, 4), (4, 6), (5, 8)])
def test_stated_state_count(N, S):
    # the published count, N(N-1)(S-1)/2 + N, is checked as stated
    st_ = back2f_stationary(N, S)
    assert sum(1 for _ in st_.states(1e-15)) == N * (N - 1) * (S - 1) // 2 + N


@pytest.mark.parametrize("N,S", [(3, 4), (5, 8)])
def test_chain_success_matches_round_simulation(N, S):
    chain = back2f_stationary(N, S).P_s
    mc = simulate_rounds(N, S, 10 ** 6, np.random.default_rng(2024))
    assert abs(chain - mc.p_s) <= 3 * mc.se


# -- RCFD ---------------------------------------------------------------------------

def test_rcfd_two_nodes():
    assert eta_rcfd(2).eta == pytest.approx(2 * 1400 / 1508)


def test_rcfd_monotone_and_limit():
    etas = [eta_rcfd(n).eta for n in range(2, 200)]
    assert all(a > b for a, b in zip(etas, etas[1:]))
    assert eta_rcfd(10 ** 7).eta == pytest.approx(1400 / 1508, rel=1e-6)
    with pytest.raises(InvalidN):
        eta_rcfd(1)


@pytest.mark.parametrize("N", [2, 10, 20, 50])
def test_protocol_ordering(N):
    e = {p: eta_protocol(p, N).eta for p in ("dcf", "dcf-rtscts", "fdmac", "back2f", "rcfd")}
    assert e["rcfd"] > e["fdmac"] > e["dcf-rtscts"]
    assert e["rcfd"] > e["back2f"]


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 60), st.sampled_from([6, 12, 24, 54]), st.integers(50, 2000))
def test_eta_bounds(N, R, L):
    for p in ("dcf", "dcf-rtscts", "fdmac", "rcfd"):
        eta = eta_protocol(p, N, L=L, R=R).eta
        assert 0 < eta < 2
