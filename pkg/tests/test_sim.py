"""Topologies, channel, traffic and whole-run properties of the simulator."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcfd.acceptance import cached_run, suite_config
from rcfd.sim.channel import CONTENTION_BAND, Transmission, channel_deliver
from rcfd.sim.metrics import jain_index
from rcfd.sim.runner import PROTOCOLS, run
from rcfd.sim.topology import build_grid, build_random, from_positions
from rcfd.sim.traffic import NS, TrafficSource, app_arrivals, offered_traffic
from rcfd.sweeps import SIM_CASES, RunSpec

PROTOS = ("rcfd", "back2f", "fdmac", "dcf", "dcf-rtscts")


# -- topology -------------------------------------------------------------------------

def test_grid_degrees():
    t = build_grid(3)
    # corners see 3, edges 5, the centre 8
    assert sorted(t.degree(i) for i in range(9)) == [3, 3, 3, 3, 5, 5, 5, 5, 8]
    assert len(t.directed_pairs()) == 40
    assert build_grid(2).is_complete()


def test_random_topology_deterministic():
    a = build_random(20, rng=5)
    b = build_random(20, rng=5)
    assert a.neighbors == b.neighbors
    assert np.array_equal(a.positions, b.positions)


def test_random_mean_degree():
    # interior nodes expect N pi r^2 / l^2 neighbours; edge effects shave a little off
    N, l, r = 30, 500.0, 60.0
    degs = [np.mean([t.degree(i) for i in range(N)])
            for t in (build_random(N, l, r, rng=s) for s in range(100))]
    ideal = (N - 1) * math.pi * r ** 2 / l ** 2
    # boundary correction for a disc in a square: 1 - 8r/(3 pi l) + r^2/(2 pi l^2)
    want = ideal * (1 - 8 * r / (3 * math.pi * l) + r ** 2 / (2 * math.pi * l ** 2))
    assert np.mean(degs) == pytest.approx(want, rel=0.1)


def test_adjacency_symmetric_and_boundary_inclusive():
    t = from_positions([(0, 0), (60, 0), (120.0001, 0)], 60)
    assert t.neighbors == ((1,), (0,), ())


# -- channel --------------------------------------------------------------------------

LINE = ((1,), (0, 2), (1,))


def test_hidden_terminal_collides_at_middle():
    rep = channel_deliver([Transmission(0, 1, 0, 10), Transmission(2, 1, 5, 15)], LINE)
    assert rep.frames[(0, 1)] == "collision" and rep.frames[(1, 1)] == "collision"


def test_full_duplex_pair_decodes_both():
    txs = [Transmission(0, 1, 0, 10), Transmission(1, 0, 0, 10)]
    rep = channel_deliver(txs, LINE)
    assert rep.decoded(0, 1) and rep.decoded(1, 0)
    # the third node hears node 1 only, and that frame is clean there
    assert rep.decoded(1, 2)
    hd = channel_deliver(txs, LINE, full_duplex=False)
    assert hd.frames[(0, 1)] == "half-duplex"


def test_contention_emissions_reach_neighbours():
    rep = channel_deliver([Transmission(0, None, 0, 6, CONTENTION_BAND, frozenset({3}))], LINE)
    assert rep.slots == {1: {3}, 0: {3}}


def test_erasure_rate():
    rng = np.random.default_rng(4)

    class R:
        def random(self):
            return rng.random()
    r = R()
    ok = sum(channel_deliver([Transmission(0, 1, 0, 10)], LINE, 0.9, r).decoded(0, 1)
             for _ in range(20000))
    assert ok / 20000 == pytest.approx(0.1, abs=0.01)


# -- traffic --------------------------------------------------------------------------

def test_offered_traffic_grid3():
    t = build_grid(3)
    assert offered_traffic(t, TrafficSource()) == pytest.approx(20e6)
    assert offered_traffic(t, TrafficSource(t_off=float("inf"))) == 0.0
    assert offered_traffic(build_grid(2), TrafficSource()) == pytest.approx(6e6)


def test_app_arrivals_rate():
    src = TrafficSource()
    rng = np.random.default_rng(1)
    T = 200.0
    n = sum(len(app_arrivals(rng, src, T)) for _ in range(20))
    # ON half the time after the start, one packet per 8 ms
    want = 20 * (T - 2.0) * 0.5 / src.interval
    assert n == pytest.approx(want, rel=0.05)


def test_app_arrivals_start_bound():
    src = TrafficSource()
    rng = np.random.default_rng(2)
    for _ in range(200):
        a = app_arrivals(rng, src, 10.0)
        assert np.all(np.diff(a) > 0)
        assert a.size == 0 or a[0] > 0
        assert a.size == 0 or a[-1] <= 10 * NS


# -- metrics --------------------------------------------------------------------------

def test_jain_examples():
    assert jain_index([1, 1, 1, 1]) == 1.0
    assert jain_index([1, 0, 0, 0]) == 0.25
    assert jain_index([0, 0]) == 1.0
    with pytest.raises(ValueError):
        jain_index([])


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=40))
def test_jain_bounds(x):
    j = jain_index(x)
    assert 1 / len(x) - 1e-12 <= j <= 1 + 1e-12


# -- whole runs -----------------------------------------------------------------------

@pytest.mark.parametrize("proto", PROTOS)
def test_packet_conservation(proto):
    m = run(build_grid(3), proto, T=8.0, seed=3, transient=1.0)
    assert m.generated == (m.delivered_total + sum(m.discarded.values()) + m.in_queue
                           + m.in_flight)
    assert 0 <= m.jain <= 1
    assert m.delta <= 1.0 + 0.01


@pytest.mark.parametrize("proto", PROTOS)
def test_runs_are_deterministic(proto):
    a = run(build_grid(3), proto, T=3.0, seed=9, transient=1.0)
    b = run(build_grid(3), proto, T=3.0, seed=9, transient=1.0)
    assert a == b


def test_age_limit_bounds_delay():
    m = run(build_grid(4), "dcf", TrafficSource(rate_bps=5e6), T=6.0, seed=1, transient=1.0,
            delta_max=0.2)
    assert m.discarded["age-limit"] > 0
    assert m.delta <= 0.2 + 0.01


def test_erasures_reduce_delivery():
    clean = run(build_grid(3), "rcfd", T=6.0, seed=2, transient=1.0)
    lossy = run(build_grid(3), "rcfd", T=6.0, seed=2, transient=1.0, loss_p=0.3)
    assert lossy.gamma < clean.gamma


def test_rcfd_single_domain_no_collisions():
    m = run(build_grid(2), "rcfd", TrafficSource(rate_bps=3e6), T=6.0, seed=4, transient=1.0)
    assert m.collided == 0 and m.delivered > 0


def test_rcfd_grid3_case_one_no_collisions():
    cfg = suite_config()
    _, payload, rate = SIM_CASES["sim-grid-caseI"]
    row = cached_run(RunSpec("rcfd", "grid", 3, 0, payload, rate, cfg))
    assert not row["error"]
    assert row["collided"] == 0


def test_rcfd_leads_grid5_case_two():
    cfg = suite_config()
    _, payload, rate = SIM_CASES["sim-grid-caseII"]
    rows = {p: cached_run(RunSpec(p, "grid", 5, 0, payload, rate, cfg)) for p in PROTOS}
    assert all(not r["error"] for r in rows.values())
    g = {p: r["gamma"] for p, r in rows.items()}
    assert g["rcfd"] == max(g.values()), g
