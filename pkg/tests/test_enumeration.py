"""Exhaustive checks of the clearing rules on every small network."""
import itertools

import numpy as np
import pytest

from rcfd.core import Slot, TxKind, default_mapping, resolve_contention
from rcfd.enumeration import (all_graphs, conflicts, draw_classes, enumerate_no_collision,
                              mutation_check, physical_collisions)


def test_graph_count():
    assert sum(1 for _ in all_graphs(4)) == 2 ** 6


def test_draw_classes_cover_every_vector():
    for k, n in ((1, 4), (2, 5), (3, 4), (4, 3)):
        assert sum(w for _, w in draw_classes(k, n)) == n ** k


def test_class_walk_equals_literal_walk():
    a = enumerate_no_collision(3, 6)
    b = enumerate_no_collision(3, 6, literal=True)
    assert a.draw_vectors == b.draw_vectors
    assert (a.conflicts, a.physical, a.asymmetric) == (b.conflicts, b.physical, b.asymmetric)


@pytest.mark.parametrize("N,S,m", [(2, 4, 1), (2, 2, 2), (3, 6, 1), (3, 8, 1), (3, 4, 2), (4, 8, 1),
                                   (4, 4, 2)])
def test_no_conflicting_decisions(N, S, m):
    rep = enumerate_no_collision(N, S, m)
    assert rep.conflicts == 0, rep.examples
    assert rep.fd_pairing == 0
    assert rep.role_overlap == 0


def test_conflict_detector_catches_hidden_terminal():
    adj = {0: frozenset({1}), 1: frozenset({0, 2}), 2: frozenset({1})}
    assert conflicts(adj, {0: 1, 2: 1})
    assert not conflicts(adj, {0: 1, 1: 0})


def test_tie_between_in_range_pts_overlaps_a_reception():
    # two in-range PTs tie in round 1; their RRs are out of each other's range.
    # No node is addressed twice, but PT 0's reception of its FD reply from 2
    # overlaps PT 1's data.
    adj = {0: frozenset({1, 2}), 1: frozenset({0, 3}), 2: frozenset({0}), 3: frozenset({1})}
    smap = default_mapping(4, 8)
    out = resolve_contention(adj, smap, {0: Slot(1), 1: Slot(1)}, {0: 2, 1: 3},
                             has_packet_for=lambda rr, pt: True)
    tx = {n: d for n, (d, _) in out.transmissions().items()}
    assert tx == {0: 2, 1: 3, 2: 0, 3: 1}
    assert not conflicts(adj, tx)
    assert physical_collisions(adj, tx)


def test_single_missed_slot_single_domain():
    # every case on the complete 4-node graph, each heard slot deleted alone
    cases = mutation_check(4, 8, np.random.default_rng(1), samples=10 ** 6, drop_p=0.0,
                           complete_only=True)
    assert cases["runs"] > 0
    assert cases["conflicts"] == 0


def test_false_negatives_all_topologies():
    # deleting heard slots must never turn a hold into a colliding transmission
    cases = mutation_check(4, 8, np.random.default_rng(1), samples=2000)
    assert cases["conflicts"] == 0, cases["examples"][:2]


def test_false_negative_counterexample_is_reproducible():
    adj = {0: frozenset({2, 3}), 1: frozenset({2}), 2: frozenset({0, 1}), 3: frozenset({0})}
    smap = default_mapping(4, 8)
    picks = {0: Slot(0), 1: Slot(1), 2: Slot(1), 3: Slot(1)}
    intents = {0: 3, 1: 2, 2: 1, 3: 0}
    clean = resolve_contention(adj, smap, picks, intents, has_packet_for=lambda a, b: True)
    assert not conflicts(adj, {n: d for n, (d, _) in clean.transmissions().items()})
    miss = resolve_contention(adj, smap, picks, intents, has_packet_for=lambda a, b: True,
                              drop=lambda n, r, sl: (n, r, sl) == (2, 2, smap.f1[1]))
    tx = {n: d for n, (d, _) in miss.transmissions().items()}
    assert conflicts(adj, tx)
