"""Exhaustive checks of the RCFD clearing rules on small networks.

Every labelled graph on N nodes, every assignment of transmit intentions
(each node either idle or holding a packet for one neighbour) and every
round-1 draw vector is resolved with :func:`rcfd.core.resolve_contention`, and
the resulting transmit decisions are checked for conflicts.

Decisions depend on round-1 draws only through comparisons, so draw vectors
are grouped into classes that share the same weak order; each class is
resolved once and weighted by the number of draw vectors in it. Passing
``literal=True`` walks every draw vector one by one instead.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterator

import numpy as np

from .core import Slot, TxKind, default_mapping, elect_pt, elect_rr, resolve_contention


def all_graphs(N: int) -> Iterator[dict]:
    """Every labelled undirected graph on nodes 0..N-1 as an adjacency dict."""
    pairs = list(itertools.combinations(range(N), 2))
    for mask in range(1 << len(pairs)):
        adj = {v: set() for v in range(N)}
        for b, (u, v) in enumerate(pairs):
            if mask >> b & 1:
                adj[u].add(v)
                adj[v].add(u)
        yield {v: frozenset(s) for v, s in adj.items()}


def all_intents(adj: dict) -> Iterator[dict]:
    """Every map node -> destination, each node idle or addressing a neighbour."""
    nodes = sorted(adj)
    options = [[None] + sorted(adj[v]) for v in nodes]
    for choice in itertools.product(*options):
        yield {v: d for v, d in zip(nodes, choice) if d is not None}


def weak_orders(k: int) -> Iterator[tuple]:
    """Dense rank vectors of length k (each rank 0..r-1 used at least once)."""
    for vec in itertools.product(range(k), repeat=k):
        used = set(vec)
        if used == set(range(len(used))):
            yield vec


def draw_classes(k: int, nslots: int) -> Iterator[tuple[tuple, int]]:
    """(rank vector, number of draw vectors over ``nslots`` slots sharing it)."""
    for vec in weak_orders(k):
        r = len(set(vec))
        if r <= nslots:
            yield vec, comb(nslots, r)


def conflicts(adj: dict, tx: dict, full_duplex: bool = True) -> list[str]:
    """Conflicts among cleared transmissions ``tx`` = {sender: dest}.

    A conflict is a node addressed by two in-range senders at once. When
    ``full_duplex`` is False, a node that both sends and is addressed is a
    conflict too.
    """
    out = []
    incoming = _incoming(adj, tx)
    for r, senders in incoming.items():
        if len(senders) > 1:
            out.append(f"node {r} addressed by {sorted(senders)}")
        if not full_duplex and r in tx:
            out.append(f"half-duplex node {r} sends to {tx[r]} while addressed by {sorted(senders)}")
    return out


def _incoming(adj, tx):
    incoming: dict[int, list[int]] = {}
    for s, d in tx.items():
        if d in adj[s]:
            incoming.setdefault(d, []).append(s)
    return incoming


def asymmetric_exchanges(adj: dict, tx: dict) -> list[tuple[int, int, int]]:
    """(node, its dest, a sender addressing it) where the sender is not the dest."""
    out = []
    for r, senders in _incoming(adj, tx).items():
        if r in tx:
            out.extend((r, tx[r], s) for s in senders if s != tx[r])
    return out


def physical_collisions(adj: dict, tx: dict) -> list[tuple[int, int]]:
    """Receptions (sender, dest) overlapped by a third in-range transmitter."""
    bad = []
    for s, d in tx.items():
        if any(z != s and z != d and z in adj[d] for z in tx):
            bad.append((s, d))
    return bad


def fd_pairing_violations(adj: dict, decisions: dict) -> list[str]:
    """Secondary replies without the matching primary (complete graphs only)."""
    out = []
    for n, dec in decisions.items():
        if dec.kind is TxKind.SECONDARY_FD:
            other = decisions.get(dec.dest)
            if other is None or other.kind is not TxKind.PRIMARY or other.dest != n:
                out.append(f"secondary {n}->{dec.dest} without primary {dec.dest}->{n}")
    return out


@dataclass
class EnumerationReport:
    N: int
    S: int
    modulation_order: int
    scenarios: int = 0          # resolved (graph, intents, draw class) triples
    draw_vectors: int = 0       # draw vectors represented
    conflicts: int = 0          # weighted by draw vectors
    physical: int = 0           # weighted count of physically overlapped receptions
    asymmetric: int = 0         # weighted count of send-to-one, receive-from-another
    fd_pairing: int = 0
    role_overlap: int = 0
    examples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.conflicts == 0 and self.fd_pairing == 0 and self.role_overlap == 0


def _resolve(adj, smap, picks, intents, drop=None):
    # every RR holds a packet for the PT it answers: the most permissive case
    return resolve_contention(adj, smap, picks, intents,
                              has_packet_for=lambda rr, pt: True, drop=drop)


def scenarios(N: int, S: int, modulation_order: int = 1, literal: bool = False):
    """Yield (adj, intents, picks, weight) for every case of the enumeration."""
    nslots = S * modulation_order
    m = modulation_order
    for adj in all_graphs(N):
        for intents in all_intents(adj):
            contenders = sorted(intents)
            k = len(contenders)
            if k == 0:
                continue
            if literal:
                for vec in itertools.product(range(nslots), repeat=k):
                    picks = {v: Slot(x // m, x % m) for v, x in zip(contenders, vec)}
                    yield adj, intents, picks, 1
            else:
                for vec, w in draw_classes(k, nslots):
                    picks = {v: Slot(x // m, x % m) for v, x in zip(contenders, vec)}
                    yield adj, intents, picks, w


def enumerate_no_collision(N: int, S: int, modulation_order: int = 1, literal: bool = False,
                           max_examples: int = 5) -> EnumerationReport:
    """Resolve every case for N nodes on S subcarriers and count violations."""
    smap = default_mapping(N, S, modulation_order)
    rep = EnumerationReport(N, S, modulation_order)
    for adj, intents, picks, w in scenarios(N, S, modulation_order, literal):
        out = _resolve(adj, smap, picks, intents)
        rep.scenarios += 1
        rep.draw_vectors += w
        tx = {n: d for n, (d, _) in out.transmissions().items()}
        bad = conflicts(adj, tx)
        if bad:
            rep.conflicts += w
            if len(rep.examples) < max_examples:
                rep.examples.append((adj, intents, picks, bad))
        rep.physical += w * len(physical_collisions(adj, tx))
        rep.asymmetric += w * len(asymmetric_exchanges(adj, tx))
        complete = all(len(adj[v]) == N - 1 for v in adj)
        if complete and fd_pairing_violations(adj, out.decisions):
            rep.fd_pairing += w
        for n, o in out.observations.items():
            is_pt = n in picks and elect_pt(picks[n], o)
            if is_pt and elect_rr(n, is_pt, o, smap):
                rep.role_overlap += w
    return rep


def mutation_check(N: int, S: int, rng: np.random.Generator, samples: int = 2000,
                   drop_p: float = 0.3, single: bool = True, complete_only: bool = False) -> dict:
    """Apply false negatives to enumeration cases and look for conflicts.

    For every sampled case the clean outcome is recomputed with (a) each
    single heard slot removed in turn when ``single`` is set and (b) a random
    subset of heard slots removed with probability ``drop_p`` each.
    Returns counts of mutated runs and of runs that produced a conflict or a
    transmission that the clean run held back and that then collides.
    ``complete_only`` restricts the cases to single-collision-domain graphs.
    """
    smap = default_mapping(N, S)
    cases = [c for c in scenarios(N, S)
             if not complete_only or all(len(nb) == N - 1 for nb in c[0].values())]
    idx = rng.choice(len(cases), size=min(samples, len(cases)), replace=False)
    runs = bad = new_tx_colliding = physical = 0
    examples = []
    for c in sorted(idx):
        adj, intents, picks, _ = cases[c]
        clean = _resolve(adj, smap, picks, intents)
        clean_tx = {n: d for n, (d, _) in clean.transmissions().items()}
        muts = []
        if single:
            for n, o in clean.observations.items():
                for rnd, heard in ((1, o.round1_heard),
                                   (2, o.round2_heard_set1 | o.round2_heard_set2),
                                   (3, o.round3_heard_set1 | o.round3_heard_set2)):
                    for s in heard:
                        muts.append(frozenset({(n, rnd, s)}))
        seed = int(rng.integers(2**31))
        sub = np.random.default_rng(seed)
        rand_mut = {}
        for n, o in clean.observations.items():
            for rnd, heard in ((1, o.round1_heard),
                               (2, o.round2_heard_set1 | o.round2_heard_set2),
                               (3, o.round3_heard_set1 | o.round3_heard_set2)):
                for s in sorted(heard):
                    if sub.random() < drop_p:
                        rand_mut[(n, rnd, s)] = True
        muts.append(frozenset(rand_mut))
        for mut in muts:
            out = _resolve(adj, smap, picks, intents, drop=lambda n, r, s, mut=mut: (n, r, s) in mut)
            runs += 1
            tx = {n: d for n, (d, _) in out.transmissions().items()}
            cf = conflicts(adj, tx)
            physical += bool(physical_collisions(adj, tx))
            if cf:
                bad += 1
                if len(examples) < 5:
                    examples.append((adj, intents, picks, sorted(mut), cf))
            extra = set(tx) - set(clean_tx)
            if extra and cf:
                new_tx_colliding += 1
    return dict(runs=runs, conflicts=bad, new_tx_colliding=new_tx_colliding, physical=physical,
                examples=examples)
