"""RCFD contention logic.

Pure functions over small value types. Node ids and subcarrier indices are
0-based, so the node written n1 elsewhere is node 0 here and subcarrier s1 is
``Slot(0, 0)``.

Contention runs in three frequency-domain rounds:

1. every node with data emits one random slot; a node whose slot is the lowest
   it heard becomes primary transmitter (PT);
2. each PT emits an RTS made of its own set-1 slot and its destination's
   set-2 slot; a non-PT node that hears its own set-2 slot becomes RTS
   receiver (RR);
3. each RR emits a CTS made of its own set-1 slot and the set-2 slot of the
   lowest PT it heard in round 2.

PTs and RRs then apply the clearing rules in :func:`decide_transmission`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple

import numpy as np

from .errors import CapacityExceeded, ChosenNotHeard, NoRtsHeard, UnmappedNode


class Slot(NamedTuple):
    """A (subcarrier, symbol-value) pair. Tuple order is the slot order."""

    subcarrier: int
    value: int = 0

    def __repr__(self):
        return f"Slot({self.subcarrier},{self.value})"


@dataclass(frozen=True)
class SubcarrierMap:
    """Association of nodes with one slot in each of two disjoint subcarrier sets."""

    total_subcarriers: int
    set1: tuple
    set2: tuple
    f1: tuple  # f1[node] -> Slot in set1
    f2: tuple
    modulation_order: int = 1
    _inv1: dict = field(init=False, repr=False, compare=False)
    _inv2: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        S, m = self.total_subcarriers, self.modulation_order
        if S < 2 or S % 2:
            raise ValueError("total_subcarriers must be even and >= 2")
        if m < 1:
            raise ValueError("modulation_order must be >= 1")
        s1, s2 = set(self.set1), set(self.set2)
        if s1 & s2 or not (s1 | s2) <= set(range(S)):
            raise ValueError("subcarrier sets must be disjoint subsets of range(S)")
        if len(self.f1) != len(self.f2):
            raise ValueError("f1 and f2 must cover the same nodes")
        if len(self.f1) > m * S // 2:
            raise CapacityExceeded(f"{len(self.f1)} nodes exceed capacity {m * S // 2}")
        for f, allowed in ((self.f1, s1), (self.f2, s2)):
            if len(set(f)) != len(f):
                raise ValueError("two nodes share a slot")
            for sl in f:
                if sl.subcarrier not in allowed or not 0 <= sl.value < m:
                    raise ValueError(f"slot {sl} outside its set")
        object.__setattr__(self, "_inv1", {sl: n for n, sl in enumerate(self.f1)})
        object.__setattr__(self, "_inv2", {sl: n for n, sl in enumerate(self.f2)})

    @property
    def node_count(self) -> int:
        return len(self.f1)

    def slot1(self, node: int) -> Slot:
        if not 0 <= node < len(self.f1):
            raise UnmappedNode(node)
        return self.f1[node]

    def slot2(self, node: int) -> Slot:
        if not 0 <= node < len(self.f2):
            raise UnmappedNode(node)
        return self.f2[node]

    def owner1(self, slot: Slot) -> int:
        try:
            return self._inv1[slot]
        except KeyError:
            raise UnmappedNode(slot) from None

    def owner2(self, slot: Slot) -> int:
        try:
            return self._inv2[slot]
        except KeyError:
            raise UnmappedNode(slot) from None

    def in_set1(self, slot: Slot) -> bool:
        return slot.subcarrier in self.set1

    def in_set2(self, slot: Slot) -> bool:
        return slot.subcarrier in self.set2

    def all_slots(self) -> list:
        return [Slot(s, v) for s in range(self.total_subcarriers) for v in range(self.modulation_order)]


def default_mapping(node_count: int, subcarriers: int, modulation_order: int = 1) -> SubcarrierMap:
    """Lower half of the band is set 1, upper half set 2.

    Node i takes the i-th slot of each half, slots running through the symbol
    values of a subcarrier before moving to the next subcarrier.
    """
    S, m = subcarriers, modulation_order
    if S < 2 or S % 2:
        raise ValueError("subcarriers must be even and >= 2")
    half = S // 2
    if node_count > m * half:
        raise CapacityExceeded(f"{node_count} nodes exceed capacity {m * half}")
    f1 = tuple(Slot(i // m, i % m) for i in range(node_count))
    f2 = tuple(Slot(half + i // m, i % m) for i in range(node_count))
    return SubcarrierMap(S, tuple(range(half)), tuple(range(half, S)), f1, f2, m)


def round1_pick(rng: np.random.Generator, subcarriers: int, modulation_order: int = 1, size=None):
    """Uniform draw over all S*m slots. Returns a Slot, or a list of Slots when ``size`` is given."""
    m = modulation_order
    k = rng.integers(subcarriers * m, size=size)
    if size is None:
        return Slot(int(k) // m, int(k) % m)
    return [Slot(int(v) // m, int(v) % m) for v in np.ravel(k)]


@dataclass(frozen=True)
class ContentionObservation:
    """Slots one node heard in each round, its own emissions included."""

    round1_heard: frozenset = frozenset()
    round2_heard_set1: frozenset = frozenset()
    round2_heard_set2: frozenset = frozenset()
    round3_heard_set1: frozenset = frozenset()
    round3_heard_set2: frozenset = frozenset()


class NodeRole(enum.Enum):
    IDLE = "idle"
    PRIMARY_TRANSMITTER = "pt"
    RTS_RECEIVER = "rr"
    BYSTANDER = "bystander"


class TxKind(enum.Enum):
    PRIMARY = "primary"
    SECONDARY_FD = "secondary"
    HOLD = "hold"


@dataclass(frozen=True)
class TxDecision:
    kind: TxKind
    dest: int | None = None

    @property
    def transmits(self) -> bool:
        return self.kind is not TxKind.HOLD


HOLD = TxDecision(TxKind.HOLD)


def transmit_primary(dest: int) -> TxDecision:
    return TxDecision(TxKind.PRIMARY, dest)


def transmit_secondary(dest: int) -> TxDecision:
    return TxDecision(TxKind.SECONDARY_FD, dest)


def elect_pt(chosen: Slot, obs: ContentionObservation) -> bool:
    """True iff the node's own round-1 slot is the lowest it heard."""
    if chosen not in obs.round1_heard:
        raise ChosenNotHeard(f"{chosen} not in {sorted(obs.round1_heard)}")
    return chosen == min(obs.round1_heard)


def round2_emission(self_id: int, dest: int, smap: SubcarrierMap) -> frozenset:
    """RTS slots: own set-1 slot plus the destination's set-2 slot."""
    if dest == self_id:
        raise ValueError("a node cannot address itself")
    return frozenset((smap.slot1(self_id), smap.slot2(dest)))


def round3_emission(self_id: int, recipient: int, smap: SubcarrierMap) -> frozenset:
    """CTS slots: own set-1 slot plus the recipient's set-2 slot."""
    if recipient == self_id:
        raise ValueError("a node cannot address itself")
    return frozenset((smap.slot1(self_id), smap.slot2(recipient)))


def elect_rr(self_id: int, is_pt: bool, obs: ContentionObservation, smap: SubcarrierMap) -> bool:
    return (not is_pt) and smap.slot2(self_id) in obs.round2_heard_set2


def select_cts_recipient(obs: ContentionObservation, smap: SubcarrierMap) -> int:
    """Owner of the lowest set-1 slot heard in round 2."""
    if not obs.round2_heard_set1:
        raise NoRtsHeard("no set-1 slot heard in round 2")
    return smap.owner1(min(obs.round2_heard_set1))


def decide_transmission(self_id: int, role: NodeRole, dest: int | None,
                        obs: ContentionObservation, smap: SubcarrierMap) -> TxDecision:
    """Clearing rules after round 3.

    A PT sends to ``dest`` if it heard dest's set-1 slot and its own set-2 slot
    is the only set-2 slot it heard. An RR sends its full-duplex reply to
    ``dest`` (its CTS recipient; None when it has nothing queued for it) if
    that PT was the only RTS sender it heard and it was the only CTS sender it
    heard. Everybody else holds.
    """
    if role is NodeRole.PRIMARY_TRANSMITTER:
        if (dest is not None and smap.slot1(dest) in obs.round3_heard_set1
                and obs.round3_heard_set2 == {smap.slot2(self_id)}):
            return transmit_primary(dest)
        return HOLD
    if role is NodeRole.RTS_RECEIVER:
        if (dest is not None and obs.round2_heard_set1 == {smap.slot1(dest)}
                and obs.round3_heard_set1 == {smap.slot1(self_id)}):
            return transmit_secondary(dest)
        return HOLD
    return HOLD


# -- deferring after an overheard CTS -------------------------------------------------

@dataclass(frozen=True)
class HeardCts:
    source: int
    deadline: int  # time at which the deferral expires on its own


@dataclass(frozen=True)
class HeardAck:
    source: int


@dataclass(frozen=True)
class Timeout:
    now: int


@dataclass(frozen=True)
class DeferState:
    """Pending deferrals of one idle node, one entry per CTS sender."""

    pending: tuple = ()  # ((source, deadline), ...)

    @property
    def deferred(self) -> bool:
        return bool(self.pending)

    @property
    def until(self) -> int | None:
        return max((d for _, d in self.pending), default=None)


def deferring_update(state: DeferState, event) -> DeferState:
    """Advance the deferral state of an idle node.

    A CTS arms (or extends) a deferral toward its sender; an ACK from that
    sender clears it; a timeout clears every deferral whose deadline passed.
    """
    if isinstance(event, HeardCts):
        rest = tuple((s, d) for s, d in state.pending if s != event.source)
        old = [d for s, d in state.pending if s == event.source]
        deadline = max([event.deadline] + old)
        return DeferState(rest + ((event.source, deadline),))
    if isinstance(event, HeardAck):
        return DeferState(tuple((s, d) for s, d in state.pending if s != event.source))
    if isinstance(event, Timeout):
        return DeferState(tuple((s, d) for s, d in state.pending if d > event.now))
    raise TypeError(f"unknown event {event!r}")


# -- whole-neighbourhood resolution -------------------------------------------------

@dataclass(frozen=True)
class ContentionOutcome:
    picks: dict
    observations: dict
    roles: dict
    cts_recipient: dict  # RR -> node it sent its CTS to
    decisions: dict

    def transmissions(self) -> dict:
        """{sender: (dest, kind)} for every node cleared to transmit."""
        return {n: (d.dest, d.kind) for n, d in self.decisions.items() if d.transmits}


def _heard(node, nbrs, emissions):
    out = set(emissions.get(node, ()))
    for v in nbrs:
        out.update(emissions.get(v, ()))
    return out


def resolve_contention(neighbors: Mapping[int, Iterable[int]], smap: SubcarrierMap,
                       picks: Mapping[int, Slot], intents: Mapping[int, int],
                       has_packet_for: Callable[[int, int], bool] | None = None,
                       listeners: Iterable[int] | None = None,
                       drop: Callable[[int, int, Slot], bool] | None = None) -> ContentionOutcome:
    """Run the three rounds for a set of contenders.

    Parameters
    ----------
    neighbors : mapping node -> iterable of in-range nodes
    picks : round-1 slot of every contender
    intents : destination of every contender
    has_packet_for : ``(rr, pt) -> bool``; whether an RR holds a packet for
        the PT it answers. Defaults to never.
    listeners : nodes able to take part as RR (default: every node in
        ``neighbors``). Contenders always listen.
    drop : ``(node, round, slot) -> bool``; slots a node misses (false
        negatives). A node never misses its own emission.
    """
    nodes = set(neighbors)
    listen = set(nodes if listeners is None else listeners) | set(picks)
    has_packet_for = has_packet_for or (lambda rr, pt: False)

    def observe(node, rnd, emissions):
        heard = _heard(node, neighbors[node], emissions)
        if drop is not None:
            own = emissions.get(node, ())
            heard = {s for s in heard if s in own or not drop(node, rnd, s)}
        return heard

    e1 = {n: (s,) for n, s in picks.items()}
    obs1 = {n: frozenset(observe(n, 1, e1)) for n in listen}
    pts = {n for n in picks if elect_pt(picks[n], ContentionObservation(obs1[n]))}

    e2 = {n: round2_emission(n, intents[n], smap) for n in pts}
    h2 = {n: observe(n, 2, e2) for n in listen}
    obs2 = {n: (frozenset(s for s in h2[n] if smap.in_set1(s)),
                frozenset(s for s in h2[n] if smap.in_set2(s))) for n in listen}
    roles, cts_to = {}, {}
    for n in listen:
        o = ContentionObservation(obs1[n], *obs2[n])
        if n in pts:
            roles[n] = NodeRole.PRIMARY_TRANSMITTER
        elif elect_rr(n, False, o, smap) and o.round2_heard_set1:
            roles[n] = NodeRole.RTS_RECEIVER
            cts_to[n] = select_cts_recipient(o, smap)
        else:
            roles[n] = NodeRole.BYSTANDER if n in picks or h2[n] else NodeRole.IDLE

    e3 = {n: round3_emission(n, r, smap) for n, r in cts_to.items()}
    observations, decisions = {}, {}
    for n in listen:
        h3 = observe(n, 3, e3)
        o = ContentionObservation(
            obs1[n], *obs2[n],
            frozenset(s for s in h3 if smap.in_set1(s)),
            frozenset(s for s in h3 if smap.in_set2(s)))
        observations[n] = o
        role = roles[n]
        if role is NodeRole.PRIMARY_TRANSMITTER:
            dest = intents[n]
        elif role is NodeRole.RTS_RECEIVER:
            dest = cts_to[n] if has_packet_for(n, cts_to[n]) else None
        else:
            dest = None
        decisions[n] = decide_transmission(n, role, dest, o, smap)
    return ContentionOutcome(dict(picks), observations, roles, cts_to, decisions)


def resolve_indexed(neighbors, picks: Mapping[int, int], intents: Mapping[int, int],
                    listeners: Iterable[int], has_packet_for: Callable[[int, int], bool]):
    """Same outcome as :func:`resolve_contention` under :func:`default_mapping`, on integers.

    With the default map, node order equals set-1 slot order, so the lowest
    RTS heard is simply the lowest PT id in range. ``picks`` are flat slot
    indices ``subcarrier * m + value``. Returns ``(pts, cts_to, decisions)``
    where decisions maps each cleared node to ``(dest, is_primary)``. No false
    negatives are modelled.
    """
    pts = set()
    for n, k in picks.items():
        if all(picks.get(v, k) >= k for v in neighbors[n]):
            pts.add(n)
    cts_to = {}
    pt_near = {}
    for h in listeners:
        if h in pts:
            continue
        near = [v for v in neighbors[h] if v in pts]
        if near and any(intents[v] == h for v in near):
            cts_to[h] = min(near)
            pt_near[h] = near
    decisions = {}
    for i in pts:
        j = intents[i]
        rrs = [v for v in neighbors[i] if v in cts_to]
        if j in cts_to and j in neighbors[i] and all(cts_to[v] == i for v in rrs):
            decisions[i] = (j, True)
    for h, pt in cts_to.items():
        if len(pt_near[h]) == 1 and not any(v in cts_to for v in neighbors[h]) and has_packet_for(h, pt):
            decisions[h] = (pt, False)
    return pts, cts_to, decisions
