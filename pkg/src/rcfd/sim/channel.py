"""Reception rule of the simplified channel.

Frames are either full-channel frames (data and MAC control frames) or
contention emissions on subcarrier slots. A full-channel frame is decoded at
a receiver iff the sender is in range, no other in-range node sends a
full-channel frame overlapping it in time, the receiver is not itself
sending while half duplex, and an independent erasure with probability
``loss_p`` does not fire. A full-duplex receiver cancels its own signal
perfectly. Contention emissions reach every in-range node without loss.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

DATA_BAND = "data"
CONTENTION_BAND = "contention"


@dataclass(frozen=True)
class Transmission:
    sender: int
    dest: int | None
    start: int
    end: int
    band: str = DATA_BAND
    slots: frozenset = frozenset()


@dataclass
class DeliveryReport:
    # (tx index, receiver) -> "ok" | "collision" | "erased" | "half-duplex"
    frames: dict = field(default_factory=dict)
    # receiver -> set of contention slots heard
    slots: dict = field(default_factory=dict)

    def decoded(self, i: int, r: int) -> bool:
        return self.frames.get((i, r)) == "ok"


def _overlap(a: Transmission, b: Transmission) -> bool:
    return a.start < b.end and b.start < a.end


def channel_deliver(txs: Sequence[Transmission], neighbors, loss_p: float = 0.0, rng=None,
                    full_duplex=True) -> DeliveryReport:
    """Outcome of every in-range reception among concurrent transmissions.

    ``full_duplex`` is a bool for all nodes or a set of FD-capable node ids.
    ``rng`` needs ``random()`` and is only used when ``loss_p > 0``; erasures
    are drawn in (tx index, receiver) order.
    """
    def is_fd(n):
        return full_duplex if isinstance(full_duplex, bool) else n in full_duplex

    rep = DeliveryReport()
    data = [(i, t) for i, t in enumerate(txs) if t.band == DATA_BAND]
    for i, t in enumerate(txs):
        if t.band != CONTENTION_BAND:
            continue
        for r in list(neighbors[t.sender]) + [t.sender]:
            rep.slots.setdefault(r, set()).update(t.slots)
    for i, t in data:
        for r in sorted(neighbors[t.sender]):
            own = [u for _, u in data if u.sender == r and _overlap(u, t)]
            others = [u for j, u in data
                      if j != i and u.sender != r and r in neighbors[u.sender] and _overlap(u, t)]
            if others:
                out = "collision"
            elif own and not is_fd(r):
                out = "half-duplex"
            elif loss_p > 0 and rng.random() < loss_p:
                out = "erased"
            else:
                out = "ok"
            rep.frames[(i, r)] = out
    return rep
