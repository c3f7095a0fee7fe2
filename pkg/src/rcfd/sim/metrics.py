"""Per-run metrics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DISCARD_REASONS = ("retry-limit", "queue-overflow", "age-limit")


def jain_index(values) -> float:
    """(sum x)^2 / (n sum x^2); 1 for an all-zero vector."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("empty input")
    sq = float((x ** 2).sum())
    if sq == 0.0:
        return 1.0
    return float(x.sum() ** 2 / (x.size * sq))


@dataclass
class SimMetrics:
    gamma: float
    delta: float
    jain: float
    offered: float
    delivered: int
    collided: int
    discarded: dict = field(default_factory=dict)
    generated: int = 0
    in_queue: int = 0
    in_flight: int = 0
    attempts: int = 0
    delivered_bits: int = 0
    events: int = 0
    delivered_total: int = 0  # including the transient period

    def row(self) -> dict:
        d = dict(gamma=self.gamma, delta=self.delta, jain=self.jain, offered=self.offered,
                 delivered=self.delivered, collided=self.collided, attempts=self.attempts,
                 generated=self.generated)
        for r in DISCARD_REASONS:
            d["discard_" + r.replace("-", "_")] = self.discarded.get(r, 0)
        return d
