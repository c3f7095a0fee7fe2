"""Node placement and in-range adjacency."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Topology:
    positions: np.ndarray  # (N, 2) meters
    radius: float
    neighbors: tuple       # neighbors[i] = sorted tuple of in-range nodes

    @property
    def n(self) -> int:
        return len(self.neighbors)

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def directed_pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in self.neighbors[i]]

    def adjacency(self) -> dict:
        return {i: frozenset(nb) for i, nb in enumerate(self.neighbors)}

    def is_complete(self) -> bool:
        return all(len(nb) == self.n - 1 for nb in self.neighbors)


def from_positions(positions, radius: float) -> Topology:
    """Nodes within ``radius`` of each other are neighbours (boundary included)."""
    pos = np.asarray(positions, dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    inr = dist <= radius * (1 + 1e-9)
    np.fill_diagonal(inr, False)
    nbrs = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in inr)
    return Topology(pos, float(radius), nbrs)


def build_grid(g: int, d: float = 100.0) -> Topology:
    """g x g lattice with spacing d; coverage radius d*sqrt(2) reaches diagonal neighbours."""
    if g < 2 or d <= 0:
        raise ValueError("need g >= 2 and d > 0")
    pos = [(d * c, d * r) for r in range(g) for c in range(g)]
    return from_positions(pos, d * math.sqrt(2))


def build_random(N: int, l: float = 500.0, r: float = 60.0, rng=None) -> Topology:
    """N nodes uniform in the square [0, l]^2."""
    if N < 2 or l <= 0 or r <= 0:
        raise ValueError("need N >= 2 and positive l, r")
    rng = np.random.default_rng(rng)
    return from_positions(rng.uniform(0, l, size=(N, 2)), r)
