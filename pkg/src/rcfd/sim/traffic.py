"""On/off application traffic, one application per directed neighbour pair."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import Topology

NS = 1_000_000_000


@dataclass(frozen=True)
class TrafficSource:
    """Parameters shared by every application.

    Start times are exponential with rate ``lambda_s`` truncated at ``ts_max``;
    ON and OFF periods are exponential with means ``t_on`` and ``t_off``
    (seconds). During ON a source emits ``payload``-byte packets at constant
    bit rate ``rate_bps``. Sources start in the OFF state.
    ``saturated`` replaces all of this with an always-full queue.
    """

    payload: int = 1000
    rate_bps: float = 1e6
    lambda_s: float = 0.5
    ts_max: float = 5.0
    t_on: float = 0.1
    t_off: float = 0.1
    saturated: bool = False

    @property
    def interval(self) -> float:
        return 8 * self.payload / self.rate_bps


def offered_traffic(topology: Topology, traffic: TrafficSource) -> float:
    """Aggregate offered load in bit/s."""
    n_apps = len(topology.directed_pairs())
    if traffic.t_off == float("inf"):
        return 0.0
    return traffic.rate_bps * n_apps * traffic.t_on / (traffic.t_on + traffic.t_off)


def truncated_exp(rng: np.random.Generator, rate: float, upper: float, size=None):
    """Exponential(rate) conditioned on being below ``upper`` (inverse CDF)."""
    u = rng.random(size)
    return -np.log1p(-u * (1 - np.exp(-rate * upper))) / rate


def app_arrivals(rng: np.random.Generator, traffic: TrafficSource, T: float) -> np.ndarray:
    """Packet creation times (ns, int64) of one application over [0, T] seconds."""
    start = float(truncated_exp(rng, traffic.lambda_s, traffic.ts_max))
    chunks = []
    t = start
    iv = traffic.interval
    while t < T:
        t += rng.exponential(traffic.t_off)
        if t >= T:
            break
        on = rng.exponential(traffic.t_on)
        end = min(t + on, T)
        k = int(np.floor((end - t) / iv - 1e-12)) + 1 if end > t else 0
        if k > 0:
            chunks.append(t + iv * np.arange(k))
        t = t + on
    if not chunks:
        return np.zeros(0, dtype=np.int64)
    return np.round(np.concatenate(chunks) * NS).astype(np.int64)


def generate_arrivals(topology: Topology, traffic: TrafficSource, T: float,
                      rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per source node: (creation times ns sorted, destination ids).

    Applications are visited in (source, destination) order so the draw
    sequence, and hence the result, depends only on the seed.
    """
    per_node = [([], []) for _ in range(topology.n)]
    for s, d in topology.directed_pairs():
        times = app_arrivals(rng, traffic, T)
        per_node[s][0].append(times)
        per_node[s][1].append(np.full(len(times), d, dtype=np.int64))
    out = []
    for times, dests in per_node:
        if times:
            t = np.concatenate(times)
            dd = np.concatenate(dests)
            order = np.lexsort((dd, t))
            out.append((t[order], dd[order]))
        else:
            out.append((np.zeros(0, np.int64), np.zeros(0, np.int64)))
    return out
