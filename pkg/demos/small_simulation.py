"""Simulate all five MACs on a 3x3 grid with short packets at 54 Mbit/s.

Short runs keep this under a minute; numbers are from this package's
simplified channel, so compare protocols with each other, not with
published curves.
Run: python3 demos/small_simulation.py [seconds]
"""
import sys
import time

from rcfd.sim.runner import run
from rcfd.sim.topology import build_grid
from rcfd.sim.traffic import TrafficSource

T = float(sys.argv[1]) if len(sys.argv) > 1 else 8.0
topo = build_grid(3)
traffic = TrafficSource(payload=200)
print(f"3x3 grid, {len(topo.directed_pairs())} applications, T = {T:g} s")
print(f"{'protocol':12s}{'gamma':>8s}{'delay ms':>10s}{'jain':>8s}{'collided':>10s}{'wall s':>8s}")
for proto in ("rcfd", "back2f", "fdmac", "dcf", "dcf-rtscts"):
    t0 = time.perf_counter()
    m = run(topo, proto, traffic, T=T, seed=1, payload=200, rate=54, transient=min(5.0, T / 2))
    print(f"{proto:12s}{m.gamma:8.3f}{m.delta * 1e3:10.1f}{m.jain:8.3f}{m.collided:10d}"
          f"{time.perf_counter() - t0:8.1f}")
