"""Event-driven network simulator."""
from .metrics import SimMetrics, jain_index
from .runner import PROTOCOLS, SimConfig, Simulation, run
from .topology import Topology, build_grid, build_random, from_positions
from .traffic import TrafficSource, generate_arrivals, offered_traffic

__all__ = ["SimMetrics", "jain_index", "PROTOCOLS", "SimConfig", "Simulation", "run", "Topology",
           "build_grid", "build_random", "from_positions", "TrafficSource", "generate_arrivals",
           "offered_traffic"]
