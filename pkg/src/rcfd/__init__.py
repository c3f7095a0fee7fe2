"""Simulator and analytic models for RCFD and baseline MAC protocols."""
from .core import (ContentionObservation, ContentionOutcome, NodeRole, Slot, SubcarrierMap,
                   TxDecision, TxKind, decide_transmission, default_mapping, elect_pt, elect_rr,
                   resolve_contention, round1_pick, select_cts_recipient)
from .errors import CapacityExceeded, ConfigError, NonConvergence, RcfdError
from .timings import PhyTimings, t_data

__version__ = "0.1.0"

__all__ = [
    "ContentionObservation", "ContentionOutcome", "NodeRole", "Slot", "SubcarrierMap", "TxDecision",
    "TxKind", "decide_transmission", "default_mapping", "elect_pt", "elect_rr", "resolve_contention",
    "round1_pick", "select_cts_recipient", "CapacityExceeded", "ConfigError", "NonConvergence",
    "RcfdError", "PhyTimings", "t_data",
]
