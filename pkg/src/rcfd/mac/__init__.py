"""Baseline MAC state machines."""
from .back2f import Back2fRoundState, back2f_step, simulate_rounds
from .dcf import BackoffState, DcfState, dcf_step
from .fdmac import FdPairingRule, fdmac_on_rts

__all__ = ["Back2fRoundState", "back2f_step", "simulate_rounds", "BackoffState", "DcfState",
           "dcf_step", "FdPairingRule", "fdmac_on_rts"]
