"""Saturation-throughput models."""
from .back2f_chain import (Back2fStationary, MarkovState, apply_transition, back2f_stationary,
                           marginal_kernel, p_a_given_kbl, p_i_given_akbl, p_j_given_i)
from .bianchi import BianchiSolution, bianchi_fixed_point, tau_of_p
from .throughput import (PROTOCOLS, PtrPs, ThroughputReport, eta_back2f, eta_dcf, eta_fd,
                         eta_protocol, eta_rcfd, fd_success, ptr_ps)

__all__ = [
    "Back2fStationary", "MarkovState", "apply_transition", "back2f_stationary", "marginal_kernel",
    "p_a_given_kbl", "p_i_given_akbl", "p_j_given_i", "BianchiSolution", "bianchi_fixed_point",
    "tau_of_p", "PROTOCOLS", "PtrPs", "ThroughputReport", "eta_back2f", "eta_dcf", "eta_fd",
    "eta_protocol", "eta_rcfd", "fd_success", "ptr_ps",
]
