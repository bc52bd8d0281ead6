"""Stochastic-geometry analytics for full-duplex MIMO small cells with a Monte Carlo cross-check."""

from .hop1 import (fd_density_threshold, p_suc_hop1, p_suc_hop1_bounds, p_suc_hop1_pzf_m, p_suc_hop1_pzf_si,
                   prefer_si_cancellation, throughput_gain_min)
from .hop2 import max_cell_radius, p_suc_hop2, p_suc_hop2_bounds, p_suc_joint_lower, prefer_internode_cancellation
from .kernels import KernelContext, psi, upsilon, upsilon_pzf
from .network import (AntennaConfig, Combiner, InvalidParameter, NetworkParams, ReceiverStrategy, default_params,
                      validate)
from .si import GammaSiFit, SiChannel, gamma_fit

__version__ = "0.1.0"

__all__ = [
    "AntennaConfig", "Combiner", "GammaSiFit", "InvalidParameter", "KernelContext", "NetworkParams",
    "ReceiverStrategy", "SiChannel", "fd_density_threshold", "gamma_fit", "max_cell_radius", "p_suc_hop1",
    "p_suc_hop1_bounds", "p_suc_hop1_pzf_m", "p_suc_hop1_pzf_si", "p_suc_hop2", "p_suc_hop2_bounds",
    "p_suc_joint_lower", "default_params", "prefer_internode_cancellation", "prefer_si_cancellation", "psi",
    "throughput_gain_min", "upsilon", "upsilon_pzf", "validate",
]
