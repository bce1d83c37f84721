"""Figures of merit: distribution fidelity, randomized benchmarking, quantum volume."""
from .metrics import fidelity, h_est, heavy_set
from .qv import QvRecord, QvResult, fully_depolarizing, qv_circuit, qv_experiment
from .rb import RBFitter, RbResult, clifford_group, depolarizing_for_gamma, rb_experiment, rb_sequence

__all__ = [
    "QvRecord",
    "QvResult",
    "RBFitter",
    "RbResult",
    "clifford_group",
    "depolarizing_for_gamma",
    "fidelity",
    "fully_depolarizing",
    "h_est",
    "heavy_set",
    "qv_circuit",
    "qv_experiment",
    "rb_experiment",
    "rb_sequence",
]
