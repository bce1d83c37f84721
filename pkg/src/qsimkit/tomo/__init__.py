"""State, process and detector tomography; effective-Hamiltonian extraction."""
from .designs import (
    TomoDataset,
    measurement_effect,
    prep_circuit,
    prep_state,
    qdt_design,
    qpt_design,
    qst_design,
    setting_rotation,
    simulate_qdt,
    simulate_qpt,
    simulate_qst,
)
from .mle import (
    DetectorTomography,
    MleResult,
    NotInformationallyComplete,
    ProcessTomography,
    StateTomography,
    linear_inversion,
    partial_trace_out,
    reconstruct_mle,
)
from .qht import QhtResult, entanglement_fidelity, fidelity_to_target, qht_extract

__all__ = [
    "DetectorTomography",
    "MleResult",
    "NotInformationallyComplete",
    "ProcessTomography",
    "QhtResult",
    "StateTomography",
    "TomoDataset",
    "entanglement_fidelity",
    "fidelity_to_target",
    "linear_inversion",
    "measurement_effect",
    "partial_trace_out",
    "prep_circuit",
    "prep_state",
    "qdt_design",
    "qht_extract",
    "qpt_design",
    "qst_design",
    "reconstruct_mle",
    "setting_rotation",
    "simulate_qdt",
    "simulate_qpt",
    "simulate_qst",
]
