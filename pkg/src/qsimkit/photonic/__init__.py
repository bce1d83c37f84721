"""Linear optics: Fock-space circuits, permanents and boson sampling."""
from .fock import FockState, apply_beamsplitter, apply_loss, apply_phase, beamsplitter_unitary, detect, fock_init
from .klm import KlmResult, klm_cnot_demo, klm_cnot_state
from .permanent import permanent, permanent_naive
from .sampler import BsNoise, Interferometer, bs_distribution, bs_probability, bs_sample, occupation_string

__all__ = [
    "BsNoise",
    "FockState",
    "Interferometer",
    "KlmResult",
    "apply_beamsplitter",
    "apply_loss",
    "apply_phase",
    "beamsplitter_unitary",
    "bs_distribution",
    "bs_probability",
    "bs_sample",
    "detect",
    "fock_init",
    "klm_cnot_demo",
    "klm_cnot_state",
    "occupation_string",
    "permanent",
    "permanent_naive",
]
