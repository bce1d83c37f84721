"""qsimkit: state-vector and linear-optics emulation with noise, benchmarks and tomography."""
from .core import CountsHistogram, StateVector, probabilities, sample
from .noise import NoiseModel
from .qasm import Circuit, Instruction, emit_qasm, load_qasm, parse_qasm

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "CountsHistogram",
    "Instruction",
    "NoiseModel",
    "StateVector",
    "emit_qasm",
    "load_qasm",
    "parse_qasm",
    "probabilities",
    "sample",
]
