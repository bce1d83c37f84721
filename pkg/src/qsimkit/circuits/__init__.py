"""Circuit generators: textbook algorithms, QUBO/QAOA and product formulas."""
from .algorithms import bernstein_vazirani, ghz, grover, grover_success_probability, swap_test
from .qaoa import (
    FixedAngleQAOA,
    FixedAngles,
    qaoa_circuit,
    qaoa_energy,
    qaoa_probabilities,
    success_probability,
    train_fixed_angles,
    uniform_baseline,
)
from .qubo import (
    OdeEncoder,
    QuboProblem,
    binary_to_spin,
    brute_force,
    maxcut_problem,
    qubo_from_linear_system,
    qubo_from_ode,
    random_maxcut,
    refine,
)
from .synthesis import append_two_qubit_unitary, controlled_u, kak_decompose, multi_controlled_u
from .trotter import (
    PauliHamiltonian,
    append_pauli_exponential,
    group_commuting,
    suzuki_coefficient,
    trotter_circuit,
    trotter_error,
)

__all__ = [
    "FixedAngleQAOA",
    "FixedAngles",
    "OdeEncoder",
    "PauliHamiltonian",
    "QuboProblem",
    "append_pauli_exponential",
    "append_two_qubit_unitary",
    "bernstein_vazirani",
    "binary_to_spin",
    "brute_force",
    "controlled_u",
    "ghz",
    "group_commuting",
    "grover",
    "grover_success_probability",
    "kak_decompose",
    "maxcut_problem",
    "multi_controlled_u",
    "qaoa_circuit",
    "qaoa_energy",
    "qaoa_probabilities",
    "qubo_from_linear_system",
    "qubo_from_ode",
    "random_maxcut",
    "refine",
    "success_probability",
    "suzuki_coefficient",
    "swap_test",
    "train_fixed_angles",
    "trotter_circuit",
    "trotter_error",
    "uniform_baseline",
]
