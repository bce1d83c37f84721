import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsimkit import Circuit, CountsHistogram, NoiseModel, probabilities, sample
from qsimkit.core import (
    CapacityError,
    StateVector,
    apply_matrix,
    circuit_unitary,
    expectation_pauli,
    init_state,
    shot_rng,
)
from qsimkit.gates import gate_matrix, u_params

from helpers import N_PARAMS, random_circuit
from oracles import dense_probabilities, dense_unitary, pauli_string, ref_gate


@pytest.mark.parametrize("kind", sorted(N_PARAMS))
def test_gate_matrices_match_generators(kind):
    rng = np.random.default_rng(7)
    for _ in range(5):
        params = rng.uniform(-7, 7, N_PARAMS[kind])
        assert np.abs(gate_matrix(kind, params) - ref_gate(kind, params)).max() < 1e-12


def test_u_pi_0_pi_is_x_exactly():
    assert np.array_equal(gate_matrix("U", (math.pi, 0, math.pi)).round(15), np.array([[0, 1], [1, 0]]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_u_params_recovers_gate(seed):
    rng = np.random.default_rng(seed)
    m = gate_matrix("U", rng.uniform(-4, 4, 3)) * np.exp(1j * rng.uniform(0, 6))
    back = gate_matrix("U", u_params(m))
    phase = np.vdot(back.ravel(), m.ravel())
    phase /= abs(phase)
    assert np.abs(back * phase - m).max() < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 30), st.integers(0, 2**31 - 1))
def test_probabilities_match_dense_oracle(n, depth, seed):
    circ = random_circuit(np.random.default_rng(seed), n, depth)
    assert np.abs(probabilities(circ) - dense_probabilities(circ)).max() < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 20), st.integers(0, 2**31 - 1))
def test_unitary_matches_oracle_and_preserves_norm(n, depth, seed):
    circ = random_circuit(np.random.default_rng(seed), n, depth)
    u = circuit_unitary(circ)
    assert np.abs(u - dense_unitary(circ)).max() < 1e-9
    assert np.abs(u.conj().T @ u - np.eye(2**n)).max() < 1e-10


def test_little_endian_convention():
    # X on qubit 1 of 3 gives basis index 2, bitstring "010"
    circ = Circuit(3, 3).x(1).measure_all()
    assert probabilities(circ)[2] == pytest.approx(1.0)
    assert sample(circ, 10).counts == {"010": 10}


def test_two_qubit_operand_order():
    # CX with control 1, target 0 on |q1=1> flips q0
    circ = Circuit(2).x(1).cx(1, 0)
    assert probabilities(circ)[3] == pytest.approx(1.0)


@pytest.mark.parametrize("label", ["Z", "XI", "IZ", "YXZ", "ZZY"])
def test_expectation_pauli(label):
    rng = np.random.default_rng(len(label))
    circ = random_circuit(rng, len(label), 12)
    psi = dense_unitary(circ)[:, 0]
    want = np.vdot(psi, pauli_string(label) @ psi).real
    state = StateVector(psi)
    assert expectation_pauli(state, label) == pytest.approx(want, abs=1e-10)


def test_apply_matrix_rejects_bad_targets():
    with pytest.raises(ValueError):
        apply_matrix(init_state(2), np.eye(2), (2,))


def test_capacity_guard():
    with pytest.raises(CapacityError):
        init_state(40)


def test_shot_rng_is_keyed():
    a = shot_rng(5, 3).random(4)
    assert np.array_equal(a, shot_rng(5, 3).random(4))
    assert not np.array_equal(a, shot_rng(5, 4).random(4))


def test_sample_counts_and_determinism():
    circ = Circuit(2, 2).h(0).cx(0, 1).measure_all()
    h1 = sample(circ, 1000, seed=7)
    assert h1.shots == 1000 and sum(h1.counts.values()) == 1000
    assert set(h1.counts) <= {"00", "11"}
    assert h1 == sample(circ, 1000, seed=7)


def test_noisy_sampling_independent_of_threads():
    circ = Circuit(3, 3).h(0).cx(0, 1).cx(1, 2).rx(0.3, 2).measure_all()
    noise = NoiseModel.depolarizing(0.02, 0.05)
    ref = sample(circ, 3000, noise=noise, seed=11, threads=1)
    for t in (2, 3):
        assert sample(circ, 3000, noise=noise, seed=11, threads=t) == ref


def test_mid_circuit_measurement_and_reset():
    circ = Circuit(1, 2).h(0).measure(0, 0).reset(0).measure(0, 1)
    counts = sample(circ, 2000, seed=3).counts
    # second bit (clbit 1, leftmost) is always 0 after reset
    assert set(counts) <= {"00", "01"}
    assert abs(counts.get("01", 0) / 2000 - 0.5) < 0.05


def test_measurement_collapses():
    circ = Circuit(2, 2).h(0).measure(0, 0).cx(0, 1).measure(1, 1)
    counts = sample(circ, 500, seed=1).counts
    assert set(counts) <= {"00", "11"}


def test_histogram_json_round_trip():
    h = CountsHistogram({"01": 3, "10": 7}, 10, 42)
    assert CountsHistogram.from_json(h.to_json()) == h
    with pytest.raises(ValueError):
        CountsHistogram({"0": 3}, 4)


def test_sample_rejects_zero_shots():
    with pytest.raises(ValueError):
        sample(Circuit(1, 1).measure_all(), 0)
