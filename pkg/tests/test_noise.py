import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsimkit import Circuit, NoiseModel, sample
from qsimkit.noise import (
    AngleError,
    KrausSet,
    NoiseSchemaError,
    amplitude_damping,
    build_channel,
    dephasing_time,
    depolarizing1,
    depolarizing2,
    pauli_channel,
    phase_damping,
    readout_flip,
    t1t2_channel,
)

from oracles import evolve_density, ref_amplitude_damping, ref_depolarizing1, ref_depolarizing2, total_variation

unit = st.floats(0, 1, allow_nan=False)


def _complete(ch: KrausSet) -> float:
    return np.abs(sum(k.conj().T @ k for k in ch.operators) - np.eye(ch.dim)).max()


@settings(max_examples=60, deadline=None)
@given(unit, unit, unit)
def test_channels_are_trace_preserving(a, b, p):
    for ch in (amplitude_damping(a), phase_damping(b), depolarizing1(p), depolarizing2(p),
               readout_flip(p), amplitude_damping(a).compose(phase_damping(b))):
        assert _complete(ch) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 100), st.floats(0.01, 1), st.floats(0, 300))
def test_t1t2_channel_decay_rates(t1, frac, t):
    t2 = 2 * t1 * frac
    ch = t1t2_channel(t1, t2, t)
    rho1 = np.diag([0, 1]).astype(complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    out1 = sum(k @ rho1 @ k.conj().T for k in ch.operators)
    outp = sum(k @ plus @ k.conj().T for k in ch.operators)
    assert out1[1, 1].real == pytest.approx(math.exp(-t / t1), abs=1e-12)
    # coherence decays with T2: exp(-t/(2 T1)) * exp(-t/(2 Tphi)) = exp(-t/T2)
    assert 2 * abs(outp[0, 1]) == pytest.approx(math.exp(-t / t2), abs=1e-10)


def test_dephasing_time():
    assert dephasing_time(1.0, 1.0) == pytest.approx(1.0)
    assert math.isinf(dephasing_time(1.0, 2.0))
    with pytest.raises(ValueError):
        dephasing_time(1.0, 2.5)


def test_superoperator_matches_kraus_action():
    rng = np.random.default_rng(0)
    ch = amplitude_damping(0.3).compose(depolarizing1(0.2))
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    direct = sum(k @ rho @ k.conj().T for k in ch.operators)
    assert np.abs((ch.superoperator() @ rho.ravel()).reshape(2, 2) - direct).max() < 1e-12


def test_depolarizing_shrinks_bloch_vector():
    # E(rho) = (1 - 4p/3) rho + (4p/3) I/2
    p = 0.3
    rho = np.array([[1, 0], [0, 0]], dtype=complex)
    out = sum(k @ rho @ k.conj().T for k in depolarizing1(p).operators)
    assert out[0, 0].real - out[1, 1].real == pytest.approx(1 - 4 * p / 3)


def test_kraus_set_rejects_incomplete():
    with pytest.raises(ValueError):
        KrausSet((np.eye(2) * 0.9,))
    with pytest.raises(ValueError):
        pauli_channel(0.5, 0.4, 0.3)


def test_build_channel_forms():
    a = build_channel({"type": "amplitude", "a": 0.2})
    b = build_channel(("amplitude", 0.2))
    assert np.allclose(a.superoperator(), b.superoperator())
    with pytest.raises(ValueError):
        build_channel({"type": "amplitude", "b": 0.2})
    with pytest.raises(ValueError):
        build_channel({"type": "nope"})


def _trajectory_distribution(circ, noise, shots, seed):
    counts = sample(circ.copy().measure_all(), shots, noise=noise, seed=seed).counts
    return {int(k, 2): v / shots for k, v in counts.items()}


def _exact_distribution(circ, channels):
    rho = evolve_density(circ, channels)
    return {i: float(rho[i, i].real) for i in range(rho.shape[0])}


@pytest.mark.parametrize("seed", [0, 1])
def test_trajectories_match_density_evolution(seed):
    rng = np.random.default_rng(seed)
    circ = Circuit(2, 2).u(*rng.uniform(0, 3, 3), 0).cx(0, 1).rx(rng.uniform(0, 3), 1).cx(1, 0).u(1, 2, 3, 1)
    noise = NoiseModel.from_dict({"gates": {
        "u": {"channel": {"type": "amplitude", "a": 0.3}},
        "rx": {"channel": {"type": "depolarizing1", "p": 0.1}},
        "cx": {"channel": {"type": "depolarizing2", "p": 0.1}},
    }})
    exact = _exact_distribution(circ, {"U": ref_amplitude_damping(0.3), "RX": ref_depolarizing1(0.1),
                                       "CX": ref_depolarizing2(0.1)})
    emp = _trajectory_distribution(circ, noise, 20000, seed)
    assert total_variation(emp, exact) < 0.02


def test_excited_state_decay_under_relaxation():
    t1, t2 = 50.0, 30.0
    shots = 20000
    for t in (0.0, 25.0, 50.0):
        noise = NoiseModel.from_dict({"qubits": {"0": {"T1": t1, "T2": t2}}, "durations": {"rz": t}})
        circ = Circuit(1, 1).x(0).rz(0.0, 0).measure(0, 0)
        f = sample(circ, shots, noise=noise, seed=3).counts.get("1", 0) / shots
        want = math.exp(-t / t1)
        sigma = math.sqrt(max(want * (1 - want), 1e-12) / shots)
        assert abs(f - want) <= 4 * sigma + 1e-12


def test_readout_and_prep_flips():
    shots = 20000
    noise = NoiseModel.from_dict({"spam": {"readout": 0.1}})
    f = sample(Circuit(1, 1).measure(0, 0), shots, noise=noise, seed=1).counts.get("1", 0) / shots
    assert abs(f - 0.1) < 0.01
    noise = NoiseModel.from_dict({"spam": {"prep": {"0": 0.2}}})
    f = sample(Circuit(2, 2).measure_all(), shots, noise=noise, seed=1).frequencies()
    assert abs(f.get("01", 0) - 0.2) < 0.01 and "10" not in f


def test_coherent_over_rotation():
    noise = NoiseModel.from_dict({"gates": {"rx": {"coherent": [{"axis": "x", "angle": math.pi}]}}})
    # rx(0) followed by a coherent pi rotation acts as X
    assert sample(Circuit(1, 1).rx(0.0, 0).measure(0, 0), 100, noise=noise).counts == {"1": 100}


def test_systematic_angle_error():
    noise = NoiseModel.from_dict({"gates": {"rx": {"angle_errors": {"theta_c": math.pi}}}})
    assert sample(Circuit(1, 1).rx(0.0, 0).measure(0, 0), 50, noise=noise).counts == {"1": 50}


def test_non_markov_error_is_shared_within_a_shot():
    # two rx(0) gates: a shared offset d rotates by 2d, fresh offsets by d1 + d2
    sigma, shots = 0.5, 20000
    circ = Circuit(1, 1).rx(0.0, 0).rx(0.0, 0).measure(0, 0)
    nm = NoiseModel.from_dict({"gates": {"rx": {"angle_errors": {"sigma_nm": sigma}}}})
    m = NoiseModel.from_dict({"gates": {"rx": {"angle_errors": {"sigma_m": sigma}}}})
    # E[sin^2(x/2)] = (1 - exp(-var/2)) / 2 for x ~ N(0, var)
    for model, var in ((nm, 4 * sigma**2), (m, 2 * sigma**2)):
        want = (1 - math.exp(-var / 2)) / 2
        f = sample(circ, shots, noise=model, seed=2).counts.get("1", 0) / shots
        assert abs(f - want) < 4 * math.sqrt(want * (1 - want) / shots)


def test_angle_error_validation():
    with pytest.raises(ValueError):
        AngleError(sigma_m=-1)
    with pytest.raises(NoiseSchemaError):
        NoiseModel.from_dict({"gates": {"cx": {"angle_errors": {"theta_c": 0.1}}}})


@pytest.mark.parametrize("cfg", [
    {"gates": {"rx": {"channel": {"type": "amplitude", "a": 1.5}}}},
    {"gates": {"rx": {"channel": {"type": "depolarizing2", "p": 0.1}}}},
    {"gates": {"rx": {"bogus": 1}}},
    {"qubits": {"0": {"T1": 1.0, "T2": 3.0}}},
    {"qubits": {"0": {"T1": -1.0, "T2": 1.0}}},
    {"spam": {"readout": 2.0}},
    {"gates": {"zz": {}}},
    {"unknown": {}},
])
def test_schema_rejects_bad_configs(cfg):
    with pytest.raises(NoiseSchemaError):
        NoiseModel.from_dict(cfg)


def test_from_json_errors(tmp_path):
    p = tmp_path / "n.json"
    p.write_text("{not json")
    with pytest.raises(NoiseSchemaError):
        NoiseModel.from_json(p)
    p.write_text(json.dumps({"gates": {"cx": {"channel": [{"type": "depolarizing2", "p": 0.01}]}}}))
    assert not NoiseModel.from_json(p).is_trivial()
    assert NoiseModel().is_trivial()
