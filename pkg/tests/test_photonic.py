import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsimkit._validation import UnitarityError
from qsimkit.photonic import (
    BsNoise,
    Interferometer,
    apply_beamsplitter,
    apply_loss,
    apply_phase,
    bs_distribution,
    bs_probability,
    bs_sample,
    detect,
    fock_init,
    klm_cnot_demo,
    klm_cnot_state,
    occupation_string,
    permanent,
    permanent_naive,
)
from qsimkit.photonic.klm import decode
from qsimkit.photonic.permanent import laplace_minors

from oracles import haar_unitary, naive_permanent, ref_bs_probability, total_variation


@pytest.mark.parametrize("n", range(0, 8))
def test_permanent_matches_naive(n):
    rng = np.random.default_rng(n)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    want = naive_permanent(a)
    got = permanent(a)
    assert abs(got - want) <= 1e-10 * max(abs(want), 1.0)
    assert abs(permanent_naive(a) - want) <= 1e-10 * max(abs(want), 1.0)


def test_permanent_known_values():
    assert permanent(np.ones((4, 4))) == pytest.approx(24)
    assert permanent(np.eye(5)) == pytest.approx(1)
    with pytest.raises(ValueError):
        permanent(np.ones((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_laplace_minors(k, seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(k - 1, k)) + 1j * rng.normal(size=(k - 1, k))
    got = laplace_minors(b)
    for col in range(k):
        want = naive_permanent(np.delete(b, col, axis=1))
        assert abs(got[col] - want) <= 1e-10 * max(abs(want), 1.0)


def test_bs_probability_matches_oracle_and_normalises():
    u = haar_unitary(4, np.random.default_rng(1))
    occ_in = (1, 0, 2, 0)
    dist = bs_distribution(u, occ_in)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
    for occ_out, p in dist.items():
        assert p == pytest.approx(ref_bs_probability(u, occ_in, occ_out), abs=1e-12)


def test_hong_ou_mandel_dip():
    bs = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert bs_probability(bs, (1, 1), (1, 1)) == pytest.approx(0.0, abs=1e-15)
    assert bs_probability(bs, (1, 1), (2, 0)) == pytest.approx(0.5)


def test_identity_interferometer_samples():
    out = bs_sample(np.eye(4), (1, 1, 0, 0), 20, seed=2)
    assert all(occupation_string(r) == "1100" for r in out)


def test_sampler_matches_exact_distribution():
    u = haar_unitary(4, np.random.default_rng(5))
    for occ in [(1, 1, 1, 0), (2, 1, 0, 0), (0, 0, 0, 3)]:
        s = bs_sample(u, occ, 20000, seed=9)
        keys, cnt = np.unique(s, axis=0, return_counts=True)
        emp = {tuple(k): c / len(s) for k, c in zip(keys.tolist(), cnt)}
        assert total_variation(emp, bs_distribution(u, occ)) < 0.03


def test_sampler_is_deterministic_per_index():
    u = haar_unitary(5, np.random.default_rng(0))
    a = bs_sample(u, (1, 1, 1, 0, 0), 300, seed=4)
    b = bs_sample(u, (1, 1, 1, 0, 0), 300, seed=4)
    assert np.array_equal(a, b)
    assert np.array_equal(bs_sample(u, (1, 1, 1, 0, 0), 100, seed=4), a[:100])


def test_distinguishable_photons_follow_single_photon_statistics():
    bs = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    s = bs_sample(bs, (1, 1), 20000, noise=BsNoise(eta=0.0), seed=1)
    coinc = np.mean((s == [1, 1]).all(axis=1))
    assert abs(coinc - 0.5) < 0.02


def test_loss_and_dark_counts():
    s = bs_sample(np.eye(3), (1, 1, 1), 20000, noise=BsNoise(loss=0.25), seed=1)
    assert abs(s.sum(axis=1).mean() - 2.25) < 0.03
    s = bs_sample(np.eye(3), (0, 0, 0), 20000, noise=BsNoise(dark_prob=0.1), seed=1)
    assert s.max() <= 1 and abs(s.mean() - 0.1) < 0.01


def test_sampler_guards():
    with pytest.raises(UnitarityError):
        bs_sample(np.diag([1, 1.1]), (1, 0), 1)
    with pytest.raises(ValueError):
        bs_sample(np.eye(2), (1, 0, 0), 1)
    with pytest.raises(ValueError):
        bs_sample(np.eye(2), (15, 10), 1)


def test_interferometer_json_round_trip():
    inter = Interferometer.haar(3, np.random.default_rng(1))
    again = Interferometer.from_dict(inter.to_dict())
    assert np.array_equal(again.U, inter.U)
    assert np.allclose(Interferometer.fourier(3).U @ Interferometer.fourier(3).U.conj().T, np.eye(3))


# ---------------------------------------------------------------- Fock space

@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=3, max_size=3), st.floats(-3, 3), st.floats(-3, 3))
def test_beamsplitter_preserves_norm_and_number(occ, theta, phi):
    state = fock_init(occ, ceiling=9)
    out = apply_phase(apply_beamsplitter(state, 0, 2, theta, phi), 1, 0.7)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    assert out.photon_numbers() <= {sum(occ)}


def test_fock_beamsplitter_agrees_with_permanents():
    theta, phi = 0.4, 1.1
    state = apply_beamsplitter(fock_init((2, 1), ceiling=3), 0, 1, theta, phi)
    c, s, e = math.cos(theta), math.sin(theta), np.exp(1j * phi)
    u = np.array([[c, -np.conj(e) * s], [e * s, c]])
    for out_occ, p in state.probabilities().items():
        assert p == pytest.approx(ref_bs_probability(u, (2, 1), out_occ), abs=1e-12)


def test_detection_and_loss():
    rng = np.random.default_rng(0)
    n, post = detect(fock_init((2, 0)), 0, 0.0, rng)
    assert n == 2 and post.amplitude((0, 0)) == pytest.approx(1)
    kept = [sum(next(iter(apply_loss(fock_init((3,), 3), 0, 0.5, rng).amplitudes))) for _ in range(4000)]
    assert abs(np.mean(kept) - 1.5) < 0.06


def test_klm_gate_is_exact_cnot_with_one_ninth_success():
    for c, t in itertools.product((0, 1), repeat=2):
        probs = klm_cnot_state(c, t).probabilities()
        ok = {decode(k): p for k, p in probs.items() if decode(k) is not None}
        assert sum(ok.values()) == pytest.approx(1 / 9, abs=1e-12)
        assert set(ok) == {(c, t ^ c)}


def test_klm_demo_statistics():
    res = klm_cnot_demo(90000, seed=0)
    assert res.is_cnot()
    assert abs(res.success_rate - 1 / 9) < 4 * res.sigma
