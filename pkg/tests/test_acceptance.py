"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with pytest (``pytest tests/test_acceptance.py -s -v``) or directly as a
script.  Tolerances are the contractual ones; nothing here is loosened.
"""
import math
import statistics
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent))

from qsimkit import Circuit, NoiseModel, probabilities, sample  # noqa: E402
from qsimkit.bench import depolarizing_for_gamma, fully_depolarizing, h_est, qv_experiment, rb_experiment  # noqa: E402
from qsimkit.circuits import (  # noqa: E402
    PauliHamiltonian,
    bernstein_vazirani,
    brute_force,
    grover,
    grover_success_probability,
    qubo_from_linear_system,
    qubo_from_ode,
    random_maxcut,
    refine,
    success_probability,
    train_fixed_angles,
    trotter_error,
    uniform_baseline,
)
from qsimkit.core import circuit_unitary  # noqa: E402
from qsimkit.noise import dephasing_time  # noqa: E402
from qsimkit.photonic import bs_distribution, bs_probability, bs_sample, klm_cnot_demo, permanent  # noqa: E402
from qsimkit.tomo import (  # noqa: E402
    entanglement_fidelity,
    fidelity_to_target,
    partial_trace_out,
    qht_extract,
    reconstruct_mle,
    simulate_qpt,
    simulate_qst,
)

from helpers import random_circuit  # noqa: E402
from oracles import (  # noqa: E402
    X,
    dense_probabilities,
    evolve_density,
    haar_unitary,
    naive_permanent,
    ref_amplitude_damping,
    ref_depolarizing1,
    ref_depolarizing2,
    ref_h_est,
    total_variation,
)

ONE_Q = ("U", "R", "RX", "RY", "RZ")
TWO_Q = ("CX", "RXX", "RZZ")


def _bits(i, n):
    return format(i, f"0{n}b")


def _freqs(counts, shots):
    return {k: v / shots for k, v in counts.items()}


# ---------------------------------------------------------------- 1

def check_emulator_oracle():
    rng = np.random.default_rng(2024)
    circuits = [random_circuit(rng, int(rng.integers(1, 6)), int(rng.integers(1, 31))) for _ in range(100)]
    t0 = time.perf_counter()
    got = [probabilities(c) for c in circuits]
    elapsed = time.perf_counter() - t0
    err = max(np.abs(g - dense_probabilities(c)).max() for g, c in zip(got, circuits))
    ok = err < 1e-9 and elapsed < 10
    return ok, f"max |dp| = {err:.2e}, {elapsed:.2f} s"


# ---------------------------------------------------------------- 2

def _noise_for(one, two):
    gates = {k.lower(): {"channel": one} for k in ONE_Q}
    if two is not None:
        gates.update({k.lower(): {"channel": two} for k in TWO_Q})
    return NoiseModel.from_dict({"gates": gates})


def check_trajectory_channels():
    shots = 10**5
    cases = [
        ("amplitude", {"type": "amplitude", "a": 0.3}, ref_amplitude_damping(0.3),
         {"type": "depolarizing2", "p": 0.1}, ref_depolarizing2(0.1)),
        ("depolarizing", {"type": "depolarizing1", "p": 0.1}, ref_depolarizing1(0.1),
         {"type": "depolarizing2", "p": 0.1}, ref_depolarizing2(0.1)),
    ]
    rng = np.random.default_rng(7)
    worst = 0.0
    t0 = time.perf_counter()
    for label, one, one_ref, two, two_ref in cases:
        for n in (1, 2):
            for rep in range(2):
                circ = random_circuit(rng, n, 6, measure=True)
                counts = sample(circ, shots, noise=_noise_for(one, two), seed=rep).counts
                chans = {k: one_ref for k in ONE_Q}
                chans.update({k: two_ref for k in TWO_Q})
                rho = evolve_density(circ, chans)
                exact = {_bits(i, n): float(p) for i, p in enumerate(np.diag(rho).real)}
                worst = max(worst, total_variation(_freqs(counts, shots), exact))
    elapsed = time.perf_counter() - t0
    return worst < 0.01 and elapsed < 60, f"worst TV = {worst:.4f}, {elapsed:.1f} s"


# ---------------------------------------------------------------- 3

def check_relaxation():
    t1, t2, shots = 50.0, 30.0, 10**5
    t_phi = dephasing_time(t1, t2)
    ok = True
    worst = 0.0
    for t in (0.0, t1 / 2, t1, 2 * t1):
        noise = NoiseModel.from_dict({"qubits": {"0": {"T1": t1, "T2": t2}}, "durations": {"rz": t}})
        # population: |1>, idle, measure
        circ = Circuit(1, 1).x(0).rz(0.0, 0).measure(0, 0)
        f = sample(circ, shots, noise=noise, seed=11).counts.get("1", 0) / shots
        want = math.exp(-t / t1)
        sigma = math.sqrt(want * (1 - want) / shots)
        ok &= abs(f - want) <= 3 * sigma + 1e-12
        worst = max(worst, abs(f - want) / sigma if sigma else 0.0)
        # Ramsey: coherence C = exp(-t/2T1) * sqrt(exp(-t/Tphi)); P(0) = (1 + C) / 2
        circ = Circuit(1, 1).h(0).rz(0.0, 0).h(0).measure(0, 0)
        f0 = sample(circ, shots, noise=noise, seed=12).counts.get("0", 0) / shots
        decay = ((2 * f0 - 1) * math.exp(t / (2 * t1))) ** 2
        want = math.exp(-t / t_phi)
        c = math.exp(-t / (2 * t1)) * math.sqrt(want)
        p0 = (1 + c) / 2
        sigma = 4 * c * math.exp(t / t1) * math.sqrt(p0 * (1 - p0) / shots)
        ok &= abs(decay - want) <= 3 * sigma + 1e-12
        worst = max(worst, abs(decay - want) / sigma if sigma else 0.0)
    return ok, f"worst deviation {worst:.2f} sigma (Tphi = {t_phi:.3f})"


# ---------------------------------------------------------------- 4

def check_grover():
    marked, shots = 5, 10**5
    t0 = time.perf_counter()
    counts = sample(grover(3, marked, 2), shots, seed=1).counts
    elapsed = time.perf_counter() - t0
    f = counts.get(_bits(marked, 3), 0) / shots
    analytic = math.sin(5 * math.asin(1 / math.sqrt(8))) ** 2
    ok = abs(f - 0.9453) <= 0.005 and abs(grover_success_probability(3, 2) - analytic) < 1e-12 and elapsed < 5
    return ok, f"marked frequency {f:.4f} (analytic {analytic:.4f}), {elapsed:.2f} s"


# ---------------------------------------------------------------- 5

def _chi2_pvalue(counts, probs, total):
    keys = sorted(probs, key=probs.get)
    obs, exp = [], []
    acc_o = acc_e = 0.0
    for k in keys:  # merge the smallest bins until each expects >= 5
        acc_o += counts.get(k, 0)
        acc_e += probs[k] * total
        if acc_e >= 5:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e and exp:
        obs[-1] += acc_o
        exp[-1] += acc_e
    exp = np.array(exp) * total / sum(exp)
    return stats.chisquare(obs, exp).pvalue


def check_boson_sampler():
    rng = np.random.default_rng(5)
    perm_err = 0.0
    for n in range(1, 8):
        for _ in range(3):
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            ref = naive_permanent(a)
            perm_err = max(perm_err, abs(permanent(a) - ref) / abs(ref))
    u = haar_unitary(5, rng)
    samples = 10**5
    inputs = [occ for occ in np.ndindex(*(4,) * 5) if sum(occ) == 3]
    worst_tv, worst_p, worst_oracle = 0.0, 1.0, 0.0
    t0 = time.perf_counter()
    for k, occ in enumerate(inputs):
        probs = {"".join(map(str, o)): p for o, p in bs_distribution(u, occ).items()}
        for key, p in probs.items():
            want = bs_probability(u, occ, tuple(int(c) for c in key))
            worst_oracle = max(worst_oracle, abs(want - p))
        out = bs_sample(u, occ, samples, seed=k)
        counts = {}
        for row in out:
            key = "".join(map(str, row))
            counts[key] = counts.get(key, 0) + 1
        worst_tv = max(worst_tv, total_variation(_freqs(counts, samples), probs))
        worst_p = min(worst_p, _chi2_pvalue(counts, probs, samples))
    elapsed = time.perf_counter() - t0
    ok = worst_tv < 0.02 and worst_p > 1e-3 and perm_err < 1e-10 and worst_oracle < 1e-12 and elapsed < 120
    return ok, (f"{len(inputs)} inputs, worst TV {worst_tv:.4f}, min chi2 p {worst_p:.3g}, "
                f"permanent rel err {perm_err:.1e}, {elapsed:.1f} s")


# ---------------------------------------------------------------- 6

def check_klm():
    t0 = time.perf_counter()
    res = klm_cnot_demo(10**6, seed=0)
    elapsed = time.perf_counter() - t0
    dev = abs(res.success_rate - 1 / 9)
    ok = dev <= 3 * res.sigma and res.is_cnot() and len(res.truth_table) == 4 and elapsed < 120
    return ok, f"success {res.success_rate:.5f} vs 1/9 ({dev / res.sigma:.2f} sigma), truth table exact: {res.is_cnot()}"


# ---------------------------------------------------------------- 7

def check_rb():
    lengths = [1, 2, 4, 8, 16, 32, 64, 128]
    readout = 0.05
    ok = True
    parts = []
    for gamma in (0.99, 0.95):
        clean = rb_experiment(lengths, n_seq=30, shots=1000, noise=depolarizing_for_gamma(gamma), seed=1)
        noisy_model = NoiseModel(gates=depolarizing_for_gamma(gamma).gates, readout=readout)
        noisy = rb_experiment(lengths, n_seq=30, shots=1000, noise=noisy_model, seed=1)
        a, b, g = clean.fit
        a2, b2, g2 = noisy.fit
        ok &= abs(g - gamma) <= 0.005 and abs(g2 - gamma) <= 0.005
        # readout maps survival s -> (1 - 2r) s + r, so A and B absorb it
        ok &= abs(a2 - (1 - 2 * readout) * a) < 0.02 and abs(b2 - ((1 - 2 * readout) * b + readout)) < 0.02
        ok &= abs(a2 - a) > 0.02
        parts.append(f"gamma {gamma}: fit {g:.4f}, with readout {g2:.4f} (A {a:.3f}->{a2:.3f}, B {b:.3f}->{b2:.3f})")
    return ok, "; ".join(parts)


# ---------------------------------------------------------------- 8

def check_qv():
    unit = (h_est(0, 100, 100) == 0.0 and h_est(100 * 100, 100, 100) == pytest.approx(1.0, abs=1e-12)
            and abs(h_est(7000, 100, 100) - 0.65417) <= 1e-5
            and abs(h_est(7000, 100, 100) - ref_h_est(7000, 100, 100)) < 1e-12)
    clean = qv_experiment(5, n_c=50, n_s=500, seed=0)
    passes = all(r.passed and r.h_est > 2 / 3 for r in clean.records)
    dirty = qv_experiment(5, n_c=50, n_s=500, noise=fully_depolarizing(), seed=0)
    fails = all(not r.passed for r in dirty.records) and len(dirty.records) == 4
    ok = unit and passes and clean.quantum_volume == 32 and fails
    hs = ", ".join(f"{r.h_est:.3f}" for r in clean.records)
    hd = ", ".join(f"{r.h_est:.3f}" for r in dirty.records)
    return ok, f"QV = {clean.quantum_volume}; h_est clean [{hs}], depolarized [{hd}]; unit checks {unit}"


# ---------------------------------------------------------------- 9

def _state_ok(rho, tol=1e-9):
    return (np.abs(rho - rho.conj().T).max() < tol and abs(np.trace(rho).real - 1) < tol
            and np.linalg.eigvalsh(rho).min() > -tol)


def _channel_ok(chi, d, tol=1e-9):
    return (np.abs(chi - chi.conj().T).max() < tol and np.linalg.eigvalsh(chi).min() > -tol
            and np.abs(partial_trace_out(chi, d) - np.eye(d)).max() < tol)


def check_tomography():
    rng = np.random.default_rng(9)
    fids, invariants = [], True
    for i in range(20):
        psi = haar_unitary(2, rng)[:, 0]
        theta = 2 * math.acos(min(1.0, abs(psi[0])))
        phi = float(np.angle(psi[1]) - np.angle(psi[0]))
        prep = Circuit(1, 1).u(theta, phi, 0.0, 0)
        rho = reconstruct_mle(simulate_qst(prep, 10**4, seed=i), "state").estimate
        invariants &= _state_ok(rho)
        fids.append(fidelity_to_target(rho, psi))
    med = statistics.median(fids)
    qpt = []
    for circ in (Circuit(1).rz(0.0, 0), Circuit(1).rx(math.pi / 3, 0)):
        chi = reconstruct_mle(simulate_qpt(circ, 10**4, seed=3), "process").estimate
        invariants &= _channel_ok(chi, 2)
        qpt.append(entanglement_fidelity(chi, circuit_unitary(circ)))
    qht_err = 0.0
    for theta in (0.3, math.pi / 3, 2.0):
        # a unitary channel has a rank-one Choi matrix; full rank converges slowly at the boundary
        data = simulate_qpt(Circuit(1).rx(theta, 0), 1000, exact=True)
        chi = reconstruct_mle(data, "process", rank=1).estimate
        invariants &= _channel_ok(chi, 2)
        want = theta / 2 * X
        h = qht_extract(chi, tau=1.0).hamiltonian
        qht_err = max(qht_err, np.linalg.norm(h - want) / np.linalg.norm(want))
    ok = med > 0.995 and min(qpt) > 0.99 and qht_err < 1e-3 and invariants
    return ok, (f"QST median fidelity {med:.5f}; QPT fidelities {qpt[0]:.4f}, {qpt[1]:.4f}; "
                f"QHT rel err {qht_err:.1e}; invariants {invariants}")


# ---------------------------------------------------------------- 10

def _anticommute(a, b):
    return sum(x != "I" and y != "I" and x != y for x, y in zip(a, b)) % 2 == 1


def check_trotter():
    rng = np.random.default_rng(10)
    labels = [a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II"]
    rs = np.array([8, 16, 32, 64, 128])
    slopes = {1: [], 2: []}
    made = 0
    while made < 10:
        picks = rng.choice(len(labels), size=4, replace=False)
        terms = [(float(rng.normal()), labels[i]) for i in picks]
        if not any(_anticommute(p, q) for _, p in terms for _, q in terms):
            continue  # commuting sums have no Trotter error to scale
        h = PauliHamiltonian(terms)
        for order in (1, 2):
            errs = [trotter_error(h, 1.0, int(r), order) for r in rs]
            slopes[order].append(np.polyfit(np.log(rs), np.log(errs), 1)[0])
        made += 1
    commuting = [
        PauliHamiltonian([(0.7, "XX"), (-0.4, "YY"), (1.3, "ZZ")]),
        PauliHamiltonian([(0.5, "ZI"), (0.9, "IZ"), (-1.1, "ZZ"), (0.2, "II")]),
        PauliHamiltonian([(1.5, "XI"), (0.3, "IY"), (0.8, "XY")]),
    ]
    exact = max(trotter_error(h, 1.7, 1, order) for h in commuting for order in (1, 2))
    ok = (all(abs(s + 1) <= 0.1 for s in slopes[1]) and all(abs(s + 2) <= 0.1 for s in slopes[2])
          and exact < 1e-12)
    return ok, (f"order-1 slopes [{min(slopes[1]):.3f}, {max(slopes[1]):.3f}], "
                f"order-2 slopes [{min(slopes[2]):.3f}, {max(slopes[2]):.3f}], commuting error {exact:.1e}")


# ---------------------------------------------------------------- 11

def _all_bits(n):
    return ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(float)


def check_qubo():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    b = np.array([0.5, -0.25])
    ls = qubo_from_linear_system(A, b, 8)
    q = _all_bits(ls.n_vars)
    x = ls.decode(q)
    want = np.sum((x @ A.T - b) ** 2, axis=1)
    ls_err = np.abs(ls.energy_bits(q) + b @ b - want).max()

    ode = qubo_from_ode(1.0, 0.0, 0.0, -2.0, n_t=6, k=4)
    enc = ode.source
    q = _all_bits(ode.n_vars)
    ode_err = np.abs(ode.energy_bits(q) - enc.objective(ode.decode(q))).max()
    grid = enc.grid[1:-1]
    exact = grid * (1 - grid)
    _, best = brute_force(ode)
    sol = ode.decode_spins(best[0])
    err = np.abs(sol - exact).max()
    resolution = ode.scale * 2 ** -(4 - 1)
    finer = refine(ode, sol)
    _, best2 = brute_force(finer)
    err2 = np.abs(finer.decode_spins(best2[0]) - exact).max()
    ok = (ls.n_vars == 16 and ls_err < 1e-9 and ode_err < 1e-9 and ode.n_vars == (6 - 2) * 4
          and err <= resolution and err2 < err)
    return ok, (f"linsys max diff {ls_err:.1e}, ODE max diff {ode_err:.1e}, {ode.n_vars} vars; "
                f"error {err:.5f} (resolution {resolution:.5f}) -> {err2:.5f} after refinement")


# ---------------------------------------------------------------- 12

def check_qaoa():
    rng = np.random.default_rng(12)
    train = [random_maxcut(6, rng) for _ in range(5)]
    held_out = random_maxcut(6, rng)
    angles, _ = train_fixed_angles(train, p=2, restarts=8, seed=0)
    margins = [success_probability(q, angles) - uniform_baseline(q) for q in train]
    held = success_probability(held_out, angles) - uniform_baseline(held_out)
    ok = min(margins) > 0 and held > 0
    return ok, f"min training margin {min(margins):.4f}, held-out margin {held:.4f}"


# ---------------------------------------------------------------- 13

def check_performance():
    circ = bernstein_vazirani("101100111")
    assert circ.n_qubits == 10
    t0 = time.perf_counter()
    clean = sample(circ, 10**4, seed=0).counts
    t_clean = time.perf_counter() - t0
    t0 = time.perf_counter()
    sample(circ, 10**4, noise=NoiseModel.depolarizing(p1=0.001, p2=0.01), seed=0)
    t_noisy = time.perf_counter() - t0
    ok = clean == {"101100111": 10**4} and t_clean < 5 and t_noisy < 60
    return ok, f"noiseless {t_clean:.2f} s, depolarizing {t_noisy:.1f} s"


CHECKS = [
    (1, "emulator-oracle equivalence", check_emulator_oracle),
    (2, "trajectory-channel equivalence", check_trajectory_channels),
    (3, "T1/T2 recovery", check_relaxation),
    (4, "Grover n=3", check_grover),
    (5, "boson sampler exactness", check_boson_sampler),
    (6, "KLM CNOT", check_klm),
    (7, "RB recovery", check_rb),
    (8, "quantum volume", check_qv),
    (9, "tomography", check_tomography),
    (10, "Trotter scaling", check_trotter),
    (11, "QUBO encoders", check_qubo),
    (12, "fixed-angle QAOA", check_qaoa),
    (13, "performance smoke", check_performance),
]


def _line(num, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {name}: {detail}"


@pytest.mark.parametrize("num, name, check", CHECKS, ids=[f"criterion_{c[0]:02d}" for c in CHECKS])
def test_criterion(num, name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(num, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num, name, check in CHECKS:
        ok, detail = check()
        failed += not ok
        print(_line(num, name, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
