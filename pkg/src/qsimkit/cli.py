"""Command-line front end.

Exit codes:
    0  success
    1  usage error or invalid argument value
    2  input file not found
    3  input could not be parsed (QASM syntax/semantics, malformed JSON)
    4  noise configuration rejected by the schema, or a matrix is not unitary

Results are written atomically (temp file, then rename), so a failed run never
leaves a partial output file behind.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from ._validation import UnitarityError
from .io import atomic_write, complex_matrix_to_json, dumps
from .noise import NoiseModel, NoiseSchemaError
from .qasm import QasmError, emit_qasm, load_qasm

EXIT_USAGE = 1
EXIT_NOT_FOUND = 2
EXIT_PARSE = 3
EXIT_CONFIG = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, output) -> None:
    """Write ``text`` to ``output`` atomically, or to stdout when no path is given."""
    if output:
        path = atomic_write(output, text if text.endswith("\n") else text + "\n")
        print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise QasmError(f"{path}: not valid JSON ({exc})") from None


def _noise(path) -> NoiseModel | None:
    return NoiseModel.from_json(path) if path else None


def _threads(args) -> int:
    return max(1, args.threads or os.cpu_count() or 1)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _occupations(text: str) -> list[int]:
    text = text.strip()
    if "," in text:
        return [int(v) for v in text.split(",")]
    if not text.isdigit():
        raise UsageError(f"bad occupation pattern {text!r}")
    return [int(ch) for ch in text]


# ------------------------------------------------------------------ run / bs

def cmd_run(args) -> int:
    from .core import sample

    circ = load_qasm(args.circuit)
    noise = _noise(args.noise)
    if not any(i.kind == "MEASURE" for i in circ.instructions):
        if circ.n_clbits < circ.n_qubits:
            raise UsageError("circuit has no measurements and too few classical bits to add them")
        circ.measure_all()
    hist = sample(circ, args.shots, noise=noise, seed=args.seed, threads=_threads(args))
    if args.format == "csv":
        lines = ["outcome,count"] + [f"{k},{v}" for k, v in sorted(hist.counts.items())]
        _emit("\n".join(lines), args.output)
    else:
        _emit(dumps(hist.to_dict()), args.output)
    return 0


def cmd_bs(args) -> int:
    from .photonic import BsNoise, Interferometer, bs_sample, occupation_string

    inter = Interferometer.from_dict(_read_json(args.interferometer))
    occ = _occupations(args.input)
    if len(occ) != inter.n_modes:
        raise UsageError(f"input pattern has {len(occ)} modes, interferometer has {inter.n_modes}")
    if sum(occ) > args.max_photons:
        raise UsageError(f"{sum(occ)} photons exceed --max-photons {args.max_photons}")
    if inter.n_modes > args.max_modes:
        raise UsageError(f"{inter.n_modes} modes exceed --max-modes {args.max_modes}")
    noise = BsNoise(loss=args.loss, eta=args.eta, dark_prob=args.dark)
    out = bs_sample(inter, occ, args.samples, noise=noise, seed=args.seed, max_photons=args.max_photons)
    if args.format == "json":
        _emit(dumps(out.tolist()), args.output)
    else:
        _emit("\n".join(occupation_string(row) for row in out), args.output)
    return 0


# ------------------------------------------------------------------ bench

def cmd_bench_rb(args) -> int:
    from .bench import rb_experiment

    lengths = [int(v) for v in _floats(args.lengths)]
    res = rb_experiment(lengths, args.nseq, args.shots, _noise(args.noise), args.seed)
    if args.csv:
        atomic_write(args.csv, res.to_csv())
    _emit(dumps(res.to_dict()), args.output)
    if res.fit is None:
        print(f"fit failed: {res.error}", file=sys.stderr)
    else:
        print(f"gamma = {res.gamma:.6f}  F = {res.avg_gate_fidelity:.6f}", file=sys.stderr)
    return 0


def cmd_bench_qv(args) -> int:
    from .bench import qv_experiment

    res = qv_experiment(args.nmax, args.nc, args.ns, _noise(args.noise), args.seed,
                        sigma_factor=args.sigma_factor)
    if args.csv:
        atomic_write(args.csv, res.to_csv())
    _emit(dumps(res.to_dict()), args.output)
    for r in res.records:
        print(f"n={r.n} h_est={r.h_est:.4f} {'pass' if r.passed else 'fail'}", file=sys.stderr)
    print(f"QV = {res.quantum_volume}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ tomography

def _tomo_data(args, kind: str):
    from .tomo import TomoDataset, simulate_qdt, simulate_qpt, simulate_qst

    if args.data:
        return TomoDataset.from_list(_read_json(args.data))
    if not args.simulate:
        raise UsageError("give --data FILE or --simulate")
    noise = _noise(args.noise)
    if kind == "detector":
        return simulate_qdt(int(args.simulate), args.shots, args.seed, noise)
    circ = load_qasm(args.simulate)
    if kind == "state":
        return simulate_qst(circ, args.shots, args.seed, noise)
    return simulate_qpt(circ, args.shots, args.seed, noise)


def _mle_report(res) -> dict:
    report = {"kind": res.kind, "n_iter": res.n_iter, "converged": res.converged,
              "loglik": res.loglik, "loglik_trace": res.loglik_trace}
    if isinstance(res.estimate, list):
        report["povm"] = [complex_matrix_to_json(e) for e in res.estimate]
    else:
        report["matrix"] = complex_matrix_to_json(res.estimate)
    return report


def _target_unitary(path):
    from .core import circuit_unitary

    return circuit_unitary(load_qasm(path).without_measurements())


def cmd_tomo(args) -> int:
    from .tomo import entanglement_fidelity, fidelity_to_target, qht_extract, reconstruct_mle

    kind = {"qst": "state", "qpt": "process", "qdt": "detector", "qht": "process"}[args.tomo_cmd]
    data = _tomo_data(args, kind)
    res = reconstruct_mle(data, kind, rank=args.rank, tol=args.tol, max_iter=args.max_iter)
    report = _mle_report(res)
    if args.tomo_cmd == "qht":
        q = qht_extract(res.estimate, tau=args.tau)
        report.update(hamiltonian=complex_matrix_to_json(q.hamiltonian),
                      unitary=complex_matrix_to_json(q.unitary),
                      top_eigenvalue=q.top_eigenvalue, flags=q.flags)
    if args.target:
        u = _target_unitary(args.target)
        if kind == "state":
            report["fidelity"] = fidelity_to_target(res.estimate, u[:, 0])
        elif kind == "process":
            report["fidelity"] = entanglement_fidelity(res.estimate, u)
        else:
            raise UsageError("--target is not defined for detector tomography")
    _emit(dumps(report), args.output)
    if "fidelity" in report:
        print(f"fidelity = {report['fidelity']:.6f}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ generators

def _swaptest_prep(path, m):
    if path is None:
        return None
    circ = load_qasm(path).without_measurements()
    if circ.n_qubits != m:
        raise UsageError(f"{path} has {circ.n_qubits} qubits, expected {m}")
    return circ


def _angles(args):
    from .circuits import FixedAngles

    if args.angles:
        return FixedAngles.from_dict(_read_json(args.angles))
    if args.betas is None or args.gammas is None:
        raise UsageError("give --angles FILE or both --betas and --gammas")
    return FixedAngles(_floats(args.betas), _floats(args.gammas))


def cmd_gen(args) -> int:
    from . import circuits as cc

    g = args.gen_cmd
    if g == "grover":
        its = args.iterations if args.iterations is not None else max(
            1, int(np.floor(np.pi / 4 * np.sqrt(2**args.n))))
        circ = cc.grover(args.n, args.marked, its)
    elif g == "bv":
        circ = cc.bernstein_vazirani(args.secret)
    elif g == "ghz":
        circ = cc.ghz(args.n)
    elif g == "swaptest":
        circ = cc.swap_test(args.m, _swaptest_prep(args.prep_a, args.m), _swaptest_prep(args.prep_b, args.m))
    elif g == "qaoa":
        prob = cc.QuboProblem.from_json(args.problem)
        circ = cc.qaoa_circuit(prob, _angles(args), measure=True)
    else:  # trotter
        h = cc.PauliHamiltonian.from_json(args.hamiltonian)
        circ = cc.trotter_circuit(h, args.time, args.steps, args.order)
    _emit(emit_qasm(circ), args.output)
    return 0


def cmd_qubo(args) -> int:
    from .circuits import qubo_from_linear_system, qubo_from_ode

    if args.qubo_cmd == "from-linsys":
        data = _read_json(args.system)
        prob = qubo_from_linear_system(np.asarray(data["A"], dtype=float), np.asarray(data["b"], dtype=float),
                                       args.bits)
    else:
        coeffs = []
        for name in ("f2", "f1", "f0", "g"):
            vals = _floats(getattr(args, name))
            coeffs.append(vals[0] if len(vals) == 1 else np.asarray(vals))
        prob = qubo_from_ode(*coeffs, n_t=args.nt, y0=args.y0, y1=args.y1, k=args.bits,
                             x0=args.x0, x1=args.x1, scale=args.scale)
    _emit(prob.to_json(), args.output)
    print(f"{prob.n_vars} spin variables", file=sys.stderr)
    return 0


def cmd_qaoa_train(args) -> int:
    from .circuits import FixedAngleQAOA, QuboProblem, random_maxcut

    instances = [QuboProblem.from_json(p) for p in args.problems]
    if args.random:
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, 1]))
        instances += [random_maxcut(args.vars, rng) for _ in range(args.random)]
    if not instances:
        raise UsageError("give problem files and/or --random N")
    est = FixedAngleQAOA(p=args.p, restarts=args.restarts, max_iter=args.max_iter, seed=args.seed).fit(instances)
    _emit(est.to_json(), args.output)
    print(f"min success probability = {est.train_min_probability_:.6f}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ parser

def _common(p, seed=True, noise=False, output=True):
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    if noise:
        p.add_argument("--noise", help="noise-model JSON file")
    if output:
        p.add_argument("-o", "--output", help="output file (default: stdout)")


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsimkit", description="Quantum-processor emulation and benchmarking.")
    parser.add_argument("--version", action="version", version=f"qsimkit {__version__}")
    parser.add_argument("--threads", type=_positive, default=None,
                        help="cap on worker threads (default: all cores); results do not depend on it")
    sub = parser.add_subparsers(dest="cmd", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("run", help="sample a QASM circuit")
    p.add_argument("circuit")
    p.add_argument("--shots", type=_positive, default=1024)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _common(p, noise=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bs", help="boson sampling through an interferometer")
    p.add_argument("interferometer", help='JSON {"unitary": [[{"re":..,"im":..},..],..]}')
    p.add_argument("--input", required=True, help="occupation pattern, e.g. 101 or 1,0,1")
    p.add_argument("--samples", type=_positive, default=1000)
    p.add_argument("--loss", type=float, default=0.0, help="per-mode loss probability")
    p.add_argument("--eta", type=float, default=1.0, help="indistinguishability")
    p.add_argument("--dark", type=float, default=0.0, help="dark-count probability per detector")
    p.add_argument("--max-photons", type=_positive, default=20)
    p.add_argument("--max-modes", type=_positive, default=64)
    p.add_argument("--format", choices=["lines", "json"], default="lines")
    _common(p)
    p.set_defaults(func=cmd_bs)

    bench = sub.add_parser("bench", help="randomized benchmarking and quantum volume")
    bsub = bench.add_subparsers(dest="bench_cmd", parser_class=_Parser, metavar="KIND")
    bsub.required = True
    p = bsub.add_parser("rb", help="single-qubit randomized benchmarking")
    p.add_argument("--lengths", default="1,2,4,8,16,32,64,128")
    p.add_argument("--nseq", type=_positive, default=30)
    p.add_argument("--shots", type=_positive, default=1000)
    p.add_argument("--csv", help="also write per-length survival CSV")
    _common(p, noise=True)
    p.set_defaults(func=cmd_bench_rb)
    p = bsub.add_parser("qv", help="quantum-volume heavy-output test")
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--nc", type=_positive, default=50)
    p.add_argument("--ns", type=_positive, default=500)
    p.add_argument("--sigma-factor", type=float, default=1.0)
    p.add_argument("--csv", help="also write per-width CSV")
    _common(p, noise=True)
    p.set_defaults(func=cmd_bench_qv)

    tomo = sub.add_parser("tomo", help="maximum-likelihood tomography")
    tsub = tomo.add_subparsers(dest="tomo_cmd", parser_class=_Parser, metavar="KIND")
    tsub.required = True
    for name, helptext in [("qst", "state"), ("qpt", "process"), ("qdt", "detector"),
                           ("qht", "effective Hamiltonian from process data")]:
        p = tsub.add_parser(name, help=f"{helptext} tomography" if name != "qht" else helptext)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--data", help="dataset JSON: list of {prep, setting, counts}")
        src.add_argument("--simulate", help="simulate the dataset instead: QASM file"
                         + (" (number of qubits for qdt)" if name == "qdt" else ""))
        p.add_argument("--shots", type=_positive, default=10000, help="shots per configuration when simulating")
        p.add_argument("--rank", type=_positive, default=None)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iter", type=_positive, default=5000)
        if name != "qdt":
            p.add_argument("--target", help="QASM file of the target preparation or process")
        else:
            p.set_defaults(target=None)
        if name == "qht":
            p.add_argument("--tau", type=float, default=1.0, help="gate duration")
        _common(p, noise=True)
        p.set_defaults(func=cmd_tomo)

    gen = sub.add_parser("gen", help="emit QASM for a circuit family")
    gsub = gen.add_subparsers(dest="gen_cmd", parser_class=_Parser, metavar="FAMILY")
    gsub.required = True
    p = gsub.add_parser("grover")
    p.add_argument("n", type=_positive)
    p.add_argument("--marked", type=int, default=0)
    p.add_argument("--iterations", type=int, default=None)
    p = gsub.add_parser("bv")
    p.add_argument("secret", help="bit string")
    p = gsub.add_parser("ghz")
    p.add_argument("n", type=_positive)
    p = gsub.add_parser("swaptest")
    p.add_argument("m", type=_positive, help="qubits per register")
    p.add_argument("--prep-a")
    p.add_argument("--prep-b")
    p = gsub.add_parser("qaoa")
    p.add_argument("problem", help="QUBO JSON")
    p.add_argument("--angles", help="angles JSON from 'qaoa train'")
    p.add_argument("--betas")
    p.add_argument("--gammas")
    p = gsub.add_parser("trotter")
    p.add_argument("hamiltonian", help='JSON {"terms": [[coeff, "XZ"], ...]}')
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--steps", type=_positive, default=1)
    p.add_argument("--order", type=_positive, default=1)
    for p in gsub.choices.values():
        _common(p, seed=False)
        p.set_defaults(func=cmd_gen)

    qubo = sub.add_parser("qubo", help="encode problems as spin QUBOs")
    qsub = qubo.add_subparsers(dest="qubo_cmd", parser_class=_Parser, metavar="SOURCE")
    qsub.required = True
    p = qsub.add_parser("from-linsys")
    p.add_argument("system", help='JSON {"A": [[..]], "b": [..]}')
    p.add_argument("--bits", type=_positive, default=4)
    p = qsub.add_parser("from-ode", help="f2 y'' + f1 y' + f0 y = g on [x0, x1]")
    for name in ("f2", "f1", "f0", "g"):
        p.add_argument(f"--{name}", required=True, help="constant or comma-separated grid values")
    p.add_argument("--nt", type=int, required=True, help="grid points including the boundary")
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--y1", type=float, default=0.0)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--x1", type=float, default=1.0)
    p.add_argument("--bits", type=_positive, default=4)
    p.add_argument("--scale", type=float, default=None, help="encoding half-width (default: automatic)")
    for p in qsub.choices.values():
        _common(p, seed=False)
        p.set_defaults(func=cmd_qubo)

    qaoa = sub.add_parser("qaoa", help="QAOA utilities")
    asub = qaoa.add_subparsers(dest="qaoa_cmd", parser_class=_Parser, metavar="ACTION")
    asub.required = True
    p = asub.add_parser("train", help="fixed angles maximising the worst-case success probability")
    p.add_argument("problems", nargs="*", help="QUBO JSON files")
    p.add_argument("--random", type=int, default=0, help="add N random Max-Cut instances")
    p.add_argument("--vars", type=_positive, default=6)
    p.add_argument("--p", type=_positive, default=1, help="QAOA depth")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iter", type=_positive, default=400)
    _common(p)
    p.set_defaults(func=cmd_qaoa_train)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except (NoiseSchemaError, UnitarityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QasmError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
