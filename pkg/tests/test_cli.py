import json
import subprocess
import sys

import numpy as np
import pytest

from qsimkit import load_qasm
from qsimkit.cli import main
from qsimkit.io import complex_matrix_to_json

BELL = """OPENQASM 2.0;
include "qelib1.inc";
qreg q[2];
creg c[2];
U(pi/2,0,pi) q[0];
CX q[0],q[1];
measure q -> c;
"""


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("QSIMKIT_OUTPUT_DIR", raising=False)
    (tmp_path / "bell.qasm").write_text(BELL)
    return tmp_path


def test_run_writes_counts(work):
    assert main(["run", "bell.qasm", "--shots", "1000", "--seed", "7", "-o", "out.json"]) == 0
    data = json.loads((work / "out.json").read_text())
    assert sum(data["counts"].values()) == 1000 and set(data["counts"]) <= {"00", "11"}


def test_run_is_byte_identical(work):
    main(["run", "bell.qasm", "--shots", "500", "--seed", "3", "-o", "a.json"])
    main(["--threads", "1", "run", "bell.qasm", "--shots", "500", "--seed", "3", "-o", "b.json"])
    assert (work / "a.json").read_bytes() == (work / "b.json").read_bytes()


def test_run_noisy_thread_independent(work):
    (work / "noise.json").write_text(json.dumps({"gates": {"cx": {"channel": {"type": "depolarizing2", "p": 0.1}}}}))
    args = ["run", "bell.qasm", "--shots", "2000", "--noise", "noise.json", "-o"]
    main(["--threads", "1", *args, "a.json"])
    main(["--threads", "4", *args, "b.json"])
    assert (work / "a.json").read_bytes() == (work / "b.json").read_bytes()


def test_csv_format(work, capsys):
    assert main(["run", "bell.qasm", "--shots", "10", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("outcome,count\n")


def test_exit_codes(work):
    (work / "bad.qasm").write_text("OPENQASM 2.0; qreg q[1]; rx(1) q[3];")
    assert main(["run", "bad.qasm", "-o", "x.json"]) == 3
    assert not (work / "x.json").exists()
    assert list(work.glob(".x.json*")) == []
    assert main(["run", "missing.qasm"]) == 2
    (work / "noise.json").write_text(json.dumps({"gates": {"cx": {"nope": 1}}}))
    assert main(["run", "bell.qasm", "--noise", "noise.json", "-o", "y.json"]) == 4
    assert not (work / "y.json").exists()
    (work / "broken.json").write_text("{")
    assert main(["run", "bell.qasm", "--noise", "broken.json"]) == 4


@pytest.mark.parametrize("argv", [["frobnicate"], [], ["run"], ["bench", "xx"], ["run", "bell.qasm", "--shots", "0"]])
def test_usage_errors_exit_1(work, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1


def test_output_dir_env(work, monkeypatch):
    monkeypatch.setenv("QSIMKIT_OUTPUT_DIR", str(work / "results"))
    assert main(["run", "bell.qasm", "--shots", "10", "-o", "c.json"]) == 0
    assert (work / "results" / "c.json").exists()


def _write_unitary(path, u):
    path.write_text(json.dumps({"unitary": complex_matrix_to_json(u)}))


def test_bs(work):
    _write_unitary(work / "id.json", np.eye(3))
    assert main(["bs", "id.json", "--input", "101", "--samples", "10", "--seed", "1", "-o", "s1.txt"]) == 0
    assert (work / "s1.txt").read_text().split() == ["101"] * 10
    main(["bs", "id.json", "--input", "101", "--samples", "10", "--seed", "1", "-o", "s2.txt"])
    assert (work / "s1.txt").read_bytes() == (work / "s2.txt").read_bytes()
    _write_unitary(work / "bad.json", np.diag([1.0, 1.0, 1.1]))
    assert main(["bs", "bad.json", "--input", "101", "-o", "s3.txt"]) == 4
    assert not (work / "s3.txt").exists()
    assert main(["bs", "id.json", "--input", "10"]) == 1


def test_bench_qv(work, capsys):
    assert main(["bench", "qv", "--nmax", "3", "--nc", "20", "--ns", "100", "--seed", "1",
                 "-o", "qv.json", "--csv", "qv.csv"]) == 0
    assert json.loads((work / "qv.json").read_text())["quantum_volume"] == 8
    assert "QV = 8" in capsys.readouterr().err
    assert (work / "qv.csv").read_text().startswith("n,")


def test_bench_rb(work):
    assert main(["bench", "rb", "--lengths", "1,2,4", "--nseq", "2", "--shots", "20", "-o", "rb.json"]) == 0
    assert json.loads((work / "rb.json").read_text())["gamma"] == pytest.approx(1, abs=1e-6)


def test_tomo_qst_with_target(work):
    (work / "prep.qasm").write_text("OPENQASM 2.0; qreg q[1]; U(1.1,0.4,0) q[0];")
    assert main(["tomo", "qst", "--simulate", "prep.qasm", "--shots", "2000", "-o", "d.json"]) == 0
    from qsimkit.tomo import simulate_qst
    (work / "counts.json").write_text(simulate_qst(load_qasm(work / "prep.qasm"), 2000, seed=1).to_json())
    assert main(["tomo", "qst", "--data", "counts.json", "--rank", "1", "--target", "prep.qasm", "-o", "r.json"]) == 0
    rep = json.loads((work / "r.json").read_text())
    assert rep["fidelity"] > 0.99 and len(rep["matrix"]) == 2


def test_tomo_qht_and_qdt(work):
    (work / "rx.qasm").write_text("OPENQASM 2.0; qreg q[1]; rx(pi/3) q[0];")
    assert main(["tomo", "qht", "--simulate", "rx.qasm", "--shots", "20000", "-o", "h.json"]) == 0
    rep = json.loads((work / "h.json").read_text())
    h = np.array([[complex(z["re"], z["im"]) for z in row] for row in rep["hamiltonian"]])
    assert h[0, 1].real == pytest.approx(np.pi / 6, abs=0.03)
    assert main(["tomo", "qdt", "--simulate", "1", "-o", "p.json"]) == 0
    assert len(json.loads((work / "p.json").read_text())["povm"]) == 2
    (work / "junk.json").write_text("[1, 2")
    assert main(["tomo", "qst", "--data", "junk.json"]) == 3


@pytest.mark.parametrize("argv", [
    ["gen", "ghz", "4"],
    ["gen", "bv", "1011"],
    ["gen", "grover", "3", "--marked", "5"],
    ["gen", "swaptest", "2"],
])
def test_gen_round_trips(work, argv):
    assert main([*argv, "-o", "g.qasm"]) == 0
    assert load_qasm(work / "g.qasm").n_qubits >= 2


def test_qubo_and_qaoa_pipeline(work):
    (work / "ls.json").write_text(json.dumps({"A": [[2, 1], [1, 3]], "b": [1, 2]}))
    assert main(["qubo", "from-linsys", "ls.json", "--bits", "3", "-o", "q.json"]) == 0
    assert json.loads((work / "q.json").read_text())["n"] == 6
    assert main(["qubo", "from-ode", "--f2", "1", "--f1", "0", "--f0", "0", "--g", "-2", "--nt", "6",
                 "--bits", "4", "-o", "ode.json"]) == 0
    assert json.loads((work / "ode.json").read_text())["n"] == 16
    assert main(["qaoa", "train", "--random", "2", "--vars", "4", "--restarts", "1", "-o", "ang.json"]) == 0
    assert main(["gen", "qaoa", "q.json", "--angles", "ang.json", "-o", "c.qasm"]) == 0
    assert load_qasm(work / "c.qasm").n_qubits == 6
    assert main(["gen", "qaoa", "q.json", "--betas", "0.1", "--gammas", "0.2,0.3"]) == 1


def test_gen_trotter(work):
    (work / "h.json").write_text(json.dumps({"terms": [[0.5, "XX"], [0.3, "ZI"]]}))
    assert main(["gen", "trotter", "h.json", "--time", "1", "--steps", "2", "--order", "2", "-o", "t.qasm"]) == 0
    assert load_qasm(work / "t.qasm").n_qubits == 2


def test_module_entry_point(work):
    proc = subprocess.run([sys.executable, "-m", "qsimkit", "run", "bell.qasm", "--shots", "5"],
                          capture_output=True, text=True, cwd=work)
    assert proc.returncode == 0 and json.loads(proc.stdout)["shots"] == 5
