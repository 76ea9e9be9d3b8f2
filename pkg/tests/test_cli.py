"""Command-line tests, run in-process through main(argv)."""

import json

import numpy as np
import pytest

from qcr.cli import main
from qcr.fileio import read_result, write_matrix_csv


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


GEN = ("gen", "--n", "30", "--nc", "22", "--gamma", "0.9", "--rho", "0.1", "--seed", "4")


# ---------------------------------------------------------------- gen


def test_gen_writes_instance_and_summary(tmp_chdir, capsys):
    rc, out, _ = run(capsys, *GEN, "--out", "inst.txt")
    assert rc == 0
    assert "n=30" in out and "|gamma_support|=" in out
    assert (tmp_chdir / "inst.txt").exists()


def test_gen_deterministic(tmp_chdir, capsys):
    run(capsys, *GEN, "--out", "a.txt")
    run(capsys, *GEN, "--out", "b.txt")
    assert (tmp_chdir / "a.txt").read_bytes() == (tmp_chdir / "b.txt").read_bytes()


def test_gen_invalid_block_size(tmp_chdir, capsys):
    rc, _, err = run(capsys, "gen", "--n", "50", "--nc", "60", "--gamma", "0.9", "--rho", "0.1")
    assert rc == 2
    assert "n_c" in err


def test_gen_missing_required(tmp_chdir, capsys):
    rc, _, err = run(capsys, "gen", "--n", "50")
    assert rc == 2
    assert "--nc" in err


# ---------------------------------------------------------------- solve


def test_solve_reports_recovery(tmp_chdir, capsys):
    run(capsys, *GEN, "--out", "inst.txt")
    rc, out, _ = run(capsys, "solve", "--input", "inst.txt", "--out", "res.json")
    assert rc == 0
    assert "verdict: recovered" in out
    doc = read_result("res.json")
    assert doc["converged"] is True
    assert doc["recovery"] is True
    assert doc["instance"]["n"] == 30


def test_solve_nonconvergence_exit4_still_writes(tmp_chdir, capsys):
    run(capsys, *GEN, "--out", "inst.txt")
    rc, out, _ = run(capsys, "solve", "--input", "inst.txt", "--max-iters", "2", "--out", "res.json")
    assert rc == 4
    doc = read_result("res.json")
    assert doc["converged"] is False
    assert doc["iterations"] == 2


def test_solve_rejects_nonpositive_lambda(tmp_chdir, capsys):
    run(capsys, *GEN, "--out", "inst.txt")
    rc, _, err = run(capsys, "solve", "--input", "inst.txt", "--lambda", "0")
    assert rc == 2
    assert "lam" in err


def test_solve_quasi_clique_defaults_from_instance(tmp_chdir, capsys):
    run(capsys, *GEN, "--out", "inst.txt")
    rc, out, _ = run(
        capsys, "solve", "--input", "inst.txt", "--mode", "quasi_clique", "--out", "res.json"
    )
    assert rc == 0
    assert "quasi_clique_constrained" in out
    assert read_result("res.json")["mode"] == "quasi_clique_constrained"


def test_solve_quasi_clique_on_csv_needs_eta(tmp_chdir, capsys):
    write_matrix_csv(np.eye(8), "m.csv")
    rc, _, err = run(capsys, "solve", "--input", "m.csv", "--mode", "quasi_clique")
    assert rc == 2
    assert "--gamma" in err or "--eta" in err


def test_solve_csv_matrix_has_no_verdict(tmp_chdir, capsys):
    write_matrix_csv(np.eye(8), "m.csv")
    rc, out, _ = run(capsys, "solve", "--input", "m.csv", "--out", "res.json")
    assert rc == 0
    assert "verdict" not in out
    assert "recovery" not in read_result("res.json")


def test_solve_missing_input_exit3(tmp_chdir, capsys):
    rc, _, err = run(capsys, "solve", "--input", "absent.txt")
    assert rc == 3


# ---------------------------------------------------------------- certify


def test_certify_exit_matches_overall(tmp_chdir, capsys):
    run(capsys, *GEN, "--out", "inst.txt")
    rc, out, _ = run(capsys, "certify", "--input", "inst.txt", "--out", "rep.json")
    doc = json.loads(open("rep.json").read())
    assert rc == (0 if doc["overall"] else 1)
    assert out.count("PASS") + out.count("FAIL") == 7
    assert f"overall: {doc['overall']}" in out


def test_certify_requires_ground_truth(tmp_chdir, capsys):
    write_matrix_csv(np.eye(8), "m.csv")
    rc, _, err = run(capsys, "certify", "--input", "m.csv")
    assert rc == 2
    assert "ground truth" in err


def test_certify_divergence_exit5(tmp_chdir, capsys):
    run(capsys, "gen", "--n", "40", "--nc", "30", "--gamma", "0.85", "--rho", "0.15",
        "--seed", "2", "--out", "d.txt")
    # a tiny rank cut keeps the full sampled-block spectrum, making the
    # support/tangent operator norm reach 1
    rc, _, err = run(capsys, "certify", "--input", "d.txt", "--rank-tol", "1e-12")
    assert rc == 5
    assert "does not converge" in err


def test_certify_flags_forwarded(tmp_chdir, capsys):
    run(capsys, *GEN, "--out", "inst.txt")
    rc, _, _ = run(
        capsys, "certify", "--input", "inst.txt", "--k0", "8", "--p", "0.5",
        "--cert-seed", "3", "--out", "rep.json",
    )
    doc = json.loads(open("rep.json").read())
    assert doc["config"] == {"k0": 8, "q": pytest.approx(1 - 0.5 ** (1 / 8)), "p": 0.5, "seed": 3}


# ---------------------------------------------------------------- norms


def test_norms_prints_all_kinds(tmp_chdir, capsys):
    write_matrix_csv(np.array([[3.0, 4.0], [0.0, 0.0]]), "m.csv")
    rc, out, _ = run(capsys, "norms", "--input", "m.csv")
    assert rc == 0
    lines = dict(ln.split(" = ") for ln in out.strip().splitlines())
    assert set(lines) == {"nuclear", "spectral", "frobenius", "l1", "linf", "linf2"}
    assert float(lines["l1"]) == 7.0
    assert abs(float(lines["nuclear"]) - 5.0) < 1e-9


# ---------------------------------------------------------------- grid


GRID = (
    "grid", "--kind", "phase", "--trials", "2", "--gammas", "0.9,1.0", "--rhos", "0.1",
    "--n", "30", "--nc", "22",
)


def test_grid_writes_all_artifacts(tmp_chdir, capsys):
    rc, out, _ = run(capsys, *GRID, "--out-dir", "res", "--prefix", "ph")
    assert rc == 0
    manifest = json.loads((tmp_chdir / "res" / "ph_manifest.json").read_text())
    assert manifest["complete"] is True
    assert manifest["spec"]["trials"] == 2
    assert (tmp_chdir / "res" / "ph.csv").exists()
    assert (tmp_chdir / "res" / "ph.pgm").exists()


def test_grid_rerun_byte_identical_data(tmp_chdir, capsys):
    run(capsys, *GRID, "--out-dir", "a")
    run(capsys, *GRID, "--out-dir", "b")
    assert (tmp_chdir / "a/phase_grid.csv").read_bytes() == (tmp_chdir / "b/phase_grid.csv").read_bytes()
    assert (tmp_chdir / "a/phase_grid.pgm").read_bytes() == (tmp_chdir / "b/phase_grid.pgm").read_bytes()


def test_grid_trials_zero_rejected(tmp_chdir, capsys):
    rc, _, err = run(capsys, *GRID[:3], "--trials", "0")
    assert rc == 2
    assert "trials" in err


def test_grid_unknown_kind_usage_error(tmp_chdir, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["grid", "--kind", "banana"])
    assert exc.value.code == 2


# ---------------------------------------------------------------- config file


def test_config_file_supplies_defaults_flags_override(tmp_chdir, capsys):
    (tmp_chdir / "run.cfg").write_text(
        "n = 30\nnc = 22\ngamma = 0.9\nrho = 0.1\nseed = 4\nout = from_cfg.txt\n"
    )
    rc, _, _ = run(capsys, "--config", "run.cfg", "gen")
    assert rc == 0
    assert (tmp_chdir / "from_cfg.txt").exists()

    rc, _, _ = run(capsys, "--config", "run.cfg", "gen", "--out", "override.txt", "--seed", "9")
    assert rc == 0
    a = (tmp_chdir / "from_cfg.txt").read_text()
    b = (tmp_chdir / "override.txt").read_text()
    assert a.splitlines()[0].endswith(" 4")
    assert b.splitlines()[0].endswith(" 9")


def test_config_file_bad_line_exit2(tmp_chdir, capsys):
    (tmp_chdir / "run.cfg").write_text("nonsense\n")
    rc, _, err = run(capsys, "--config", "run.cfg", "gen")
    assert rc == 2


def test_config_file_missing_exit3(tmp_chdir, capsys):
    rc, _, err = run(capsys, "--config", "absent.cfg", "gen")
    assert rc == 3
