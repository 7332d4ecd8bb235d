import csv

import pytest

from fracweak.cli import main, read_solution, selftest_reports, write_solution
from fracweak.config import parse_config

SMALL = """
[problem]
shape = 31
[kernel]
variant = variable
alpha = constant:0.5
[time]
T = 12.0
M = 192
grading = 3.0
[data]
u0 = eigen:1
[verify]
checks = unit,eigenmode,laplace,weak
tol_laplace = 1e-3
weak_M0 = 16
weak_doublings = 2
"""


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    d = tmp_path_factory.mktemp("run")
    (d / "run.ini").write_text(SMALL)
    code = main(["solve", str(d / "run.ini"), "--out", str(d / "out")])
    return d, code


def _report(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_solve_writes_outputs(solved):
    d, code = solved
    assert code == 0
    rows = _report(d / "out" / "report.csv")
    assert {r["check"] for r in rows} >= {"unit_check", "eigenmode", "laplace_residual",
                                         "weak_refinement"}
    assert all(r["pass"] == "1" for r in rows)
    traj = read_solution(d / "out" / "solution.csv", 31)
    assert traj.values.shape == (193, 31)


def test_manifest_reproduces_run(solved, tmp_path):
    d, _ = solved
    manifest = d / "out" / "manifest.txt"
    text = manifest.read_text()
    assert "# status: pass" in text and "solution_sha256" in text
    assert parse_config(manifest) == parse_config(d / "run.ini")
    assert main(["solve", str(manifest), "--out", str(tmp_path)]) == 0
    a = (d / "out" / "solution.csv").read_bytes()
    assert a == (tmp_path / "solution.csv").read_bytes()


def test_verify_existing_solution(solved, tmp_path):
    d, _ = solved
    sol = d / "out" / "solution.csv"
    assert main(["verify", str(d / "run.ini"), "--solution", str(sol), "--out",
                 str(tmp_path / "v")]) == 0


def test_verify_detects_corruption(solved, tmp_path):
    d, _ = solved
    sol = read_solution(d / "out" / "solution.csv", 31)
    write_solution(tmp_path / "bad.csv", sol.scaled(1.01))
    assert main(["verify", str(d / "run.ini"), "--solution", str(tmp_path / "bad.csv"),
                 "--out", str(tmp_path / "v")]) == 1


def test_corrupt_factor_fails_solve(tmp_path):
    (tmp_path / "c.ini").write_text(SMALL.replace("checks = unit,eigenmode,laplace,weak",
                                                  "checks = eigenmode,laplace\ncorrupt = 1.01"))
    assert main(["solve", str(tmp_path / "c.ini"), "--out", str(tmp_path / "o")]) == 1


def test_bad_config_exit_code(tmp_path, capsys):
    (tmp_path / "b.ini").write_text("[contour]\ntheta = 0.3pi\n")
    assert main(["solve", str(tmp_path / "b.ini"), "--out", str(tmp_path)]) == 2
    assert "contour.theta" in capsys.readouterr().err
    assert main(["--threads", "0", "selftest"]) == 2


def test_strict_flags_inapplicable_check(tmp_path):
    text = SMALL.replace("u0 = eigen:1", "u0 = sine:2").replace(
        "checks = unit,eigenmode,laplace,weak", "checks = unit,eigenmode")
    (tmp_path / "s.ini").write_text(text)
    assert main(["solve", str(tmp_path / "s.ini"), "--out", str(tmp_path / "a")]) == 0
    assert main(["--strict", "solve", str(tmp_path / "s.ini"), "--out",
                 str(tmp_path / "b")]) == 1


def test_threads_identical_output(tmp_path):
    text = SMALL.replace("enabled = true", "").replace("[verify]", "[verify]\nenabled = false")
    (tmp_path / "t.ini").write_text(text)
    assert main(["solve", str(tmp_path / "t.ini"), "--out", str(tmp_path / "1")]) == 0
    assert main(["--threads", "4", "solve", str(tmp_path / "t.ini"), "--out",
                 str(tmp_path / "4")]) == 0
    assert (tmp_path / "1" / "solution.csv").read_bytes() == \
        (tmp_path / "4" / "solution.csv").read_bytes()


def test_selftest(capsys, tmp_path):
    assert main(["selftest", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "overall: PASS" in out
    assert (tmp_path / "report.csv").exists()
    names = [r.check for r in selftest_reports()]
    assert names == ["contour_unit", "oracle_consistency", "b_operator"]
