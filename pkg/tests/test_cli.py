import json
import subprocess
import sys
from pathlib import Path

import pytest

from susy_kernel.cli import main, run

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "atlases"


def report(argv):
    code, rep = run(argv)
    return code, rep.to_json() if rep is not None else None


@pytest.mark.parametrize("m,n", [(1, 0), (1, 1), (2, 3), (3, 2)])
def test_atlas_verify_projective(m, n):
    code, rep = report(["atlas", "verify", "--proj", str(m), str(n)])
    assert code == 0
    assert rep["verdict"] == "pass"
    assert rep["inputs"]["proj"] == [m, n]


def test_atlas_verify_file_and_pi():
    assert run(["atlas", "verify", "--file", str(FIXTURES / "p2_3.json")])[0] == 0
    assert run(["atlas", "verify", "--pi"])[0] == 0


def test_atlas_build_matches_fixture(capsys):
    assert main(["atlas", "build", "--proj", "1", "1", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["data"]["atlas"] == json.loads((FIXTURES / "p1_1.json").read_text())


def test_susy_check_pass_and_fail():
    assert run(["susy", "check", "--field", "d/dzeta + zeta*d/dz"])[0] == 0
    code, rep = report(["susy", "check", "--field", "z*d/dzeta + zeta*d/dz"])
    assert code == 1 and rep["verdict"] == "fail"


def test_susy_canon_reports_scope():
    code, rep = report(["susy", "canon", "--field", "d/dzeta + exp(z)*zeta*d/dz"])
    assert code == 0
    assert "-exp(-z)" in json.dumps(rep["data"])
    assert "local only" in json.dumps(rep["data"])


def test_susy_auto():
    assert run(["susy", "auto", "--f", "4*z + 1", "--g", "-2"])[0] == 0
    assert run(["susy", "auto", "--f", "z^3/3", "--g", "z"])[0] == 1
    assert run(["susy", "auto", "--f", "z + tau", "--g", "1", "--param", "tau"])[0] == 0


def test_elliptic_gens_and_reduce():
    assert run(["susy", "elliptic-gens", "--tau", "1/4 + 2i"])[0] == 0
    code, rep = report(["susy", "reduce", "--tau", "3 + 0.1i"])
    assert code == 0
    assert "10*i" in json.dumps(rep["data"])


def test_theta_commands():
    code, rep = report(["theta", "degree", "--proj", "1", "1"])
    assert code == 0
    assert run(["theta", "build", "--proj", "1", "1"])[0] == 0
    assert run(["theta", "build", "--pi"])[0] == 1


def test_fop_commands():
    for cmd in ("roundtrip", "pi-glue", "phi-check"):
        assert run(["fop", cmd, "--samples", "20", "--N", "2"])[0] == 0


def test_elliptic_commands():
    assert run(["elliptic", "verify", "--tau", "i", "--samples", "5"])[0] == 0
    assert run(["elliptic", "invariants", "--tau", "2i"])[0] == 0


def test_usage_errors_exit_2():
    assert run(["bogus"])[0] == 2
    assert run(["elliptic", "verify"])[0] == 2
    code, rep = report(["parse", "1/(x"])
    assert code == 2
    assert rep["checks"][0]["code"] == "parse-error"


def test_json_is_byte_stable(capsys):
    argv = ["fop", "phi-check", "--samples", "10", "--seed", "7", "--json"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
    assert json.loads(first)["inputs"]["seed"] == 7


def test_seed_zero_is_echoed():
    code, rep = report(["fop", "pi-glue", "--samples", "2"])
    assert rep["inputs"]["seed"] == 0


def test_timing_is_opt_in():
    _, rep = report(["atlas", "verify", "--pi"])
    assert all("elapsed" not in c for c in rep["checks"])
    _, rep = report(["atlas", "verify", "--pi", "--timing"])
    assert all("elapsed" in c for c in rep["checks"])


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "susy_kernel.cli", "atlas", "verify", "--pi"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert out.stdout.strip().endswith("overall: PASS")


def test_susy_auto_rejects_odd_coordinate_in_multiplier():
    code, rep = run(["susy", "auto", "--f", "z + 1", "--g", "zeta"])
    assert code == 1 and rep.to_json()["checks"][-1]["code"] == "susy-error"
