import csv
import io
import json
import math
import subprocess
import sys

import pytest

from twosphere.cli import load_points, run

TWO_PI2_3 = 2 * math.pi**2 / 3


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coeffs_json(capsys):
    code, out, _ = _run(capsys, "coeffs", "--eps", "1e-4", "--background", "x", "--n-max", "10000")
    assert code == 0
    data = json.loads(out)
    assert list(data) == [
        "c_h_eps", "c_h_eps_tail", "c_h", "c_h_tail", "q_sum", "potential_diff", "singular_coeff",
    ]
    assert data["c_h_eps"] == pytest.approx(6.579922258865065, rel=1e-12)
    # the limit is approached from above
    assert data["c_h_eps"] > TWO_PI2_3


@pytest.mark.parametrize("gap", [[], ["--eps", "1e-4"]])
def test_coeffs_non_harmonic(capsys, gap):
    code, out, err = _run(capsys, "coeffs", *gap, "--background", "x^2")
    assert code == 2
    assert out == ""
    assert err.strip() == "NonHarmonic: Δ = 2"


def test_coeffs_parse_error(capsys):
    code, _, err = _run(capsys, "coeffs", "--delta", "1e-3", "--background", "x +")
    assert code == 2
    assert err.startswith("ParseError:")


@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs", "--background", "x"],
        ["coeffs", "--delta", "-1e-3"],
        ["coeffs", "--delta", "1e-3", "--tol", "0.5"],
        ["sequences", "--delta", "1e-3", "--eps", "2e-3"],
        ["field", "--delta", "1e-3", "--points", "0:1:3,0:1"],
        ["field", "--delta", "1e-3", "--points", "1:1:1,0:0:1,0:0:1"],
        ["sweep", "--eps-list", "1e-3,abc"],
        ["sweep", "--eps-list", "0.5"],
        ["coeffs", "--delta", "1e-3", "--threads", "0"],
        ["nonsense"],
    ],
)
def test_invalid_input_exit_2(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert err


def test_sequences_csv(capsys):
    code, out, _ = _run(capsys, "sequences", "--delta", "0.005", "--tol", "1e-6")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "p_n", "q_n", "mu_n"]
    assert float(rows[1][1]) == 1.005
    assert float(rows[2][1]) == pytest.approx(0.5074876, abs=1e-7)
    assert float(rows[2][2]) == pytest.approx(0.4975124, abs=1e-7)
    # 17 significant digits round-trip exactly
    assert float(rows[2][1]) == pytest.approx(1.005 - 1 / 2.01, rel=1e-16)


def test_field_grid(capsys):
    code, out, _ = _run(capsys, "field", "--delta", "1e-3", "--points", "0:0:1,0:0.01:3,0:0:1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "y", "z", "h", "vx", "vy", "vz", "trunc_err"]
    assert len(rows) == 4
    vx = [float(r[4]) for r in rows[1:]]
    assert vx[0] > vx[1] > vx[2] > 0


def test_field_points_file(capsys, tmp_path):
    f = tmp_path / "pts.csv"
    f.write_text("x,y,z\n0,0,0\n# comment\n3 0 0\n")
    assert load_points(str(f)).shape == (2, 3)
    code, out, _ = _run(capsys, "field", "--delta", "1e-3", "--points", str(f))
    assert code == 0
    assert len(out.strip().splitlines()) == 3


def test_field_inside_point(capsys, tmp_path):
    f = tmp_path / "pts.csv"
    f.write_text("1.0,0,0\n")
    code, _, err = _run(capsys, "field", "--delta", "1e-3", "--points", str(f))
    assert code == 2
    assert err.startswith("PointInsideInclusion:")


def test_verify_text(capsys):
    code, out, _ = _run(capsys, "verify", "--eps", "1e-3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split()[:3] == ["check", "measured", "expected"]
    assert lines[-1] == "13/13 checks passed"
    flux = [ln for ln in lines if ln.startswith("flux h through")]
    assert len(flux) == 2 and all(ln.endswith("PASS") for ln in flux)


def test_verify_json(capsys):
    code, out, _ = _run(capsys, "verify", "--delta", "1e-4", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["passed"] is True
    by_name = {c["name"]: c for c in data["checks"]}
    assert by_name["flux h through dD1"]["measured"] == pytest.approx(1.0, abs=1e-6)
    assert by_name["flux h through dD2"]["measured"] == pytest.approx(-1.0, abs=1e-6)


def test_verify_failure_exit_3(capsys):
    # a coarse rule cannot resolve the near-contact flux
    code, out, _ = _run(capsys, "verify", "--delta", "1e-6", "--order", "6")
    assert code == 3
    assert "FAIL" in out


def _sweep(tmp_path, name):
    d = tmp_path / name
    d.mkdir()
    argv = [
        "sweep", "--background", "x", "--eps-list", "1e-3,1e-4,1e-5",
        "--out", str(d / "r.json"), "--csv", str(d / "r.csv"),
    ]
    assert run(argv) == 0
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_sweep_outputs_and_determinism(tmp_path):
    a = _sweep(tmp_path, "a")
    b = _sweep(tmp_path, "b")
    assert set(a) == {"r.json", "r.csv", "eps_vs_product.dat"}
    assert a == b
    rows = list(csv.reader(io.StringIO(a["r.csv"].decode())))
    assert rows[0] == [
        "eps", "q_sum", "c_h_eps", "c_h", "potential_diff", "grad_axis", "blowup_product", "eta_max",
    ]
    assert len(rows) == 4
    report = json.loads(a["r.json"])
    assert set(report) == {"background", "tol", "records", "fits"}
    assert set(report["fits"]) == {"rate_const_thm12", "eta_decay_slope"}
    dat = a["eps_vs_product.dat"].decode().splitlines()
    assert dat[0].startswith("#") and len(dat) == 4


def test_sweep_threads_byte_identical(tmp_path, capsys):
    outs = []
    for threads in ("1", "3"):
        code = run(["sweep", "--eps-list", "1e-3,1e-4,1e-5", "--threads", threads,
                    "--dat", str(tmp_path / f"{threads}.dat")])
        assert code == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    assert (tmp_path / "1.dat").read_bytes() == (tmp_path / "3.dat").read_bytes()


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "twosphere", "coeffs", "--delta", "1e-3", "--n-max", "1000"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert "c_h_eps" in json.loads(proc.stdout)


def test_help(capsys):
    code, out, _ = _run(capsys, "--help")
    assert code == 0
    for sub in ("sequences", "field", "coeffs", "verify", "sweep"):
        assert sub in out
