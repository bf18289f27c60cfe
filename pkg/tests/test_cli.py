import json
from pathlib import Path

import numpy as np
import pytest

from pocsfir import cli, specfile
from pocsfir.projectors import band_residuals

SPECS = Path(__file__).resolve().parent.parent / "specs"

LOOSE = """
[filter]
N = 21
M = 256
alpha = 0.2
beta = 0.2
omega_p = 0.3pi
omega_s = 0.5pi
"""


def write(tmp_path, text, name="spec.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_loose_design_exports(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["design", str(write(tmp_path, LOOSE)), "--out", str(out)])
    assert code == cli.EXIT_OK
    h = cli.read_coeffs(out / "coeffs.txt")
    assert h.shape == (21,)
    np.testing.assert_allclose(h, h[::-1], atol=1e-12)

    rows = (out / "response.csv").read_text().splitlines()
    assert rows[0] == "omega,magnitude_db,phase_rad"
    assert len(rows) == 1 + 256 // 2 + 1
    omega0, db0, _ = map(float, rows[1].split(","))
    # DC gain by direct summation
    assert omega0 == 0.0
    assert db0 == pytest.approx(20 * np.log10(abs(np.sum(h))), abs=1e-9)
    last = list(map(float, rows[-1].split(",")))
    assert last[0] == pytest.approx(np.pi)
    assert last[1] == pytest.approx(20 * np.log10(abs(np.sum(h * (-1.0) ** np.arange(21)))), abs=1e-9)

    report = json.loads((out / "report.json").read_text())
    assert report["converged"] is True and report["terminated_by"] == "step-tolerance"
    assert report["method"] == "pocs" and report["N"] == 21
    assert report["band_residuals"]["stopband_excess"] < 1e-3
    assert (out / "spec.ini").exists()
    assert not (out / "step.csv").exists()


def test_reimported_coefficients_reproduce_residuals(tmp_path):
    spec = specfile.loads(LOOSE)
    h, report = cli.design(spec)
    cli.export(h, report, tmp_path, spec)
    back = cli.read_coeffs(tmp_path / "coeffs.txt")
    np.testing.assert_array_equal(back, h)
    pad = np.zeros(256)
    pad[:21] = back
    stored = json.loads((tmp_path / "report.json").read_text())["band_residuals"]
    for key, value in band_residuals(pad, spec.filter).items():
        assert value == pytest.approx(stored[key], abs=1e-9)


def test_echoed_spec_reparses(tmp_path):
    out = tmp_path / "out"
    cli.main(["design", str(write(tmp_path, LOOSE)), "--out", str(out), "--tol", "1e-5"])
    echoed = specfile.parse_spec(out / "spec.ini")
    assert echoed.tol == 1e-5
    assert echoed.filter == specfile.loads(LOOSE).filter


def test_budget_exhaustion_exit_code(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["design", str(SPECS / "example1.ini"), "--out", str(out), "--max-iter", "10"])
    assert code == cli.EXIT_NOT_CONVERGED
    assert json.loads((out / "report.json").read_text())["terminated_by"] == "max-iter"
    assert (out / "coeffs.txt").exists()


@pytest.mark.parametrize(
    "args",
    [
        ["design", "missing.ini"],
        ["design"],
        ["frobnicate"],
        ["design", "{spec}", "--tol", "-1"],
        ["design", "{spec}", "--max-iter", "0"],
        ["design", "{spec}", "--init", "random"],
    ],
)
def test_error_exit_code(tmp_path, args):
    path = str(write(tmp_path, LOOSE))
    argv = [a.replace("{spec}", path) for a in args]
    assert cli.main(argv) == cli.EXIT_ERROR


def test_bad_spec_exit_code(tmp_path):
    path = write(tmp_path, LOOSE.replace("N = 21", "N = 20"))
    assert cli.main(["design", str(path), "--out", str(tmp_path / "out")]) == cli.EXIT_ERROR
    assert not (tmp_path / "out").exists()


def test_ideal_init_override(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["design", str(write(tmp_path, LOOSE)), "--out", str(out), "--init", "ideal", "--seed", "3"]) == 0
    assert specfile.parse_spec(out / "spec.ini").init == "ideal"


def test_halfband_pattern_is_exact(tmp_path):
    spec = specfile.parse_spec(SPECS / "example3_halfband.ini")
    spec = specfile.with_overrides(spec, max_iter=50)
    h, _ = cli.design(spec)
    # pattern holds even for a truncated run
    assert h[13] == 0.5
    assert all(h[13 + 2 * k] == 0.0 and h[13 - 2 * k] == 0.0 for k in range(1, 7))


def test_step_design_and_csv(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["design", str(SPECS / "example2_step.ini"), "--out", str(out)])
    assert code == cli.EXIT_OK
    rows = (out / "step.csv").read_text().splitlines()
    assert rows[0] == "n,output,lower,upper"
    assert len(rows) == 1 + 31 + 32 - 1
    h = cli.read_coeffs(out / "coeffs.txt")
    y = np.convolve(h, np.ones(32))
    for line in rows[1:]:
        n, v, lo, hi = line.split(",")
        n, v, lo, hi = int(n), float(v), float(lo), float(hi)
        assert v == pytest.approx(y[n], abs=1e-12)
        assert lo - 1e-4 <= v <= hi + 1e-4


def test_atf_design(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["design", str(SPECS / "atf_lowpass.ini"), "--out", str(out)]) == cli.EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["method"] == "atf" and report["terminated_by"] == "feasible"
    h = cli.read_coeffs(out / "coeffs.txt")
    np.testing.assert_array_equal(h, h[::-1])


def _example1_dc_gain(tmp_path, tol):
    out = tmp_path / f"out_{tol:g}"
    cli.main(["design", str(SPECS / "example1.ini"), "--out", str(out), "--tol", repr(tol)])
    h = cli.read_coeffs(out / "coeffs.txt")
    db0 = float((out / "response.csv").read_text().splitlines()[1].split(",")[1])
    # independent DC evaluation
    assert db0 == pytest.approx(20 * np.log10(abs(np.sum(h))), abs=1e-9)
    return 10 ** (db0 / 20)


@pytest.mark.xfail(strict=True, reason="at tol=1e-6 the run stops about 4e-4 outside the passband bound; see the decisions ledger")
def test_example1_dc_gain_within_ripple(tmp_path):
    assert 1 - 0.0243 <= _example1_dc_gain(tmp_path, 1e-6) <= 1 + 0.0243


def test_example1_dc_excess_shrinks_with_tol(tmp_path):
    excess = [_example1_dc_gain(tmp_path, tol) - (1 + 0.0243) for tol in (1e-6, 1e-7, 1e-8)]
    assert excess[0] > excess[1] > excess[2]
    assert excess[2] < 1e-5
