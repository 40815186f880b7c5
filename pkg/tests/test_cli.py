import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
import sympy as sp

from phasequant.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(line for line in io.StringIO(text) if not line.startswith("#")))


def test_star_examples(capsys):
    code, out, _ = run(["star", "q", "p"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "q*p = q p + (1/2) i ħ"
    assert run(["star", "1", "p^2"], capsys)[1].splitlines()[0] == "1*p^2 = p^2"
    assert "- (1/2) ħ^2" in run(["star", "p^2", "q^2"], capsys)[1].splitlines()[0]


def test_star_errors(capsys):
    assert run(["star", "q +", "p"], capsys)[0] == 2
    code, _, err = run(["star", "(q + p)^40", "(q - p)^40"], capsys)
    assert code == 3
    assert "error" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "phasequant", "star", "q", "p"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("q*p = ")


def test_zeta_harmonic(capsys):
    code, out, _ = run(["zeta", "--potential", "harmonic", "--s", "2"], capsys)
    assert code == 0
    table = rows(out)
    assert table[0] == ["s", "value", "error_estimate"]
    assert abs(float(table[1][1]) - math.pi**2 / 2) < 1e-6
    code, out, _ = run(["zeta", "--potential", "harmonic", "--s", "2", "--format", "json", "--normalization", "paper"], capsys)
    assert json.loads(out)["value"] == pytest.approx(math.pi**3, rel=1e-8)


def test_wigner_and_green(capsys):
    code, out, _ = run(["wigner", "--n", "0", "--at", "0,0"], capsys)
    assert code == 0
    assert float(rows(out)[1][3]) == pytest.approx(1 / math.pi)
    code, out, _ = run(["wigner", "--n", "0", "--at", "0,0", "--convention", "weyl_symbol"], capsys)
    assert float(rows(out)[1][3]) == pytest.approx(2.0)
    code, out, _ = run(["green", "--at", "0,0"], capsys)
    r = rows(out)[1]
    assert [float(x) for x in r[3:]] == pytest.approx([math.pi] * 3, abs=1e-4)


def test_sdw_paper_normalization(capsys):
    code, out, _ = run(["sdw", "--potential", "harmonic", "--q0", "0.5", "--normalization", "paper",
                        "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)["rows"]
    root = math.sqrt(2 * math.pi)
    assert data[0]["a_n"] == pytest.approx(root)
    assert data[1]["a_n"] == pytest.approx(-root * 0.125)
    assert data[0]["delta2_a_n"] == 0 and data[1]["delta2_a_n"] == 0
    assert data[2]["delta2_a_n"] == pytest.approx(-math.sqrt(math.pi / 2) / 6)


def test_domain_errors(capsys):
    assert run(["figures", "2", "--q-range=-1,2"], capsys)[0] == 2
    assert run(["sdw", "--potential", "nonsense"], capsys)[0] == 2


@pytest.mark.parametrize("fig", [1, 2])
def test_figures_complete_and_finite(fig, capsys):
    code, out, _ = run(["figures", str(fig), "--n", "9"], capsys)
    assert code == 0
    table = rows(out)
    assert table[0] == ["q", "p", "order", "value"]
    body = np.array([[float(x) for x in r] for r in table[1:]])
    assert body.shape == (9 * 9 * 3, 4)
    assert np.all(np.isfinite(body))
    zero = body[body[:, 2] == 0]
    f = zero[:, 1] ** 2 + (zero[:, 0] ** 2 if fig == 1 else 1 / zero[:, 0])
    assert np.max(np.abs(zero[:, 3] / np.exp(f) - 1)) < 1e-15


def test_figure1_columns_match_closed_form_taylor(capsys):
    # f = p^2 + q^2 is -H sigma with m = 1/2, omega = 2 at sigma = -1:
    # Exp(f) = sech(hbar) exp(f tanh(hbar)/hbar)
    h, F = sp.symbols("hbar F")
    closed = sp.sech(h) * sp.exp(F * sp.tanh(h) / h)
    ser = sp.series(closed, h, 0, 5).removeO()
    c2 = sp.lambdify(F, sp.simplify(ser.coeff(h, 2)))
    c4 = sp.lambdify(F, sp.simplify(ser.coeff(h, 4)))
    code, out, _ = run(["figures", "1", "--n", "5"], capsys)
    body = np.array([[float(x) for x in r] for r in rows(out)[1:]])
    for q, p, order, value in body:
        f = q * q + p * p
        expect = math.exp(f) + (c2(f) if order >= 2 else 0) + (c4(f) if order >= 4 else 0)
        assert value == pytest.approx(expect, rel=1e-12)
    origin = body[(body[:, 0] == 0) & (body[:, 1] == 0)]
    assert origin[origin[:, 2] == 0][0, 3] == 1.0
    assert origin[origin[:, 2] == 2][0, 3] == pytest.approx(0.5)


def test_config_descriptor(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"subcommand": "wigner", "n": 1, "at": [0.5, 0.0]}))
    code, out, _ = run(["wigner", "--config", str(cfg)], capsys)
    assert code == 0
    assert rows(out)[1][:3] == ["1", "0.5", "0"]
    cfg.write_text(json.dumps({"n": 1, "colour": "red"}))
    assert run(["wigner", "--config", str(cfg)], capsys)[0] == 2
    cfg.write_text(json.dumps({"subcommand": "zeta"}))
    assert run(["wigner", "--config", str(cfg)], capsys)[0] == 2
    cfg.write_text("{not json")
    assert run(["wigner", "--config", str(cfg)], capsys)[0] == 2
    assert run(["wigner", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_output_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / f"out{i}.csv" for i in range(2)]
    for path in paths:
        assert run(["figures", "2", "--n", "7", "--output", str(path)], capsys)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    value = rows(paths[0].read_text())[1][3]
    assert len(value.replace("-", "").replace(".", "").lstrip("0").split("e")[0]) <= 17


def test_oracle_compare_quick(tmp_path, capsys):
    ledger = tmp_path / "ledger.json"
    code, out, _ = run(["oracle-compare", "--quick", "--ledger", str(ledger)], capsys)
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines())
    assert json.loads(ledger.read_text())["n_discrepancies"] >= 6
