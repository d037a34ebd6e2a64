import csv
import io
import json
import subprocess
import sys

import pytest

from qgeo import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_curvature_bures_row(capsys):
    code, out, _ = run(capsys, "curvature", "--metric", "bures")
    assert code == 0
    table = {r["quantity"]: float(r["value"]) for r in rows(out)}
    assert table["R_scalar"] == pytest.approx(24.0, abs=1e-12)
    for key in ("K_r_theta", "K_r_phi", "K_theta_phi"):
        assert table[key] == pytest.approx(4.0, abs=1e-12)


def test_csv_header_and_precision(capsys):
    code, out, _ = run(capsys, "volume", "--metric", "sjoqvist", "--accessible")
    assert code == 0
    assert out.splitlines()[0] == "eta_or_tau,value,metric,quantity,branch"
    rec = rows(out)[0]
    assert rec["value"].startswith("2.4674011")
    assert float(rec["value"]) == pytest.approx(2.4674011002723395, abs=1e-8)
    assert rec["quantity"] == "Vacc_Sjoqvist"


def test_json_schema(capsys):
    code, out, _ = run(capsys, "length", "--metric", "fs", "--grid", "3", "--format", "json", "--seed", "4")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"meta", "records"}
    assert doc["meta"]["seed"] == 4
    assert doc["meta"]["command"] == "length"
    assert doc["meta"]["config"]["metric"] == "fs"
    assert "version" in doc["meta"]
    for rec in doc["records"]:
        assert set(rec) == set(cli.COLUMNS)
    lengths = [r["value"] for r in doc["records"] if r["quantity"] == "L_FS"]
    assert lengths[-1] == pytest.approx(1.0)


def test_geodesic_closed_and_rk4_agree(capsys):
    code, out, _ = run(capsys, "geodesic", "--metric", "bures", "--grid", "5", "--method", "both")
    assert code == 0
    table = rows(out)
    closed = [float(r["value"]) for r in table if r["quantity"] == "r"]
    numeric = [float(r["value"]) for r in table if r["quantity"] == "r_rk4"]
    assert closed == pytest.approx(numeric, abs=1e-9)


def test_complexity_fit_rows(capsys):
    code, out, _ = run(capsys, "complexity", "--metric", "fs", "--grid", "4", "--tau-max", "1000", "--fit")
    assert code == 0
    table = {r["quantity"]: r["value"] for r in rows(out) if not r["eta_or_tau"]}
    assert float(table["ratio_over_tau_limit"]) == pytest.approx(0.5 / 0.96**0.5 / 2)
    assert float(table["IGE_gap_slope"]) == pytest.approx(1.0, abs=0.02)


def test_undefined_ige_is_blank(capsys):
    code, out, _ = run(capsys, "complexity", "--metric", "fs", "--grid", "6", "--tau-max", "6")
    assert code == 0
    ige = [r["value"] for r in rows(out) if r["quantity"] == "S_FS"]
    assert "" in ige and any(v for v in ige)


def test_compare_reports_thresholds(capsys):
    code, out, _ = run(capsys, "compare", "--samples", "500", "--grid", "40", "--eta-max", "12")
    assert code == 0
    table = {r["quantity"]: r["value"] for r in rows(out) if not r["eta_or_tau"]}
    assert float(table["violations"]) == 0
    assert float(table["eta_star_compare"]) > 0
    assert table["eta_star_boys"] != ""


def test_domain_error_exit_code(capsys):
    code, out, err = run(capsys, "geodesic", "--metric", "sjoqvist", "--eta-max", "50")
    assert code == 2
    assert out == ""
    rec = json.loads(err)
    assert rec["error"] == "WindowError"
    assert rec["command"] == "geodesic"
    code, _, err = run(capsys, "curvature", "--metric", "fs", "--theta0", "0")
    assert code == 2
    assert json.loads(err)["error"] == "DomainError"


def test_verification_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setenv("QGEO_TOL", "1e-300")
    code, out, err = run(capsys, "verify", "--seed", "1")
    assert code == 3
    assert json.loads(err)["error"] == "VerificationError"
    assert "FAIL" in out


def test_verify_deterministic(capsys):
    code1, out1, _ = run(capsys, "verify", "--seed", "7")
    code2, out2, _ = run(capsys, "verify", "--seed", "7")
    assert code1 == code2 == 0
    assert out1 == out2
    header = out1.splitlines()[0]
    assert header == "eta_or_tau,value,metric,quantity,branch,tol,status"
    assert all(r["status"] == "PASS" for r in rows(out1))


def test_out_file_and_figures(tmp_path, capsys):
    target = tmp_path / "vol.csv"
    figs = tmp_path / "figs"
    code, out, _ = run(capsys, "volume", "--metric", "fs", "--grid", "5", "--out", str(target),
                       "--figures", str(figs))
    assert code == 0 and out == ""
    assert target.read_text().startswith("eta_or_tau,")
    pngs = sorted(p.name for p in figs.iterdir())
    assert pngs == ["volume_FS_V_FS_principal.png", "volume_FS_absV_FS_principal.png"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qgeo", "volume", "--metric", "bures", "--accessible"],
                          capture_output=True, text=True, check=True)
    assert "Vacc_Bures" in proc.stdout
