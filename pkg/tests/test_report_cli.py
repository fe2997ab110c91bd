import csv
import json

import numpy as np
import pytest

from pidfair import cli
from pidfair.audit import audit
from pidfair.report import AuditReport, IngestionError, ingest_csv, run_audit, run_sweep, sweep_rows
from pidfair.scenarios import ScenarioSpec, example1, example3, generate_scenario
from pidfair.solver import SolverConfig


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def materialize(dist, path, multiplicity=100):
    rows = []
    za, ha, ya = dist.alphabets
    for idx in np.ndindex(dist.shape):
        count = round(dist.probs[idx] * multiplicity * 4)
        rows += [(za.symbols[idx[0]], ya.symbols[idx[2]], ha.symbols[idx[1]])] * count
    return write_csv(path, ["z", "y", "yhat"], rows)


# -- ingestion ------------------------------------------------------------------------


def test_ingest_uniform(tmp_path):
    p = write_csv(tmp_path / "a.csv", ["z", "y", "yhat"], [("a", "0", "p"), ("a", "1", "p"), ("b", "0", "p"), ("b", "1", "p")])
    dist, n = ingest_csv(p, "z", "y", "yhat")
    assert n == 4
    np.testing.assert_allclose(dist.probs, 0.25)


def test_ingest_example1_gaps(tmp_path):
    dist, _ = ingest_csv(materialize(example1(), tmp_path / "e1.csv"), "z", "y", "yhat")
    a = audit(dist)
    assert (a.gaps.sp_gap, a.gaps.eo_gap, a.gaps.pp_gap) == pytest.approx((1, 1, 0), abs=1e-12)


def test_ingest_matches_analytic_scenario(tmp_path):
    analytic = example3()
    dist, _ = ingest_csv(materialize(analytic, tmp_path / "e3.csv"), "z", "y", "yhat")
    a, b = run_audit(dist), run_audit(analytic)
    for key in a.gaps:
        assert a.gaps[key] == pytest.approx(b.gaps[key], abs=1e-9)
    for key in a.pid:
        assert a.pid[key] == pytest.approx(b.pid[key], abs=1e-9)


def test_ingest_quoted_fields(tmp_path):
    p = tmp_path / "q.csv"
    p.write_text('z,y,yhat\n"a,1",0,1\n"a,1",1,1\nb,0,0\n', encoding="utf-8")
    dist, n = ingest_csv(p, "z", "y", "yhat")
    assert dist.alphabets[0].symbols == ("a,1", "b") and n == 3


@pytest.mark.parametrize(
    "content, match",
    [
        ("z,y\n0,1\n", "yhat"),
        ("z,y,yhat\n0,,1\n", "row 2"),
        ("", "header"),
        ("z,y,yhat\n", "no data"),
    ],
)
def test_ingest_errors(tmp_path, content, match):
    p = tmp_path / "bad.csv"
    p.write_text(content, encoding="utf-8")
    with pytest.raises(IngestionError, match=match):
        ingest_csv(p, "z", "y", "yhat")


def test_ingest_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        ingest_csv(tmp_path / "nope.csv", "z", "y", "yhat")


def test_single_symbol_column_warns(tmp_path, caplog):
    p = write_csv(tmp_path / "c.csv", ["z", "y", "yhat"], [("a", "0", "1"), ("a", "1", "1")])
    with caplog.at_level("WARNING"):
        ingest_csv(p, "z", "y", "yhat")
    assert "single distinct value" in caplog.text


# -- report format ----------------------------------------------------------------------


def test_report_schema_and_order():
    rep = run_audit(example3())
    data = json.loads(rep.to_json())
    assert list(data) == ["meta", "gaps", "pid", "theorems", "solver"]
    assert list(data["gaps"]) == ["sp", "eo", "pp", "dataset_mi"]
    assert list(data["pid"]) == ["uni_pred", "uni_label", "red", "syn"]
    assert list(data["theorems"]) == ["t1", "t2", "t3", "t4", "t5"]
    assert all(list(v) == ["premise", "holds", "margin"] for v in data["theorems"].values())
    assert list(data["solver"]) == ["iters", "gap", "converged"]


def test_report_six_decimals():
    text = run_audit(example3()).to_json()
    assert '"eo": 1.000000,' in text
    assert '"sp": 0.000000,' in text


def test_report_round_trip_lossless():
    text = run_audit(generate_scenario(ScenarioSpec("custom", {"seed": 4, "nz": 3}))).to_json()
    assert AuditReport.from_json(text).to_json() == text


def test_report_deterministic():
    d = generate_scenario(ScenarioSpec("custom", {"seed": 2, "nz": 3, "ny": 3}))
    assert run_audit(d).to_json() == run_audit(d).to_json()


def test_units_nats():
    bits = run_audit(example1())
    nats = run_audit(example1(), units="nats")
    assert nats.gaps["sp"] == pytest.approx(bits.gaps["sp"] * np.log(2))
    assert nats.meta["units"] == "nats"


def test_dataset_only_report(tmp_path):
    p = write_csv(tmp_path / "d.csv", ["sex", "inc"], [("F", "0"), ("F", "1"), ("M", "1"), ("M", "1")])
    dist, n = ingest_csv(p, "sex", "inc")
    rep = run_audit(dist, n_records=n, dataset_only=True)
    assert rep.gaps["sp"] is None and rep.pid["red"] is None
    assert rep.gaps["dataset_mi"] == pytest.approx(0.311278, abs=1e-6)
    assert AuditReport.from_json(rep.to_json()).to_json() == rep.to_json()


# -- sweeps --------------------------------------------------------------------------------


def test_markov_sweep_rows(tmp_path):
    out = tmp_path / "s.csv"
    rows = run_sweep(ScenarioSpec("markov_sweep", {"steps": 11}), out_path=out)
    assert len(rows) == 11
    qs = [r["q"] for r in rows]
    assert qs == sorted(qs)
    for r in rows:
        assert r["sp_gap"] + r["pp_gap"] == pytest.approx(r["dataset_mi"], abs=1e-6)
    header = out.read_text().splitlines()[0].split(",")
    assert header == ["rho", "q", "sp_gap", "eo_gap", "pp_gap", "uni_pred", "uni_label", "red", "syn", "dataset_mi", "converged"]


def test_single_point_sweep_matches_audit():
    spec = ScenarioSpec("markov_sweep", {"q_min": 0.7, "steps": 1})
    (row,) = sweep_rows(spec)
    (_, dist), = generate_scenario(spec)
    rep = run_audit(dist)
    assert row["sp_gap"] == pytest.approx(rep.gaps["sp"])
    assert row["red"] == pytest.approx(rep.pid["red"])


def test_sp_zero_sweep_dominance():
    rows = sweep_rows(ScenarioSpec("sp_zero_family", {"samples": 10, "seed": 1}))
    assert all(r["pp_gap"] >= r["eo_gap"] - 1e-6 for r in rows)


def test_sweep_rejects_single_kind():
    with pytest.raises(ValueError):
        sweep_rows(ScenarioSpec("example1"))


# -- command line ---------------------------------------------------------------------------


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_scenario_json(capsys):
    code, out, _ = run(capsys, "scenario", "example4")
    assert code == 0
    data = json.loads(out)
    assert data["gaps"]["pp"] == pytest.approx(0.531, abs=1e-3)
    assert data["theorems"]["t3"]["premise"] is True and data["theorems"]["t3"]["holds"] is True


def test_cli_byte_identical(capsys):
    first = run(capsys, "scenario", "custom", "--seed", "5", "--param", "nz=3")[1]
    second = run(capsys, "scenario", "custom", "--seed", "5", "--param", "nz=3")[1]
    assert first == second


def test_cli_text_format(capsys):
    code, out, _ = run(capsys, "scenario", "example1", "--format", "text")
    assert code == 0 and "gaps.sp" in out and "t1" in out


def test_cli_audit_and_out_file(tmp_path, capsys):
    src = materialize(example1(), tmp_path / "e1.csv")
    dest = tmp_path / "r.json"
    code, out, _ = run(capsys, "audit", "--input", str(src), "--yhat-col", "yhat", "--out", str(dest))
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["gaps"]["sp"] == 1.0


def test_cli_dataset_only(tmp_path, capsys):
    src = write_csv(tmp_path / "d.csv", ["sex", "inc"], [("F", "0"), ("M", "1")])
    code, out, _ = run(capsys, "audit", "--input", str(src), "--z-col", "sex", "--y-col", "inc")
    assert code == 0
    assert json.loads(out)["meta"]["mode"] == "dataset_only"


def test_cli_ingestion_error_no_partial_report(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("z,y,yhat\n0,1\n", encoding="utf-8")
    code, out, err = run(capsys, "audit", "--input", str(bad), "--yhat-col", "yhat")
    assert code == 2 and out == ""
    assert json.loads(err.splitlines()[-1])["error"] == "ingestion"


@pytest.mark.parametrize(
    "argv",
    [
        ["scenario", "nope"],
        ["scenario", "example2", "--param", "rho=2"],
        ["scenario", "example2", "--param", "rho"],
        ["scenario", "example1", "--seed", "3"],
        ["scenario", "example1", "--tol", "-1"],
        ["scenario", "example1", "--format", "xml"],
        ["audit"],
        ["blackwell"],
        [],
    ],
)
def test_cli_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 5


def test_cli_nonconvergence_code(capsys):
    code, out, err = run(
        capsys, "scenario", "custom", "--param", "nz=4", "--param", "nyhat=4", "--param", "ny=4", "--max-iters", "1", "--tol", "1e-15"
    )
    assert code == 3
    assert json.loads(out)["solver"]["converged"] is False
    assert "nonconvergence" in err


def test_cli_breach_code(capsys, monkeypatch):
    import importlib

    from pidfair.audit import TheoremVerdict

    audit_mod = importlib.import_module("pidfair.audit")

    monkeypatch.setattr(
        audit_mod, "CHECKS", audit_mod.CHECKS + (lambda a: TheoremVerdict("t5", True, False, -1.0),)
    )
    code, _, err = run(capsys, "scenario", "example1")
    assert code == 4 and "theorem_breach" in err


def test_cli_sweep(tmp_path, capsys):
    dest = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "markov_sweep", "--param", "steps=5", "--out", str(dest))
    assert code == 0
    assert len(dest.read_text().splitlines()) == 6


def test_cli_sweep_seeded_family(capsys):
    code, out, _ = run(capsys, "sweep", "sp_zero_family", "--seed", "2", "--param", "samples=3")
    assert code == 0 and out.startswith("sample,")


def test_cli_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "markov_sweep", "--param", "steps=2", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == 5 and '"io"' in err


def test_cli_blackwell(capsys):
    code, out, _ = run(capsys, "blackwell", "--scenario", "example2")
    assert code == 0
    data = json.loads(out)
    assert data["feasible"] is True
    assert data["channel"] == [[1.0, 0.0], [0.0, 1.0]]
    code, out, _ = run(capsys, "blackwell", "--scenario", "example1")
    assert json.loads(out)["feasible"] is False


def test_cli_blackwell_from_csv(tmp_path, capsys):
    src = materialize(example1(), tmp_path / "e1.csv")
    code, out, _ = run(capsys, "blackwell", "--input", str(src), "--yhat-col", "yhat", "--sufficient", "yhat")
    assert code == 0
    # the prediction equals Z, so it is sufficient for the label
    assert json.loads(out)["feasible"] is True


def test_solver_config_reported():
    rep = run_audit(example1(), SolverConfig(tol=1e-8, max_iters=50))
    assert rep.meta["solver"]["max_iters"] == 50
    assert '"tol": 1.000000e-08' in rep.to_json()
