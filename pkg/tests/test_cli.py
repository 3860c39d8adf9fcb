import json
from pathlib import Path

import numpy as np
import pytest

from survconcord.cli import main


def _write_subjects(path: Path, rows, header="id,time,event,risk"):
    path.write_text("\n".join([header] + rows) + "\n")


@pytest.fixture
def subjects_file(tmp_path):
    path = tmp_path / "subjects.csv"
    _write_subjects(
        path,
        ["a,1,1,0.9", "b,2,1,0.5", "c,3,0,0.7", "d,3,1,0.2"],
    )
    return path


def test_cindex_basic_report(subjects_file, tmp_path, capsys):
    out = tmp_path / "report"
    code = main([
        "cindex", "--subjects", str(subjects_file), "--risk-col", "risk",
        "--profiles", "hmisc,survival_n", "--out", str(out),
    ])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    by_name = {r["name"]: r for r in report["results"]}
    assert by_name["hmisc"]["estimate"] == pytest.approx(4 / 6)
    assert by_name["survival_n"]["estimate"] == pytest.approx(4 / 6)
    table = (tmp_path / "report.csv").read_text().splitlines()
    assert len(table) == 3


def test_cindex_incompatible_profile_is_error_cell_not_failure(
    subjects_file, tmp_path
):
    out = tmp_path / "r"
    code = main([
        "cindex", "--subjects", str(subjects_file), "--risk-col", "risk",
        "--profiles", "pycox_ant,hmisc", "--out", str(out),
    ])
    assert code == 0
    report = json.loads((tmp_path / "r.json").read_text())
    by_name = {r["name"]: r for r in report["results"]}
    assert by_name["pycox_ant"]["error"] == "requires a survival matrix"
    assert by_name["hmisc"]["error"] is None


def test_cindex_schema_violation_exits_2(tmp_path):
    bad = tmp_path / "bad.csv"
    _write_subjects(bad, ["a,-1,1,0.5"])
    code = main(["cindex", "--subjects", str(bad), "--out", str(tmp_path / "x")])
    assert code == 2


def test_cindex_matrix_transform_and_td(tmp_path):
    subjects = tmp_path / "s.csv"
    _write_subjects(subjects, ["a,2,1", "b,5,1", "c,9,1"], header="id,time,event")
    grid = np.arange(0.0, 12.0)
    hazards = [0.5, 0.25, 0.1]
    matrix = tmp_path / "m.csv"
    lines = ["id," + ",".join(repr(float(t)) for t in grid)]
    for sid, h in zip("abc", hazards):
        lines.append(sid + "," + ",".join(repr(float(np.exp(-h * t))) for t in grid))
    matrix.write_text("\n".join(lines) + "\n")
    out = tmp_path / "td"
    code = main([
        "cindex", "--subjects", str(subjects), "--matrix", str(matrix),
        "--transform", "neg-rmst:11", "--profiles", "pec,pycox_ant,pycox_adj_ant",
        "--out", str(out),
    ])
    assert code == 0
    report = json.loads((tmp_path / "td.json").read_text())
    by_name = {r["name"]: r for r in report["results"]}
    assert by_name["pycox_ant"]["estimate"] == 1.0
    assert by_name["pec"]["estimate"] == 1.0
    # Without --tau, pec falls back to its own default: the largest
    # uncensored time of the evaluated data.
    assert by_name["pec"]["tau_used"] == 9.0


def test_cindex_with_bootstrap_and_custom_profiles(subjects_file, tmp_path):
    profile_file = tmp_path / "custom.json"
    profile_file.write_text(json.dumps([{
        "name": "strict_custom",
        "family": "C",
        "policy": {
            "case_table": {"1A": [1.0, 1.0], "1B": [1.0, 0.0],
                           "2A": [1.0, 1.0], "2B": [1.0, 0.0]},
            "weight_scheme": "uniform",
        },
    }]))
    out = tmp_path / "boot"
    code = main([
        "cindex", "--subjects", str(subjects_file), "--risk-col", "risk",
        "--profiles", "hmisc", "--profile-file", str(profile_file),
        "--bootstrap", "20:4:0.9", "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    report = json.loads((tmp_path / "boot.json").read_text())
    by_name = {r["name"]: r for r in report["results"]}
    assert "strict_custom" in by_name
    hm = by_name["hmisc"]
    assert hm["ci_lower"] is not None and hm["ci_lower"] <= hm["estimate"] + 1e-12


def test_km_outputs(subjects_file, tmp_path, capsys):
    code = main(["km", "--subjects", str(subjects_file), "--target", "event"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "time,value"
    assert lines[1] == "0.0,1.0"

    empty = tmp_path / "empty.csv"
    empty.write_text("id,time,event\n")
    code = main(["km", "--subjects", str(empty)])
    assert code == 2


def test_simulate_outputs_and_zero_epsilon(tmp_path):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({
        "event": {"shape": 1.2, "scale": 0.01, "coefficients": [0.8, -0.4]},
        "censoring": {"shape": 1.2, "scale": 0.01},
    }))
    out_dir = tmp_path / "sim"
    code = main([
        "simulate", "--params", str(params), "--n", "40", "--datasets", "2",
        "--mechanism", "weibull_scaled", "--epsilon-list", "0,1",
        "--seed", "9", "--out-dir", str(out_dir),
    ])
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["epsilons"] == [0.0, 1.0]
    eps0 = (out_dir / "eps_0" / "dataset_000.csv").read_text().splitlines()[1:]
    assert all(line.split(",")[2] == "1" for line in eps0)  # no censoring
    oracle_rows = (out_dir / "oracle.csv").read_text().splitlines()
    assert len(oracle_rows) == 3  # header + one row per dataset
    summary = (out_dir / "summary.csv").read_text().splitlines()
    assert len(summary) == 1 + 2 * 2


def test_simulate_zero_effect_model_leaves_oracle_cell_empty(tmp_path):
    # All true curves tie, so the ground-truth concordance is undefined;
    # the dataset is still emitted and the run succeeds.
    params = tmp_path / "params.json"
    params.write_text(json.dumps({
        "event": {"shape": 1.0, "scale": 0.05, "coefficients": [0.0]},
    }))
    out_dir = tmp_path / "sim"
    code = main([
        "simulate", "--params", str(params), "--n", "12", "--datasets", "1",
        "--epsilon-list", "0", "--out-dir", str(out_dir),
    ])
    assert code == 0
    rows = (out_dir / "oracle.csv").read_text().splitlines()
    assert rows[1].endswith(",")  # empty oracle field
    assert (out_dir / "eps_0" / "dataset_000.csv").exists()


def test_simulate_rejects_bad_mechanism(tmp_path):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({"event": {"shape": 1.0, "scale": 1.0,
                                            "coefficients": [0.0]}}))
    code = main([
        "simulate", "--params", str(params), "--n", "10", "--datasets", "1",
        "--mechanism", "nope", "--epsilon-list", "0",
        "--out-dir", str(tmp_path / "x"),
    ])
    assert code == 2


def test_simulate_deterministic_across_runs(tmp_path):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({
        "event": {"shape": 1.0, "scale": 0.02, "coefficients": [0.5]},
        "censoring": {"shape": 1.0, "scale": 0.02},
    }))

    def run(d):
        assert main([
            "simulate", "--params", str(params), "--n", "25", "--datasets", "2",
            "--epsilon-list", "0,3", "--seed", "11", "--out-dir", str(d),
        ]) == 0
        return {p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}

    assert run(tmp_path / "one") == run(tmp_path / "two")
