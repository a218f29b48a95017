import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ftcalib import cli
from ftcalib import io as fio
from ftcalib.model import CalibrationModel


def run(*argv):
    out = io.StringIO()
    code = cli.main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    p = {k: d / f"{k}.csv" for k in ("grid", "bal", "valid", "clean")}
    p["wb"] = d / "wb.csv"
    assert run("generate", "--kind", "grid", "--n", 600, "--temp", "32:41.2", "--seed", 1,
               "--out", p["grid"], "--workbench-out", p["wb"])[0] == 0
    assert run("generate", "--kind", "balancing", "--n", 600, "--temp", "38.1:41.6", "--seed", 2,
               "--out", p["bal"])[0] == 0
    assert run("generate", "--kind", "random", "--n", 300, "--temp", "39:40.5", "--seed", 3,
               "--out", p["valid"])[0] == 0
    assert run("generate", "--kind", "grid", "--n", 400, "--noise", 0, "--seed", 4,
               "--out", p["clean"])[0] == 0
    p["dir"] = d
    return p


# -- generate --------------------------------------------------------------

def test_generate_byte_identical(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert run("generate", "--kind", "grid", "--n", 1000, "--temp", "32:41.2", "--seed", 1,
                   "--out", tmp_path / name)[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.truth.json").read_bytes() == (tmp_path / "b.truth.json").read_bytes()


def test_generate_records_temperatures(files):
    ds = fio.read_dataset(files["bal"])
    assert ds.meta["temp_start"] == 38.1 and ds.meta["temp_end"] == 41.6
    assert ds.temperature[0] == 38.1 and ds.temperature[-1] == 41.6
    head = files["bal"].read_text().splitlines()
    assert head[0] == '# name: "balancing"'
    assert "time,r0,r1,r2,r3,r4,r5,temp,fx,fy,fz,tx,ty,tz" in head


def test_generate_mass_sets_force_scale(tmp_path):
    run("generate", "--kind", "random", "--n", 500, "--mass", 33, "--out", tmp_path / "r.csv")
    ds = fio.read_dataset(tmp_path / "r.csv")
    assert np.max(np.abs(ds.reference[:, :3])) == pytest.approx(323.6, abs=1.0)
    np.testing.assert_allclose(np.linalg.norm(ds.reference[:, :3], axis=1), 33 * 9.80665)


def test_generate_truth_reproduces_clean_data(files):
    truth = fio.read_model(files["dir"] / "clean.truth.json")
    ds = fio.read_dataset(files["clean"])
    np.testing.assert_allclose(truth.predict_dataset(ds), ds.reference, atol=1e-8)


# -- calibrate -------------------------------------------------------------

def test_calibrate_noiseless_cnt(tmp_path):
    # at constant temperature the drift is a pure offset, which centering removes
    run("generate", "--kind", "grid", "--n", 400, "--noise", 0, "--temp", "35:35", "--out", tmp_path / "g.csv")
    code, text = run("calibrate", "--data", tmp_path / "g.csv", "--type", "CnT", "--lambda", 0,
                     "--out", tmp_path / "c.json")
    assert code == 0
    mse = [float(tok.split("=")[1]) for tok in text.splitlines()[1].split()[2:]]
    assert len(mse) == 6 and max(mse) < 1e-10
    assert "rcond" in text


def test_calibrate_sphere_defaults_to_first_file(files, tmp_path):
    out = tmp_path / "s.json"
    code, text = run("calibrate", "--data", files["grid"], files["bal"], "--type", "SwT",
                     "--workbench", files["wb"], "--out", out)
    assert code == 0
    md = fio.read_model(out).metadata
    assert md["offset_source"] == "grid"
    assert "sphere radius" in text


def test_calibrate_lambda_pulls_toward_workbench(files, tmp_path):
    def dist(lam):
        _, text = run("calibrate", "--data", files["grid"], "--type", "CwT", "--lambda", lam,
                      "--workbench", files["wb"], "--out", tmp_path / f"{lam}.json")
        line = next(l for l in text.splitlines() if l.startswith("||C - C_w||"))
        return float(line.split()[-1])
    assert dist("1e6") < dist("0")


def test_calibrate_lambda_without_workbench_is_usage_error(files, tmp_path):
    out = tmp_path / "x.json"
    assert run("calibrate", "--data", files["grid"], "--type", "CnT", "--lambda", 5, "--out", out)[0] == 2
    assert run("calibrate", "--data", files["grid"], "--type", "SnT", "--out", out)[0] == 2
    assert not out.exists()


def test_unknown_type_rejected_before_io(tmp_path):
    with pytest.raises(SystemExit) as info:
        run("calibrate", "--data", tmp_path / "missing.csv", "--type", "XnT", "--out", tmp_path / "c.json")
    assert info.value.code == 2


def test_missing_file_exit_1(tmp_path):
    assert run("calibrate", "--data", tmp_path / "missing.csv", "--type", "CnT",
               "--out", tmp_path / "c.json")[0] == 1


def test_malformed_dataset_exit_1(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,r0\n1,2\n")
    assert run("calibrate", "--data", bad, "--type", "CnT", "--out", tmp_path / "c.json")[0] == 1


# -- sweep -----------------------------------------------------------------

def test_sweep_default_rows(files):
    code, text = run("sweep", "--data", files["grid"], files["bal"], "--validation", files["valid"],
                     "--workbench", files["wb"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("dataset,type,lambda")
    assert len(lines[1:54]) == 53 and lines[53].split(",")[1] == "Workbench"
    summary = lines[-1]
    assert summary.startswith("best: ")
    assert "type=SwT" in summary or "type=CwT" in summary


def test_sweep_single_cell(files):
    code, text = run("sweep", "--data", files["grid"], "--validation", files["valid"],
                     "--workbench", files["wb"], "--lambdas", "0", "--types", "CnT")
    assert code == 0
    assert len(text.splitlines()) == 1 + 2 + 1


def test_sweep_lambda_list_forms(files):
    a = run("sweep", "--data", files["grid"], "--validation", files["valid"], "--workbench", files["wb"],
            "--types", "CnT", "--lambdas", "0,1,5e+05")[1]
    b = run("sweep", "--data", files["grid"], "--validation", files["valid"], "--workbench", files["wb"],
            "--types", "CnT", "--lambdas", "0", "1", "5e+05")[1]
    assert a == b
    assert [l.split(",")[2] for l in a.splitlines()[1:4]] == ["0.0", "1.0", "500000.0"]


def test_sweep_same_validation_is_usage_error(files):
    assert run("sweep", "--data", files["grid"], "--validation", files["grid"],
               "--workbench", files["wb"])[0] == 2


def test_sweep_all_cells_failed_exit_1(tmp_path, files):
    run("generate", "--kind", "grid", "--n", 200, "--temp", "35:35", "--out", tmp_path / "flat.csv")
    code, text = run("sweep", "--data", tmp_path / "flat.csv", "--validation", files["valid"],
                     "--workbench", files["wb"], "--types", "CwT", "--lambdas", "0")
    assert code == 1
    assert "failed: IllConditionedError" in text


# -- validate --------------------------------------------------------------

def test_validate_perfect_model(files):
    code, text = run("validate", "--calibration", files["dir"] / "clean.truth.json",
                     "--validation", files["clean"], "--format", "csv")
    assert code == 0
    rows = [l.split(",") for l in text.splitlines()[1:7]]
    assert all(abs(float(r[1])) < 1e-16 and abs(float(r[2])) < 1e-8 for r in rows)


def test_validate_swt_vs_snt(files, tmp_path):
    for t in ("SnT", "SwT"):
        run("calibrate", "--data", files["grid"], "--type", t, "--workbench", files["wb"],
            "--out", tmp_path / f"{t}.json")
    code, text = run("validate", "--calibration", tmp_path / "SwT.json", "--validation", files["valid"],
                     "--baseline", tmp_path / "SnT.json", "--format", "csv")
    assert code == 0
    rows = {r[0]: r for r in (l.split(",") for l in text.splitlines()[1:7])}
    assert float(rows["fz"][3]) > 50


def test_validate_combined_swt_halves_workbench_error(files, tmp_path):
    wb = CalibrationModel.workbench(fio.read_workbench(files["wb"]))
    fio.write_model(wb, tmp_path / "wb.json")
    run("calibrate", "--data", files["grid"], files["bal"], "--type", "SwT", "--lambda", 1,
        "--workbench", files["wb"], "--out", tmp_path / "swt.json")

    def norm(path):
        text = run("validate", "--calibration", path, "--validation", files["valid"])[1]
        return float(text.splitlines()[-1].split()[-1])
    assert norm(tmp_path / "swt.json") <= 0.5 * norm(tmp_path / "wb.json")


def test_validate_extras_mismatch_exit_1(files, tmp_path):
    model = CalibrationModel(np.eye(6), np.zeros(6), np.ones((6, 1)), ("humidity",))
    fio.write_model(model, tmp_path / "h.json")
    assert run("validate", "--calibration", tmp_path / "h.json", "--validation", files["valid"])[0] == 1


# -- report ----------------------------------------------------------------

def test_report_renders_table(files, tmp_path):
    for name, data in (("g", [files["grid"]]), ("c", [files["grid"], files["bal"]])):
        run("sweep", "--data", *data, "--validation", files["valid"], "--workbench", files["wb"],
            "--label", name, "--out", tmp_path / f"{name}.csv")
    code, text = run("report", "--sweep", tmp_path / "g.csv", tmp_path / "c.csv")
    assert code == 0
    assert "best by axis" in text and "best overall" in text
    assert sum(l.startswith("g ") for l in text.splitlines()) == 5
    code, csv_text = run("report", "--sweep", tmp_path / "g.csv", tmp_path / "c.csv", "--format", "csv")
    assert len(csv_text.splitlines()) == 1 + 2 * 53


# -- reproducibility and atomicity -----------------------------------------

def test_every_subcommand_byte_identical(files, tmp_path):
    def once(tag):
        d = tmp_path / tag
        d.mkdir()
        run("generate", "--kind", "balancing", "--n", 300, "--seed", 9, "--out", d / "g.csv")
        run("calibrate", "--data", files["grid"], "--type", "SwT", "--lambda", 5, "--workbench", files["wb"],
            "--out", d / "c.json")
        run("validate", "--calibration", d / "c.json", "--validation", files["valid"], "--out", d / "v.txt")
        run("sweep", "--data", files["grid"], "--validation", files["valid"], "--workbench", files["wb"],
            "--out", d / "s.csv")
        run("report", "--sweep", d / "s.csv", "--out", d / "r.txt")
        return {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    a, b = once("a"), once("b")
    assert set(a) == {"g.csv", "g.truth.json", "c.json", "v.txt", "s.csv", "r.txt"}
    assert a == b


def test_interrupted_write_leaves_nothing(monkeypatch, tmp_path):
    def boom(src, dst):
        raise OSError("disk vanished")
    monkeypatch.setattr(os, "replace", boom)
    code, _ = run("generate", "--kind", "grid", "--n", 50, "--out", tmp_path / "g.csv")
    assert code == 1
    assert list(tmp_path.iterdir()) == []


def test_existing_file_survives_failed_overwrite(monkeypatch, tmp_path):
    target = tmp_path / "m.json"
    target.write_text("old")
    monkeypatch.setattr(os, "replace", lambda s, d: (_ for _ in ()).throw(OSError("no")))
    with pytest.raises(OSError):
        fio.write_model(CalibrationModel(np.eye(6), np.zeros(6)), target)
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["m.json"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ftcalib", "generate", "--kind", "grid", "--n", "20",
                           "--out", str(tmp_path / "g.csv")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads((tmp_path / "g.truth.json").read_text())["C"]


def test_generate_noise_forms(tmp_path):
    assert run("generate", "--kind", "grid", "--n", 20, "--noise", 0.01, "--out", tmp_path / "a.csv")[0] == 0
    assert fio.read_dataset(tmp_path / "a.csv").meta["noise_sigma"] == [0.01] * 6
    six = ["0.001", "0.001", "0.001", "0.003", "0.003", "0.003"]
    assert run("generate", "--kind", "grid", "--n", 20, "--noise", *six, "--out", tmp_path / "b.csv")[0] == 0
    assert fio.read_dataset(tmp_path / "b.csv").meta["noise_sigma"] == [float(v) for v in six]
    assert run("generate", "--kind", "grid", "--n", 20, "--noise", 0.1, 0.2, "--out", tmp_path / "c.csv")[0] == 2
    assert not (tmp_path / "c.csv").exists()
