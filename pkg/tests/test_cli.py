import json

import numpy as np
import pytest

from hardness.cli import RunConfig, main
from hardness.core import read_table


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def small_sweep(tmp_path):
    data = tmp_path / "data"
    assert run("gen", "--kind", "classification", "--out", data, "--n", 40, "--params", "0.2,1.0,1.8") == 0
    return data


def test_gen_default_sweeps(tmp_path):
    assert run("gen", "--kind", "classification", "--out", tmp_path / "c") == 0
    assert run("gen", "--kind", "regression", "--out", tmp_path / "r", "--n", 50) == 0
    assert len(list((tmp_path / "c").glob("*.csv"))) == 20
    assert len(list((tmp_path / "r").glob("*.csv"))) == 10
    manifest = json.loads((tmp_path / "c" / "manifest.json").read_text())
    assert manifest[0] == {"name": "gaussians_sd0.1_seed0", "parameter": 0.1, "seed": 0,
                           "path": "gaussians_sd0.1_seed0.csv"}
    assert "Philox" in json.loads((tmp_path / "c" / "rng.json").read_text())["generator"]


def test_gen_refuses_existing_dir(tmp_path, small_sweep):
    assert run("gen", "--kind", "classification", "--out", small_sweep, "--n", 40) == 2
    assert run("gen", "--kind", "classification", "--out", small_sweep, "--n", 40, "--force") == 0


def test_gen_rejects_bad_params(tmp_path):
    assert run("gen", "--kind", "regression", "--out", tmp_path / "x", "--params", "0.5,0.1") == 2


def test_measure_fixture_file(tmp_path, fix_c6):
    path = tmp_path / "c6.csv"
    fix_c6.to_csv(path)
    assert run("measure", path, "--kind", "classification", "--out", tmp_path / "p") == 0
    lines = (tmp_path / "p" / "c6.profile.csv").read_text().splitlines()
    assert lines[0] == "instance_id,kDN,DCP,TD,CLD,CB,F1,N1,N2,LSC,LSR,U,De"
    assert len(lines) == 7 and all(len(row.split(",")) == 13 for row in lines)


def test_measure_subset(tmp_path, small_sweep):
    assert run("measure", small_sweep, "--out", tmp_path / "p", "--measures", "kDN,N1") == 0
    header, values = read_table(tmp_path / "p" / "gaussians_sd0.2_seed0.profile.csv")
    assert header == ["instance_id", "kDN", "N1"] and values.shape == (40, 3)


def test_measure_unknown_measure(tmp_path, small_sweep):
    assert run("measure", small_sweep, "--out", tmp_path / "p", "--measures", "XYZ") == 2


def test_measure_regression_with_trace(tmp_path, fix_r4):
    path = tmp_path / "r4.csv"
    fix_r4.to_csv(path)
    fix_r4.write_sidecar(tmp_path / "r4.json")
    assert run("measure", path, "--out", tmp_path / "p", "--dump-cfe-trace") == 0
    header, values = read_table(tmp_path / "p" / "r4.profile.csv")
    assert header == ["instance_id", "CFE", "LE", "S1", "S2", "S3", "HB", "TD", "De"]
    assert values[:, 1].tolist() == [0.0] * 4
    trace = json.loads((tmp_path / "p" / "r4.cfe_trace.json").read_text())
    assert len(trace["rounds"]) == 1


def test_one_malformed_file_gives_partial_failure(tmp_path):
    data = tmp_path / "data"
    assert run("gen", "--kind", "classification", "--out", data, "--n", 30) == 0
    victim = data / "gaussians_sd0.7_seed6.csv"
    lines = victim.read_text().splitlines()
    lines[4] = lines[4].replace(lines[4].split(",")[0], "NaN", 1)
    victim.write_text("\n".join(lines) + "\n")
    out = tmp_path / "p"
    assert run("measure", data, "--out", out) == 1
    assert len(list(out.glob("*.profile.csv"))) == 19


def test_ih_is_reproducible(tmp_path, small_sweep):
    for tag in ("a", "b"):
        assert run("ih", small_sweep, "--out", tmp_path / tag, "--folds", 5, "--seed", 7) == 0
    for f in sorted((tmp_path / "a").glob("*.ih.*")):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    header, values = read_table(tmp_path / "a" / "gaussians_sd1_seed1.ih.csv")
    assert header[:2] == ["instance_id", "ih"] and len(header) == 7
    assert np.all((values[:, 1] >= 0) & (values[:, 1] <= 1))
    meta = json.loads((tmp_path / "a" / "gaussians_sd1_seed1.ih.json").read_text())
    assert meta["folds"] == 5 and meta["seed"] == 7 and len(meta["pool"]) == 5


def test_ih_single_learner_pool(tmp_path, small_sweep):
    assert run("ih", small_sweep, "--out", tmp_path / "ih", "--folds", 4, "--pool-size", 1) == 0
    header, _ = read_table(tmp_path / "ih" / "gaussians_sd0.2_seed0.ih.csv")
    assert header == ["instance_id", "ih", "gaussian_nb"]
    assert run("ih", small_sweep, "--out", tmp_path / "bad", "--pool-size", 0) == 2


def test_full_report(tmp_path):
    data, prof, ih, rep = (tmp_path / d for d in ("data", "prof", "ih", "rep"))
    assert run("gen", "--kind", "classification", "--out", data, "--n", 120, "--params", "0.2,0.6,1.0,1.4,1.8") == 0
    assert run("measure", data, "--out", prof) == 0
    assert run("ih", data, "--out", ih, "--folds", 5) == 0
    assert run("report", "--data", data, "--profiles", prof, "--ih", ih, "--out", rep) == 0
    assert len(list(rep.glob("boxplot_*.svg"))) == 13
    report = json.loads((rep / "report.json").read_text())
    assert len(report["datasets"]) == 5
    assert report["trend"]["LSC"] >= 0.9 and report["trend"]["IH"] >= 0.9
    first = {p.name: p.read_bytes() for p in rep.iterdir()}
    assert run("report", "--data", data, "--profiles", prof, "--ih", ih, "--out", rep) == 0
    assert first == {p.name: p.read_bytes() for p in rep.iterdir()}
    assert (rep / "summary.csv").read_text().startswith("dataset,parameter,measure,min,q1,median,q3,max,mean\n")


def test_report_without_manifest_has_no_trend(tmp_path, small_sweep):
    prof = tmp_path / "prof"
    run("measure", small_sweep / "gaussians_sd0.2_seed0.csv", "--out", prof)
    assert run("report", "--profiles", prof, "--out", tmp_path / "rep") == 0
    report = json.loads((tmp_path / "rep" / "report.json").read_text())
    assert report["trend"] == {} and len(report["datasets"]) == 1


def test_report_names_missing_inputs(tmp_path, small_sweep, caplog):
    prof = tmp_path / "prof"
    run("measure", small_sweep, "--out", prof)
    (prof / "gaussians_sd1_seed1.profile.csv").unlink()
    assert run("report", "--data", small_sweep, "--profiles", prof, "--out", tmp_path / "rep") == 1
    assert "gaussians_sd1_seed1.profile.csv" in caplog.text


def test_threads_env_gives_same_output(tmp_path, small_sweep, monkeypatch):
    run("measure", small_sweep, "--out", tmp_path / "one")
    monkeypatch.setenv("HARDNESS_THREADS", "3")
    run("measure", small_sweep, "--out", tmp_path / "three")
    for f in (tmp_path / "one").glob("*.profile.csv"):
        assert f.read_bytes() == (tmp_path / "three" / f.name).read_bytes()


def test_run_config_round_trip():
    cfg = RunConfig("measure", inputs=["a.csv"], out="o", measures=["kDN"], de_quantile=0.2)
    assert RunConfig.from_json(cfg.to_json()) == cfg
    assert json.loads(cfg.to_json())["hb_bins"] == 10


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
