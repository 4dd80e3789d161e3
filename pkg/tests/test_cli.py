import json
import subprocess
import sys

import numpy as np
import pytest

from interfere.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_NOT_FOUND, OUTPUT_ROOT_ENV, main

TINY = {
    "transformer": {"kind": "transformer", "blocks": 1, "heads": 2, "head_size": 4, "epochs": 2},
    "lstm": {"kind": "lstm", "window": 10, "layer_sizes": [4], "dense_sizes": [1], "epochs": 2},
    "arima": {"kind": "arima", "p": 5, "d": 1},
}


def _config(tmp_path, predictor="arima", **extra):
    doc = {"predictor": TINY[predictor], "allocation": {"targets": [0.1, 0.001]}, **extra}
    path = tmp_path / f"{predictor}-{len(list(tmp_path.iterdir()))}.json"
    path.write_text(json.dumps(doc))
    return str(path)


def _files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_generate_writes_per_interferer_files(tmp_path, capsys):
    out = tmp_path / "gen"
    assert main(["generate", "--out", str(out)]) == 0
    names = set(_files(out))
    assert {f"interferer_{i}.csv" for i in range(6)} <= names
    assert {"received.csv", "interference.csv", "desired.csv", "interference_power.csv",
            "summary.json", "config.json"} <= names
    stats = json.loads(capsys.readouterr().out)
    assert stats["n_interferers"] == 6 and stats["trace_length"] == 200


def test_generate_invalid_length_writes_nothing(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": {"trace_length": 0}}))
    out = tmp_path / "never"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
    err = _error(capsys)
    assert err["error"] == "ConfigError" and "trace_length" in err["message"]


def test_generate_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["generate", "--seed", "5", "--out", str(tmp_path / name)]) == 0
    assert _files(tmp_path / "a") == _files(tmp_path / "b")
    main(["generate", "--seed", "6", "--out", str(tmp_path / "c")])
    assert _files(tmp_path / "a")["received.csv"] != _files(tmp_path / "c")["received.csv"]


def test_decompose_monotone_input(tmp_path, capsys):
    src = tmp_path / "s.csv"
    src.write_text("index,value\n" + "".join(f"{i},{i * i / 7}\n" for i in range(50)))
    assert main(["decompose", str(src), "--out", str(tmp_path / "d")]) == 0
    header = (tmp_path / "d" / "imfs.csv").read_text().splitlines()[0]
    assert header == "index,residual"
    assert json.loads(capsys.readouterr().out)["completeness_max_abs_error"] < 1e-9


def test_decompose_power_series(tmp_path, capsys):
    main(["generate", "--out", str(tmp_path / "g")])
    capsys.readouterr()
    assert main(["decompose", str(tmp_path / "g" / "interference_power.csv"), "--column", "power_db",
                 "--out", str(tmp_path / "d")]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["n_imfs"] >= 1 and stats["completeness_max_abs_error"] < 1e-9


def test_decompose_errors(tmp_path, capsys):
    assert main(["decompose", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == EXIT_NOT_FOUND
    assert _error(capsys)["error"] == "FileNotFoundError"
    bad = tmp_path / "bad.csv"
    bad.write_text("index,value\n0,abc\n")
    assert main(["decompose", str(bad), "--out", str(tmp_path)]) == EXIT_INPUT
    assert main(["decompose", str(bad), "--column", "x", "--out", str(tmp_path)]) == EXIT_INPUT


def test_forecast_and_allocate_deterministic(tmp_path):
    cfg = _config(tmp_path)
    for name in ("a", "b"):
        assert main(["allocate", "--config", cfg, "--out", str(tmp_path / name)]) == 0
    a = _files(tmp_path / "a")
    assert a == _files(tmp_path / "b")
    assert {"allocation_genie.csv", "allocation_ma.csv", "allocation_arima-proposed.csv",
            "outage_curves.csv", "outage.json", "predictor_forecast.json"} <= set(a)
    outage = json.loads(a["outage.json"])
    for g, m in zip(outage["genie"]["achieved_outages"], outage["ma"]["achieved_outages"]):
        assert g <= m


def test_allocate_without_predictor(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"allocation": {"estimators": ["genie", "ma"], "targets": [0.1]}}))
    assert main(["allocate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert set(json.loads((tmp_path / "o" / "outage.json").read_text())) == {"genie", "ma"}


def test_train_writes_reloadable_checkpoint(tmp_path):
    from interfere.forecast import checkpoint
    cfg = _config(tmp_path, "transformer")
    assert main(["train", "--config", cfg, "--out", str(tmp_path / "t")]) == 0
    pipeline, models = checkpoint.load(tmp_path / "t" / "model.json")
    summary = json.loads((tmp_path / "t" / "train.json").read_text())
    assert pipeline == "proposed" and len(models) == summary["n_models"]


def test_cancel_deterministic(tmp_path):
    cfg = _config(tmp_path, "transformer")
    for name in ("a", "b"):
        assert main(["cancel", "--config", cfg, "--out", str(tmp_path / name)]) == 0
    a = _files(tmp_path / "a")
    assert a == _files(tmp_path / "b")
    assert set(json.loads(a["cancellation.json"])) >= {"suppression_db", "rmse_real", "rmse_imag"}


def test_cancel_rejects_other_predictors(tmp_path, capsys):
    assert main(["cancel", "--config", _config(tmp_path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_report_table_shape(tmp_path, capsys):
    runs = tmp_path / "runs"
    for kind in TINY:
        cfg = _config(tmp_path, kind)
        for pipeline in ("conventional", "proposed"):
            assert main(["forecast", "--config", cfg, "--pipeline", pipeline,
                         "--out", str(runs / f"{kind}-{pipeline}")]) == 0
    capsys.readouterr()
    assert main(["report", str(runs), "--out", str(tmp_path / "r1")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert sorted(report["rmse"]) == ["arima", "lstm", "transformer"]
    assert all(set(row) == {"conventional", "proposed"} and None not in row.values()
               for row in report["rmse"].values())
    rows = (tmp_path / "r1" / "rmse_table.csv").read_text().splitlines()
    assert rows[0] == "predictor,conventional,proposed" and len(rows) == 4
    main(["report", str(runs), "--out", str(tmp_path / "r2")])
    assert _files(tmp_path / "r1") == _files(tmp_path / "r2")


def test_report_errors(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["report", str(tmp_path / "empty"), "--out", str(tmp_path / "r")]) == EXIT_INPUT
    assert "no runs found" in _error(capsys)["message"]
    assert main(["report", str(tmp_path / "missing"), "--out", str(tmp_path / "r")]) == EXIT_NOT_FOUND


def test_flags_reach_the_config(tmp_path):
    cfg = _config(tmp_path)
    out = tmp_path / "o"
    assert main(["forecast", "--config", cfg, "--seed", "9", "--scale", "linear",
                 "--pipeline", "conventional", "--out", str(out)]) == 0
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["global_seed"] == 9 and echoed["scale"] == "linear"
    assert echoed["pipeline"] == "conventional"
    assert main(["allocate", "--config", cfg, "--ma-index", "recent", "--out", str(out)]) == 0
    assert json.loads((out / "config.json").read_text())["allocation"]["ma_index"] == "recent"


def test_table2_literal_flag(tmp_path, capsys):
    assert main(["forecast", "--config", _config(tmp_path), "--table2-literal",
                 "--out", str(tmp_path)]) == EXIT_CONFIG
    out = tmp_path / "t"
    assert main(["forecast", "--config", _config(tmp_path, "transformer"), "--table2-literal",
                 "--pipeline", "conventional", "--out", str(out)]) == 0
    assert json.loads((out / "config.json").read_text())["predictor"]["table2_literal"] is True


def test_workers_flag(tmp_path, capsys):
    assert main(["forecast", "--workers", "0", "--out", str(tmp_path)]) == EXIT_CONFIG
    cfg = _config(tmp_path)
    main(["forecast", "--config", cfg, "--workers", "1", "--out", str(tmp_path / "w1")])
    main(["forecast", "--config", cfg, "--workers", "2", "--out", str(tmp_path / "w2")])
    assert _files(tmp_path / "w1") == _files(tmp_path / "w2")


def test_output_root_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    assert main(["generate", "--seed", "1"]) == 0
    assert (tmp_path / "root" / "generate" / "received.csv").exists()


def test_config_output_dir(tmp_path):
    cfg = _config(tmp_path, output_dir=str(tmp_path / "from-config"))
    assert main(["generate", "--config", cfg]) == 0
    assert (tmp_path / "from-config" / "summary.json").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "interfere", "generate", "--config",
                           str(tmp_path / "missing.json"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_NOT_FOUND
    assert json.loads(proc.stderr)["error"] == "FileNotFoundError"
    assert proc.stdout == ""


def test_csv_numbers_use_dot_decimal(tmp_path):
    main(["generate", "--out", str(tmp_path)])
    rows = (tmp_path / "interference.csv").read_text().splitlines()[1:]
    vals = np.array([[float(v) for v in r.split(",")] for r in rows])
    assert vals.shape == (200, 3)


def test_report_does_not_count_allocation_forecasts(tmp_path, capsys):
    cfg = _config(tmp_path)
    main(["forecast", "--config", cfg, "--out", str(tmp_path / "fc")])
    main(["allocate", "--config", cfg, "--out", str(tmp_path / "alloc")])
    capsys.readouterr()
    assert main(["report", str(tmp_path / "fc"), str(tmp_path / "alloc"),
                 "--out", str(tmp_path / "r")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["n_runs"] == {"arima/proposed": 1}
    assert set(report["outage"]) == {"genie", "ma", "arima-proposed"}
