"""Command-line interface end to end."""

import os

import pytest
import yaml

from vorsim.cli import main

CONFIG_1D = {
    "schema_version": 1,
    "space": {"kind": "circle", "size": 1.0},
    "process": {"N": 32, "T": 256, "seed": 0,
                "selection": {"kind": "volume_power", "alpha": 1.2}},
    "statistics": {"region": [0.0, 0.25], "f_resolution": 20000,
                   "min_bin_count": 5},
    "output": {"raster_bins": 64, "snapshot_every": 64},
}

CONFIG_2D = {
    "schema_version": 1,
    "space": {"kind": "torus", "size": 1.0},
    "process": {"N": 40, "T": 120, "seed": 2,
                "selection": {"kind": "volume_power", "alpha": 0.5}},
    "statistics": {"f_resolution": 20000},
    "output": {"raster_bins": 32, "snapshot_every": 40},
}


def _write_config(tmp_path, cfg, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_simulate_writes_all_outputs_1d(tmp_path, capsys):
    cfgp = _write_config(tmp_path, CONFIG_1D)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfgp, "--out-dir", out]) == 0
    for name in ("events.txt", "snapshots.csv", "summary.csv",
                 "spacetime.pgm", "drift.csv"):
        assert os.path.exists(os.path.join(out, name)), name
    msg = capsys.readouterr().out
    assert "simulate: circle N=32 T=256" in msg
    assert "seed=0" in msg
    # the seed came from the config file, not from a fallback default
    assert "(default)" not in msg
    header = _read(os.path.join(out, "spacetime.pgm")).split(b"\n", 2)
    assert header[0] == b"P5"
    assert header[1] == b"64 256"


def test_simulate_reruns_are_byte_identical(tmp_path):
    cfgp = _write_config(tmp_path, CONFIG_1D)
    out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["simulate", "--config", cfgp, "--out-dir", out_a]) == 0
    assert main(["simulate", "--config", cfgp, "--out-dir", out_b]) == 0
    for name in ("events.txt", "snapshots.csv", "summary.csv",
                 "spacetime.pgm", "drift.csv"):
        assert _read(os.path.join(out_a, name)) == \
            _read(os.path.join(out_b, name)), name


def test_simulate_2d_snapshot_raster(tmp_path):
    cfgp = _write_config(tmp_path, CONFIG_2D)
    out = str(tmp_path / "out2")
    assert main(["simulate", "--config", cfgp, "--out-dir", out]) == 0
    header = _read(os.path.join(out, "snapshot.pgm")).split(b"\n", 2)
    assert header[1] == b"32 32"
    assert not os.path.exists(os.path.join(out, "drift.csv"))


def test_seed_flag_overrides_and_is_reported(tmp_path, capsys):
    cfg = dict(CONFIG_1D)
    cfg["process"] = dict(CONFIG_1D["process"])
    del cfg["process"]["seed"]
    cfgp = _write_config(tmp_path, cfg)
    out = str(tmp_path / "o")
    assert main(["simulate", "--config", cfgp, "--out-dir", out]) == 0
    assert "seed=0 (default)" in capsys.readouterr().out
    assert main(["simulate", "--config", cfgp, "--out-dir", out,
                 "--seed", "7"]) == 0
    msg = capsys.readouterr().out
    assert "seed=7" in msg and "(default)" not in msg


def test_invalid_config_values_fail_with_named_key(tmp_path, capsys):
    cfgp = _write_config(tmp_path, CONFIG_1D)
    out = str(tmp_path / "o")
    rc = main(["simulate", "--config", cfgp, "--out-dir", out,
               "--override", "process.T=0"])
    assert rc == 1
    assert "process.T" in capsys.readouterr().err

    rc = main(["simulate", "--config", cfgp, "--out-dir", out,
               "--override", "process.nope=1"])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and "nope" in err


def test_render_reproduces_simulated_raster(tmp_path, capsys):
    cfgp = _write_config(tmp_path, CONFIG_1D)
    out = str(tmp_path / "sim")
    assert main(["simulate", "--config", cfgp, "--out-dir", out]) == 0
    ren = str(tmp_path / "ren")
    assert main(["render", os.path.join(out, "events.txt"),
                 "--kind", "spacetime", "--bins", "64",
                 "--out-dir", ren]) == 0
    assert _read(os.path.join(ren, "spacetime.pgm")) == \
        _read(os.path.join(out, "spacetime.pgm"))
    assert main(["render", os.path.join(out, "events.txt"),
                 "--kind", "snapshot", "--bins", "48",
                 "--out-dir", ren]) == 0
    header = _read(os.path.join(ren, "snapshot.pgm")).split(b"\n", 2)
    assert header[1] == b"48 1"


def test_stats_matches_simulate_summary(tmp_path):
    cfgp = _write_config(tmp_path, CONFIG_1D)
    out_a, out_b = str(tmp_path / "sim"), str(tmp_path / "sta")
    assert main(["simulate", "--config", cfgp, "--out-dir", out_a]) == 0
    assert main(["stats", "--config", cfgp, "--out-dir", out_b]) == 0
    assert _read(os.path.join(out_a, "summary.csv")) == \
        _read(os.path.join(out_b, "summary.csv"))
    assert not os.path.exists(os.path.join(out_b, "events.txt"))


def test_sweep_outputs_sorted_rows(tmp_path):
    cfg = dict(CONFIG_2D)
    cfg["sweep"] = {"alphas": [1.3, -1.0]}
    cfgp = _write_config(tmp_path, cfg)
    out = str(tmp_path / "sweep")
    assert main(["sweep", "--config", cfgp, "--out-dir", out,
                 "--override", "process.T=100"]) == 0
    lines = _read(os.path.join(out, "sweep.csv")).decode().splitlines()
    assert lines[0] == "alpha,final_index,avg_index,thiel_R,collapse_time"
    alphas = [float(l.split(",")[0]) for l in lines[1:]]
    assert alphas == sorted(alphas) == [-1.0, 1.3]
    for a in ("-1.0", "1.3"):
        assert os.path.exists(os.path.join(out, f"snapshot_alpha_{a}.csv"))
        assert os.path.exists(os.path.join(out, f"snapshot_alpha_{a}.pgm"))


def test_sweep_alphas_flag_overrides_config(tmp_path):
    cfg = dict(CONFIG_2D)
    cfg["sweep"] = {"alphas": [0.5]}
    cfgp = _write_config(tmp_path, cfg)
    out = str(tmp_path / "sweep2")
    assert main(["sweep", "--config", cfgp, "--out-dir", out,
                 "--alphas", "0.2,1.1",
                 "--override", "process.T=100"]) == 0
    lines = _read(os.path.join(out, "sweep.csv")).decode().splitlines()
    alphas = [float(l.split(",")[0]) for l in lines[1:]]
    assert alphas == [0.2, 1.1]


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "all" in out and "passed" in out


def test_missing_required_arguments_exit_with_usage():
    with pytest.raises(SystemExit):
        main(["simulate"])
    with pytest.raises(SystemExit):
        main([])
