import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from vlp_mono import PAPER_INTRINSICS, PAPER_TRANSMITTER, WorldPoint, default_features
from vlp_mono.cli import main
from vlp_mono.io import config_from_mapping, config_to_mapping, default_config, default_config_text
from vlp_mono.projection import project, save_intrinsics
from vlp_mono.simulation import ScenarioConfig


def small_config(tmp_path, **overrides):
    data = yaml.safe_load(default_config_text())
    data["trials_per_point"] = 3
    data.update(overrides)
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump(data))
    return path


def test_default_config_is_paper_scenario():
    cfg = default_config()
    assert cfg.room.height == 5.0
    assert cfg.intrinsics == PAPER_INTRINSICS
    assert cfg.transmitter.center == (1.5, 1.5, 5.0)
    assert len(cfg.grid_points()) == 49


def test_config_mapping_round_trip():
    cfg = ScenarioConfig(seed=17, method="lsq", scenario_id="x")
    assert config_from_mapping(config_to_mapping(cfg)) == cfg


def test_simulate_writes_tables(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--quiet", "simulate", "--config", str(small_config(tmp_path)), "--out", str(out)]) == 0
    with open(out / "summary.csv") as fh:
        summary = list(csv.DictReader(fh))
    assert len(summary) == 49
    with open(out / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 49 * 3
    assert set(rows[0]) == {"scenario_id", "gx", "gy", "gz", "trial", "est_x", "est_y", "est_z", "err_3d", "status"}
    for kind in ("scatter3d", "scatter2d_xy", "scatter2d_yz", "cdf"):
        assert (out / f"plot_{kind}.csv").exists()
        assert (out / f"plot_{kind}.svg").read_text().startswith("<svg")


def test_simulate_nine_significant_digits(tmp_path):
    out = tmp_path / "out"
    main(["--quiet", "simulate", "--config", str(small_config(tmp_path)), "--out", str(out)])
    with open(out / "results.csv") as fh:
        row = next(csv.DictReader(fh))
    digits = row["est_x"].lstrip("-").replace(".", "").split("e")[0].lstrip("0")
    assert len(digits) <= 9


def test_simulate_is_byte_reproducible(tmp_path):
    cfg = small_config(tmp_path, noise={"kind": "gaussian", "sigma_um": 2.0})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--quiet", "simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["--quiet", "simulate", "--config", str(cfg), "--out", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_simulate_seed_override_changes_output(tmp_path):
    cfg = small_config(tmp_path, noise={"kind": "gaussian", "sigma_um": 2.0})
    a, b = tmp_path / "a", tmp_path / "b"
    main(["--quiet", "simulate", "--config", str(cfg), "--out", str(a)])
    main(["--quiet", "simulate", "--config", str(cfg), "--out", str(b), "--seed", "5"])
    assert (a / "results.csv").read_bytes() != (b / "results.csv").read_bytes()


def test_simulate_threads_env_does_not_change_output(tmp_path, monkeypatch):
    cfg = small_config(tmp_path, noise={"kind": "gaussian", "sigma_um": 2.0})
    a, b = tmp_path / "a", tmp_path / "b"
    main(["--quiet", "simulate", "--config", str(cfg), "--out", str(a)])
    monkeypatch.setenv("VLP_MONO_THREADS", "2")
    main(["--quiet", "simulate", "--config", str(cfg), "--out", str(b)])
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()


def test_simulate_config_errors(tmp_path, capsys):
    bad = small_config(tmp_path)
    data = yaml.safe_load(bad.read_text())
    data["grid"]["step_m"] = 0
    bad.write_text(yaml.safe_dump(data))
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "grid_step" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path / "o")]) == 2
    (tmp_path / "junk.yaml").write_text("room: [\n")
    assert main(["simulate", "--config", str(tmp_path / "junk.yaml"), "--out", str(tmp_path / "o")]) == 2


def test_simulate_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--quiet", "simulate", "--config", str(small_config(tmp_path)), "--out", str(blocker / "sub")]) == 3


@pytest.fixture
def localize_inputs(tmp_path):
    k_path = tmp_path / "intrinsics.yaml"
    save_intrinsics(PAPER_INTRINSICS, k_path)
    t_path = tmp_path / "transmitter.json"
    t_path.write_text(json.dumps({
        "id": "LED-1", "shape": "rectangle", "center_m": [1.5, 1.5, 5.0], "width_x_m": 1.0, "length_y_m": 1.0,
    }))

    def write_obs(cam, labels="ABCE", raw=False):
        path = tmp_path / "obs.csv"
        lines = ["label,u_um,v_um"]
        for label, p in default_features(PAPER_TRANSMITTER):
            if label in labels:
                a = project(WorldPoint(*cam), PAPER_INTRINSICS, p)
                u, v = PAPER_INTRINSICS.to_sensor(a) if raw else a
                lines.append(f"{label},{u!r},{v!r}")
        path.write_text("\n".join(lines) + "\n")
        return path

    return k_path, t_path, write_obs


@pytest.mark.parametrize("method", ["tri", "lsq"])
def test_localize_round_trip(localize_inputs, capsys, method):
    k, t, write_obs = localize_inputs
    obs = write_obs((1.5, 1.5, 2.0))
    assert main(["localize", "--intrinsics", str(k), "--transmitter", str(t), "--observations", str(obs), "--method", method]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert math.dist((rec["X"], rec["Y"], rec["Z"]), (1.5, 1.5, 2.0)) <= 1e-6
    assert rec["L"] == pytest.approx(3.0, abs=1e-9)
    assert rec["residual_rms"] < 1e-9


def test_localize_raw_sensor_coords(localize_inputs, capsys):
    k, t, write_obs = localize_inputs
    obs = write_obs((0.6, 2.4, 1.0), raw=True)
    assert main(["localize", "--intrinsics", str(k), "--transmitter", str(t), "--observations", str(obs), "--raw-coords"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert math.dist((rec["X"], rec["Y"], rec["Z"]), (0.6, 2.4, 1.0)) <= 1e-6


def test_localize_two_labels_is_solver_failure(localize_inputs, capsys):
    k, t, write_obs = localize_inputs
    obs = write_obs((1.5, 1.5, 2.0), labels="AB")
    assert main(["localize", "--intrinsics", str(k), "--transmitter", str(t), "--observations", str(obs)]) == 4
    assert "InsufficientFeaturesError" in capsys.readouterr().err


def test_localize_malformed_input(localize_inputs, tmp_path):
    k, t, _ = localize_inputs
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["localize", "--intrinsics", str(k), "--transmitter", str(t), "--observations", str(empty)]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("A,1.0\n")
    assert main(["localize", "--intrinsics", str(k), "--transmitter", str(t), "--observations", str(bad)]) == 2
    bad.write_text("A,x,y\n")
    assert main(["localize", "--intrinsics", str(k), "--transmitter", str(t), "--observations", str(bad)]) == 2
    (tmp_path / "t.json").write_text("{not json")
    assert main(["localize", "--intrinsics", str(k), "--transmitter", str(tmp_path / "t.json"), "--observations", str(bad)]) == 2


def test_export_plots(tmp_path):
    out = tmp_path / "out"
    cfg = small_config(tmp_path, noise={"kind": "none"}, trials_per_point=1)
    assert main(["--quiet", "simulate", "--config", str(cfg), "--out", str(out)]) == 0
    plots = tmp_path / "plots"
    assert main(["--quiet", "export-plots", str(out), "--out", str(plots)]) == 0
    data = sorted(p.name for p in plots.glob("*.csv"))
    assert data == ["plot_cdf.csv", "plot_scatter2d_xy.csv", "plot_scatter2d_yz.csv", "plot_scatter3d.csv"]
    with open(plots / "plot_cdf.csv") as fh:
        cdf = list(csv.DictReader(fh))
    assert float(cdf[-1]["probability"]) == 1.0
    with open(plots / "plot_scatter2d_xy.csv") as fh:
        for row in csv.DictReader(fh):
            assert abs(float(row["truth_x"]) - float(row["calc_x"])) <= 1e-6
            assert abs(float(row["truth_y"]) - float(row["calc_y"])) <= 1e-6


def test_export_plots_missing_input(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["--quiet", "export-plots", str(empty)]) == 3
    assert main(["--quiet", "export-plots", str(tmp_path / "nope")]) == 3
    (empty / "results.csv").write_text("garbage\n1,2\n")
    (empty / "cdf.csv").write_text("error,probability\n")
    assert main(["--quiet", "export-plots", str(empty)]) == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "vlp_mono", "--quiet", "simulate", "--config", str(small_config(tmp_path)),
         "--out", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert Path(tmp_path / "o" / "summary.csv").exists()
