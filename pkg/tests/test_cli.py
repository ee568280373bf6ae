import json

import numpy as np
import pandas as pd
import pytest

from greytensors import __version__
from greytensors.__main__ import ESTIMATE_FIELDS, SWEEP_FIELDS, main


@pytest.fixture
def config_path(tmp_path):
    config = {
        "shape": {"kind": "ball", "radius": 1.0},
        "psf": {"kind": "gaussian", "dim": 2},
        "estimator": {"kind": "volume", "r": 0, "beta": 0.5},
        "a_schedule": [0.125, 0.0625],
        "translations": 2,
        "seed": 5,
        "output": {"directory": str(tmp_path / "out")},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return str(path)


def run(config_path, *argv):
    main(["-c", config_path, "-l", "40", *argv])


def test_no_command_exits_with_help(capsys):
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 1
    assert "usage" in capsys.readouterr().out


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["-v"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_missing_config_exits_with_error(tmp_path):
    with pytest.raises(SystemExit) as e:
        run(str(tmp_path / "missing.json"), "estimate")
    assert e.value.code == 1


def test_estimate_csv_is_deterministic(config_path, tmp_path):
    run(config_path, "estimate")
    csv_path = tmp_path / "out" / "estimate.csv"
    first = csv_path.read_bytes()
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == ESTIMATE_FIELDS
    assert frame["a"].tolist() == [0.125, 0.0625]
    assert (frame["translations"] == 2).all()
    run(config_path, "estimate")
    assert csv_path.read_bytes() == first


def test_overrides_reach_the_run(config_path, tmp_path):
    run(config_path, "estimate", "-a", "0.25", "--seed", "9", "-o", str(tmp_path / "other"))
    frame = pd.read_csv(tmp_path / "other" / "estimate.csv")
    assert frame["a"].tolist() == [0.25]
    assert frame["seed"].tolist() == [9]


def test_render_then_estimate_image(config_path, tmp_path, capsys):
    run(config_path, "render", "-a", "0.125", "-i", "1")
    image = tmp_path / "out" / "ball_a0.125_1.pgm"
    assert image.exists()
    capsys.readouterr()
    run(config_path, "estimate", "--image", str(image))
    text = capsys.readouterr().out
    assert text.startswith("dim 2\nrank 0\n")
    assert float(text.splitlines()[2]) == pytest.approx(np.pi, rel=0.1)


def test_sweep_and_plot(config_path, tmp_path):
    run(config_path, "sweep", "-e", "exact", "--plot")
    csv_path = tmp_path / "out" / "sweep.csv"
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == SWEEP_FIELDS
    assert (frame["oracle"] == frame["oracle"][0]).all()
    assert (tmp_path / "out" / "sweep.svg").exists()
    svg_path = tmp_path / "bias.svg"
    main(["plot", str(csv_path), "-k", "bias", "--output", str(svg_path)])
    assert svg_path.read_bytes() == (tmp_path / "out" / "sweep.svg").read_bytes()


def test_calibrate_writes_record(config_path, tmp_path):
    config = json.loads(open(config_path).read())
    config["estimator"] = {"kind": "curvature", "r": 0}
    config["calibration"] = {"C_g": 1.5, "I_g": -0.2}
    with open(config_path, "w") as f:
        json.dump(config, f)
    run(config_path, "calibrate")
    record = json.loads((tmp_path / "out" / "calibration.json").read_text())
    assert record["C_g"] == 1.5
    assert record["I_g"] == -0.2
    assert record["version"] == __version__
    assert record["stable"] is True


def test_failed_gate_exits_with_two(config_path, tmp_path):
    config = json.loads(open(config_path).read())
    config["shape"] = {"kind": "ball", "radius": 1.0}
    config["psf"] = {"kind": "gaussian", "dim": 3}
    config["verify"] = {"first_order_a": 0.25, "subgrid": 2}
    config["tolerances"] = {"first_order": 1e-12}
    with open(config_path, "w") as f:
        json.dump(config, f)
    with pytest.raises(SystemExit) as e:
        run(config_path, "verify")
    assert e.value.code == 2
    frame = pd.read_csv(tmp_path / "out" / "verify.csv")
    assert frame["theorem"].tolist() == ["first_order"]
    assert frame["passed"].astype(str).str.lower().tolist() == ["false"]


def test_profile_table(config_path, tmp_path):
    path = tmp_path / "profile.txt"
    run(config_path, "profile", "-n", "21", "--output", str(path))
    table = np.loadtxt(path)
    assert table.shape == (21, 2)
    assert np.all(np.diff(table[:, 1]) <= 0.0)
