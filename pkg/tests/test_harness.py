from copy import deepcopy
from math import pi

import numpy as np
import pytest

from greytensors import __version__
from greytensors.exceptions import InvalidConfigException, ToleranceGateException
from greytensors.harness import Harness, check_gates, component_label, failed_gates
from greytensors.logger import LOGGER
from greytensors.types import EstimatorKind, TheoremKind


@pytest.fixture
def config(tmp_path):
    return {
        "shape": {"kind": "ball", "radius": 1.0},
        "psf": {"kind": "gaussian", "dim": 2},
        "estimator": {"kind": "volume", "r": 0, "beta": 0.5},
        "a_schedule": [0.125, 0.0625],
        "translations": 3,
        "seed": 3,
        "output": {"directory": str(tmp_path)},
    }


def harness(config, **changes):
    config = deepcopy(config)
    config.update(changes)
    return Harness(config=config, logger=LOGGER)


def test_component_label():
    assert component_label(()) == "()"
    assert component_label(np.array([0, 1])) == "(0, 1)"


def test_gates():
    rows = [
        {"theorem": TheoremKind.FIRST_ORDER, "passed": True},
        {"theorem": TheoremKind.SECOND_ORDER, "passed": False},
        {"source": "estimate", "k": 1, "r": 1, "passed": False},
    ]
    assert failed_gates(rows) == ["second_order", "mcmullen_estimate_k1_r1"]
    with pytest.raises(ToleranceGateException) as e:
        check_gates(rows)
    assert e.value.failed_gates == ["second_order", "mcmullen_estimate_k1_r1"]
    check_gates(rows[:1])


def test_dimension_mismatch(config):
    with pytest.raises(InvalidConfigException):
        harness(config, shape={"kind": "ball", "dim": 3})
    with pytest.raises(InvalidConfigException):
        harness(config, lattice={"basis": [[1.0, 0.0, 0.0]]})


def test_shape_takes_psf_dimension(config):
    h = harness(config)
    assert h.shape.dim == 2
    assert h.basis.tolist() == [[1.0, 0.0], [0.0, 1.0]]
    assert h.oracle()[()] == pytest.approx(pi)
    assert h.oracle(EstimatorKind.SURFACE2, 0, 0)[()] == pytest.approx(2 * pi)


def test_render_is_seeded(config):
    h = harness(config)
    first = h.render(0.125, 1)
    assert np.array_equal(first.values, h.render(0.125, 1).values)
    assert first.lattice.a == 0.125
    assert not np.array_equal(first.lattice.c, h.render(0.125, 0).lattice.c)


def test_estimate_rows(config):
    h = harness(config)
    results = h.estimate()
    assert [result.a for result in results] == [0.125, 0.0625]
    rows = h.estimate_rows(results)
    assert [row["a"] for row in rows] == [0.125, 0.0625]
    for row in rows:
        assert row["version"] == __version__
        assert row["component"] == "()"
        assert row["translations"] == 3
        assert row["estimate"] == pytest.approx(pi, rel=0.1)
        assert row["stderr"] >= 0.0


def test_estimate_image_matches_sampled_run(config):
    h = harness(config, translations=1)
    image = h.render(0.125, 0)
    [result] = h.estimate(0.125)
    assert h.estimate_image(image)[()] == pytest.approx(result.tensor[()])


def test_sweep_with_exact_expectation(config):
    rows = harness(config, expectation="exact").sweep()
    assert len(rows) == 2
    for row in rows:
        assert row["oracle"] == pytest.approx(pi)
        assert row["bias"] == pytest.approx(row["estimate"] - pi)
        assert row["abs_bias"] == abs(row["bias"])
        assert row["translations"] == 0
        assert row["stderr"] == 0.0
    assert rows[0]["slope"] == rows[1]["slope"]


def test_workers_do_not_change_results(config):
    serial = harness(config).sweep()
    parallel = harness(config, workers=2).sweep()
    assert serial == parallel


def test_extrapolate(config):
    h = harness(config, expectation="exact")
    limit = h.extrapolate(h.estimate())
    assert limit[()] == pytest.approx(pi, rel=0.02)


def test_configured_calibration(config):
    h = harness(
        config,
        estimator={"kind": "curvature", "r": 0},
        calibration={"C_g": 2.0, "I_g": -0.1},
    )
    calibration = h.calibrate()
    assert calibration.C_g == 2.0
    assert calibration.stable
    assert h.calibrate() is calibration
    assert h.estimator().calibration is calibration


def test_first_order_row(config):
    h = harness(config, verify={"method": "polar"})
    row = h.verify_first_order()
    assert row["theorem"] == TheoremKind.FIRST_ORDER
    assert row["a"] == pytest.approx(1 / 128)
    assert row["rhs"] == pytest.approx(16.105, abs=1e-3)
    assert row["passed"]


@pytest.mark.slow
def test_verify_on_unit_disc(config):
    rows = harness(config, verify={"method": "polar"}).verify()
    assert [row["theorem"] for row in rows] == [
        TheoremKind.FIRST_ORDER,
        TheoremKind.SECOND_ORDER,
        TheoremKind.FLAT_LIMIT,
    ]
    assert rows[0]["passed"]
    assert rows[1]["passed"]


@pytest.mark.slow
def test_mcmullen_check(config):
    calibration = {"a_schedule": [0.0625, 0.03125, 0.015625]}
    h = harness(config, a_schedule=[0.0625], translations=8, calibration=calibration)
    rows = h.mcmullen_check()
    oracle = [row for row in rows if row["source"] == "oracle"]
    estimates = [row for row in rows if row["source"] == "estimate"]
    assert oracle
    assert all(row["passed"] for row in oracle)
    assert {(row["k"], row["r"]) for row in estimates} == {(1, 1), (2, 2)}
    for row in estimates:
        assert row["a"] == 0.0625
        assert row["translations"] == 8
        assert np.isfinite(row["residual"])
        assert row["threshold"] > 0.0
