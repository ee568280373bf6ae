from math import pi
from unittest.mock import Mock

import numpy as np
import pytest

from greytensors.digitizer import GreyImage, Lattice, render, window_for_shape
from greytensors.estimators import ESTIMATORS, make_estimator
from greytensors.estimators.calibration import calibrate_curvature
from greytensors.estimators.curvature import (
    CurvatureEstimator,
    OddWeight,
    compute_Ig,
    make_odd_weight,
)
from greytensors.estimators.exceptions import (
    CalibrationException,
    InvalidEstimatorConfigException,
    InvalidWeightException,
)
from greytensors.estimators.sampling import mean_estimate
from greytensors.estimators.types import CurvatureCalibration
from greytensors.exceptions import WindowTooSmallException
from greytensors.psf import make_psf
from greytensors.shapes import make_shape
from greytensors.shapes.oracle import surface_tensor_oracle, volume_tensor_oracle
from greytensors.tensors import SymTensor
from greytensors.types import (
    CurvatureWeightKind,
    EstimatorKind,
    ExpectationMode,
    PsfKind,
    ShapeKind,
)
from greytensors.utils import log_log_slope

GAUSSIAN = make_psf({"kind": PsfKind.GAUSSIAN, "dim": 2})
UNIT_DISC = make_shape({"kind": ShapeKind.BALL, "dim": 2, "radius": 1.0})
GAUSSIAN_3D = make_psf({"kind": PsfKind.GAUSSIAN, "dim": 3})
UNIT_BALL = make_shape({"kind": ShapeKind.BALL, "dim": 3, "radius": 1.0})
CALIBRATION = CurvatureCalibration(
    C_g=2.0, I_g=0.5, g="linear", beta=0.1, stable=True, theory=2.0, limits=(2.0,)
)


def estimator(kind, **config):
    return make_estimator({"kind": kind, **config}, GAUSSIAN)


def test_registry():
    assert set(ESTIMATORS) == set(EstimatorKind)


@pytest.mark.parametrize(
    "config",
    [
        {"kind": "euler"},
        {"kind": ""},
        {"kind": EstimatorKind.VOLUME, "s": 1},
        {"kind": EstimatorKind.VOLUME, "beta": 1.0},
        {"kind": EstimatorKind.VOLUME, "r": -1},
        {"kind": EstimatorKind.SURFACE2, "r": 3, "s": 2},
        {"kind": EstimatorKind.SURFACE2, "beta": 0.6, "omega": 0.4},
        {"kind": EstimatorKind.SURFACE2, "epsilon": -0.1},
        {"kind": EstimatorKind.CURVATURE, "s": 1},
    ],
)
def test_invalid_configs(config):
    with pytest.raises(InvalidEstimatorConfigException):
        make_estimator(config, GAUSSIAN)


def test_centred_surface_ignores_omega():
    log = Mock()
    config = {"kind": EstimatorKind.SURFACE3, "beta": 0.2, "omega": 0.7}
    surface = make_estimator(config, GAUSSIAN, log)
    assert surface.omega == pytest.approx(0.8)
    log.warning.assert_called_once()


def test_volume_counts_pixels():
    values = np.zeros((5, 5))
    values[2, 1:4] = [0.5, 0.9, 0.7]
    values[1, 2] = 0.49
    image = GreyImage(Lattice.standard(2, 0.5), ((0, 5), (0, 5)), values)
    assert estimator(EstimatorKind.VOLUME).estimate(image)[()] == pytest.approx(0.75)
    vector = estimator(EstimatorKind.VOLUME, r=1).estimate(image)
    assert vector.components.tolist() == pytest.approx([0.25 * 3 * 1.0, 0.25 * 3 * 1.0])


@pytest.mark.parametrize(
    "kind, count, n", [(EstimatorKind.SURFACE2, 4, 2), (EstimatorKind.SURFACE3, 7, 3)]
)
def test_surface_configurations_in_three_dimensions(kind, count, n):
    spec = make_estimator({"kind": kind}, GAUSSIAN_3D).weight_spec(np.eye(3))
    assert len(spec.offsets) == count
    assert spec.offsets.n == n
    assert spec.box.shape == (count, 2)
    assert np.abs(spec.offsets.offsets).sum(axis=1).max() == 1.0


def test_volume_counts_voxels():
    values = np.zeros((5, 5, 5))
    values[2, 2, 1:4] = [0.7, 0.9, 0.3]
    image = GreyImage(Lattice.standard(3, 0.5), ((0, 5),) * 3, values)
    volume = make_estimator({"kind": EstimatorKind.VOLUME}, GAUSSIAN_3D)
    assert volume.estimate(image)[()] == pytest.approx(0.25)

    values[0, 4, 2] = 0.9
    with pytest.raises(WindowTooSmallException):
        volume.estimate(GreyImage(Lattice.standard(3, 0.5), ((0, 5),) * 3, values))


@pytest.mark.parametrize(
    "kind", [EstimatorKind.VOLUME, EstimatorKind.SURFACE2, EstimatorKind.SURFACE3]
)
def test_empty_image_gives_zero(kind):
    image = GreyImage(Lattice.standard(2, 0.1), ((0, 8), (0, 8)), np.zeros((8, 8)))
    tensor = estimator(kind, r=1, s=0).estimate(image)
    assert tensor.max_norm() == 0.0


def test_lattice_shift_leaves_counts_unchanged():
    lattice = Lattice.standard(2, 1 / 16, [0.3, 0.6])
    moved = UNIT_DISC.translated(np.array([3.0, -2.0]) / 16)
    for kind in (EstimatorKind.VOLUME, EstimatorKind.SURFACE2):
        e = estimator(kind)
        offsets = e.weight_spec(lattice.basis).offsets
        first, second = (
            render(shape, GAUSSIAN, lattice, window_for_shape(shape, GAUSSIAN, lattice, offsets))
            for shape in (UNIT_DISC, moved)
        )
        assert e.estimate(second)[()] == pytest.approx(e.estimate(first)[()], rel=1e-9)


def test_odd_weights():
    linear = make_odd_weight(CurvatureWeightKind.LINEAR, 0.1)
    values = linear(np.array([0.05, 0.2, 0.5, 0.95]))
    assert values.tolist() == pytest.approx([0.0, -0.3, 0.0, 0.0])
    step = make_odd_weight(CurvatureWeightKind.STEP, 0.1)
    assert step(np.array([0.3, 0.7])).tolist() == [1.0, -1.0]
    assert step.breaks == (0.5,)
    with pytest.raises(InvalidWeightException):
        OddWeight("even", 0.1, lambda x: np.ones_like(x))
    with pytest.raises(InvalidWeightException):
        make_odd_weight(CurvatureWeightKind.LINEAR, 0.5)


def test_Ig_of_zero_weight():
    zero = OddWeight("zero", 0.1, np.zeros_like)
    assert compute_Ig(GAUSSIAN.profile, zero) == 0.0


def test_Ig_of_linear_weight_is_negative():
    assert compute_Ig(GAUSSIAN.profile, make_odd_weight(CurvatureWeightKind.LINEAR, 0.1)) < 0.0


def test_Ig_of_step_weight():
    step = make_odd_weight(CurvatureWeightKind.STEP, 0.1)
    t = float(GAUSSIAN.profile.phi(0.1))
    assert compute_Ig(GAUSSIAN.profile, step) == pytest.approx(t**2, abs=1e-8)


def test_curvature_needs_calibration():
    image = GreyImage(Lattice.standard(2, 0.1), ((0, 4), (0, 4)), np.zeros((4, 4)))
    curvature = estimator(EstimatorKind.CURVATURE)
    with pytest.raises(CalibrationException):
        curvature.estimate(image)
    degenerate = curvature.with_calibration(CALIBRATION._replace(C_g=0.0))
    with pytest.raises(CalibrationException):
        degenerate.estimate(image)


def test_curvature_correction():
    curvature = CurvatureEstimator({"kind": EstimatorKind.CURVATURE, "r": 2}, GAUSSIAN)
    curvature = curvature.with_calibration(CALIBRATION)
    corrected = curvature.correct(SymTensor(2, 2, [5.0, 0.0, 5.0]), SymTensor.scalar(1.0, 2))
    assert corrected[0, 0] == pytest.approx(1.0)
    assert corrected[0, 1] == pytest.approx(0.0)
    with pytest.raises(CalibrationException):
        curvature.correct(SymTensor(2, 2, [5.0, 0.0, 5.0]), None)
    with pytest.raises(CalibrationException):
        curvature.finalize(np.zeros(3), np.eye(2))


def test_rank_zero_curvature_divides_by_constant():
    curvature = estimator(EstimatorKind.CURVATURE).with_calibration(CALIBRATION)
    assert curvature.finalize(np.array([3.0]), np.eye(2))[()] == pytest.approx(1.5)


def sampled(e, shape, a=1 / 64):
    return mean_estimate(e, shape, a, translation_count=32, seed=1).tensor


@pytest.mark.slow
def test_volume_of_unit_disc():
    assert sampled(estimator(EstimatorKind.VOLUME), UNIT_DISC)[()] == pytest.approx(pi, rel=0.01)
    second = sampled(estimator(EstimatorKind.VOLUME, r=2), UNIT_DISC)
    assert second[0, 0] == pytest.approx(pi / 8, rel=0.02)


@pytest.mark.slow
def test_surface_tensors_of_unit_circle():
    assert sampled(estimator(EstimatorKind.SURFACE2), UNIT_DISC)[()] == pytest.approx(
        2 * pi, rel=0.02
    )
    mixed = sampled(estimator(EstimatorKind.SURFACE2, r=1, s=1), UNIT_DISC)
    assert mixed[0, 0] == pytest.approx(1.0, rel=0.03)
    normals = sampled(estimator(EstimatorKind.SURFACE2, s=1), UNIT_DISC)
    assert normals.max_norm() < 0.05


@pytest.mark.slow
@pytest.mark.parametrize(
    "kind, slope", [(EstimatorKind.SURFACE2, 0.8), (EstimatorKind.SURFACE3, 1.3)]
)
def test_bias_order(kind, slope):
    schedule = (1 / 16, 1 / 32, 1 / 64)
    e = estimator(kind)
    biases = [
        mean_estimate(e, UNIT_DISC, a, 0, 0, expectation=ExpectationMode.EXACT).tensor[()] - 2 * pi
        for a in schedule
    ]
    assert log_log_slope(schedule, biases) >= slope


@pytest.mark.slow
def test_curvature_tensors_of_discs():
    calibration = calibrate_curvature(GAUSSIAN)
    assert calibration.stable
    assert calibration.limits[1] == pytest.approx(calibration.limits[0], rel=0.01)
    assert calibration.C_g == pytest.approx(calibration.theory, rel=0.05)

    curvature = estimator(EstimatorKind.CURVATURE).with_calibration(calibration)
    small = make_shape({"kind": ShapeKind.BALL, "dim": 2, "radius": 0.7})
    exact = ExpectationMode.EXACT
    assert mean_estimate(curvature, small, 1 / 64, 0, 0, expectation=exact).tensor[()] == (
        pytest.approx(1.0, rel=0.02)
    )
    second = estimator(EstimatorKind.CURVATURE, r=2).with_calibration(calibration)
    tensor = mean_estimate(second, UNIT_DISC, 1 / 64, 0, 0, expectation=exact).tensor
    assert tensor[0, 0] == pytest.approx(0.25, rel=0.05)


@pytest.mark.slow
def test_tensors_of_unit_ball():
    def estimate(kind, r=0, s=0):
        e = make_estimator({"kind": kind, "r": r, "s": s}, GAUSSIAN_3D)
        return mean_estimate(e, UNIT_BALL, 1 / 32, translation_count=4, seed=2).tensor

    volume = volume_tensor_oracle(UNIT_BALL, 0)[()]
    surface = surface_tensor_oracle(UNIT_BALL, 0, 0)[()]
    assert volume == pytest.approx(4 * pi / 3, rel=1e-6)
    assert surface == pytest.approx(4 * pi, rel=1e-6)
    assert estimate(EstimatorKind.VOLUME)[()] == pytest.approx(volume, rel=0.01)
    assert estimate(EstimatorKind.SURFACE2)[()] == pytest.approx(surface, rel=0.1)
    assert estimate(EstimatorKind.SURFACE3)[()] == pytest.approx(surface, rel=0.03)
    mixed = estimate(EstimatorKind.SURFACE3, r=1, s=1)
    assert mixed[0, 0] == pytest.approx(surface_tensor_oracle(UNIT_BALL, 1, 1)[0, 0], rel=0.05)
