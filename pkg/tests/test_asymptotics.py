from math import pi

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given

from greytensors.asymptotics import (
    SmoothBump,
    finite_difference_gradients,
    first_order_lhs,
    first_order_rhs,
    indicator_spec,
    richardson,
    second_order_empirical,
    second_order_rhs,
    second_order_rhs_disk,
    t_bounds_psi,
    theta_Q,
    theta_Q_quadrature,
)
from greytensors.estimators.exceptions import InvalidWeightException
from greytensors.exceptions import (
    EmptyWindowException,
    ExtrapolationException,
    IntegrationException,
)
from greytensors.integrals import POLAR
from greytensors.psf import make_psf
from greytensors.psf.exceptions import UnsupportedPsfException
from greytensors.psf.gaussian import GaussianPsf
from greytensors.shapes import make_shape
from greytensors.shapes.exceptions import UnsupportedShapeException
from greytensors.types import PsfKind, ShapeKind

GAUSSIAN = make_psf({"kind": PsfKind.GAUSSIAN, "dim": 2})
DISC_PSF = make_psf({"kind": PsfKind.BALL_INDICATOR, "dim": 2, "radius": 1.0})
UNIT_DISC = make_shape({"kind": ShapeKind.BALL, "dim": 2, "radius": 1.0})
FIRST_ORDER = 2 * pi * float(GAUSSIAN.profile.phi(0.1) - GAUSSIAN.profile.phi(0.9))


def test_richardson_recovers_polynomial_limit():
    a = [0.5, 0.25, 0.125]
    result = richardson(a, [2.0 + 3.0 * x - x**2 for x in a])
    assert result.limit == pytest.approx(2.0)
    assert result.stable
    assert result.a_values == tuple(a)
    squared = richardson(a, [1.0 + x**2 for x in a], exponent=2.0)
    assert squared.limit == pytest.approx(1.0)


def test_richardson_flags_flat_residuals():
    assert not richardson([0.5, 0.25], [1.0, 1.0]).stable


@pytest.mark.parametrize(
    "a_values, values",
    [
        ([0.5], [1.0]),
        ([0.25, 0.5], [1.0, 2.0]),
        ([0.5, 0.25], [1.0]),
        ([0.5, 0.25], [1.0, float("nan")]),
    ],
)
def test_richardson_rejects_bad_input(a_values, values):
    with pytest.raises(ExtrapolationException):
        richardson(a_values, values)


def test_smooth_bump():
    bump = SmoothBump(0.2, 0.7, 0.05)
    assert bump.breaks == pytest.approx((0.25, 0.65))
    values = bump(np.array([0.1, 0.2, 0.45, 0.7, 0.8]))
    assert values.tolist() == pytest.approx([0.0, 0.0, 1.0, 0.0, 0.0])
    assert 0.0 < float(bump(0.22)) < 1.0


@given(st.floats(min_value=0.21, max_value=0.69))
def test_bump_derivative(v):
    bump = SmoothBump(0.2, 0.7, 0.05)
    h = 1e-6
    numeric = (float(bump(v + h)) - float(bump(v - h))) / (2 * h)
    assert float(bump.derivative(v)) == pytest.approx(numeric, abs=1e-4)


def test_bump_rejects_narrow_support():
    with pytest.raises(InvalidWeightException):
        SmoothBump(0.4, 0.45, 0.05)
    with pytest.raises(InvalidWeightException):
        SmoothBump(0.0, 0.5, 0.05)


def test_finite_difference_gradients():
    spec = SmoothBump().spec(2)
    values = np.array([[0.21], [0.5], [0.69]])
    positions = np.zeros((3, 2))
    grey, position = finite_difference_gradients(spec, values, positions)
    assert grey.shape == (3, 1, 1)
    assert position.shape == (3, 2, 1)
    assert grey[:, 0, 0] == pytest.approx(SmoothBump().derivative(values[:, 0]), abs=1e-3)
    assert np.abs(position).max() == 0.0


def test_first_order_rhs_of_indicator():
    rhs = first_order_rhs(UNIT_DISC, GAUSSIAN, indicator_spec(0.1, 0.9, 2))
    assert rhs[0] == pytest.approx(FIRST_ORDER, rel=1e-8)
    assert FIRST_ORDER == pytest.approx(16.105, abs=1e-3)


def test_first_order_limit_on_unit_disc():
    lhs = first_order_lhs(UNIT_DISC, GAUSSIAN, indicator_spec(0.1, 0.9, 2), 1 / 128, method=POLAR)
    assert lhs[0] == pytest.approx(FIRST_ORDER, rel=0.01)


@pytest.mark.parametrize(
    "psf, t, s",
    [
        (GAUSSIAN, 0.3, [0.2, -0.1]),
        (GAUSSIAN, -1.2, [0.0, 0.5]),
        (DISC_PSF, 0.2, [0.3, 0.1]),
        (DISC_PSF, -0.4, [-0.5, 0.0]),
    ],
)
def test_theta_Q_matches_quadrature(psf, t, s):
    closed = float(theta_Q(t, np.array(s), 1.0, psf))
    assert closed == pytest.approx(theta_Q_quadrature(t, np.array(s), 1.0, psf), abs=1e-8)


def test_theta_Q_needs_planar_ball_psf():
    ball = make_psf({"kind": PsfKind.BALL_INDICATOR, "dim": 3})
    with pytest.raises(UnsupportedPsfException):
        theta_Q(0.0, np.zeros(3), np.ones(2), ball)


class AnisotropicPsf(GaussianPsf):
    @property
    def rotation_invariant(self) -> bool:
        return False


def test_theta_Q_needs_rotation_invariant_psf():
    psf = AnisotropicPsf({"kind": PsfKind.GAUSSIAN, "dim": 2})
    with pytest.raises(UnsupportedPsfException):
        theta_Q(0.0, np.zeros(2), 1.0, psf)
    with pytest.raises(UnsupportedPsfException):
        theta_Q_quadrature(0.0, np.zeros(2), 1.0, psf)


def test_shift_at_unit_curvature():
    terms = t_bounds_psi(indicator_spec(0.1, 0.9, 2), GAUSSIAN, 1.0, [[1.0, 0.0], [0.0, 1.0]])
    assert terms.t0 == pytest.approx([float(GAUSSIAN.profile.phi(0.9))] * 2)
    assert terms.t1 == pytest.approx([float(GAUSSIAN.profile.phi(0.1))] * 2)
    assert terms.psi0 == pytest.approx([-0.5, -0.5], abs=1e-8)
    assert terms.psi1 == pytest.approx([-0.5, -0.5], abs=1e-8)


def test_window_errors():
    with pytest.raises(EmptyWindowException):
        t_bounds_psi(indicator_spec(0.3, 0.3, 2), GAUSSIAN, 1.0, [[1.0, 0.0]])
    with pytest.raises(IntegrationException):
        t_bounds_psi(indicator_spec(0.0, 0.5, 2), GAUSSIAN, 1.0, [[1.0, 0.0]])


def test_second_order_terms_are_planar():
    ball = make_shape({"kind": ShapeKind.BALL, "dim": 3})
    with pytest.raises(UnsupportedShapeException):
        second_order_rhs(ball, GAUSSIAN, indicator_spec(0.1, 0.9, 3))


def test_second_order_rhs_of_indicator():
    terms = second_order_rhs_disk(1.0, GAUSSIAN, indicator_spec(0.1, 0.9, 2))
    t0 = float(GAUSSIAN.profile.phi(0.9))
    t1 = float(GAUSSIAN.profile.phi(0.1))
    assert terms.curvature_term == pytest.approx(pi * (t1**2 - t0**2), abs=1e-8)
    assert terms.gradient_term == pytest.approx(0.0, abs=1e-8)
    assert terms.boundary_term == pytest.approx(0.0, abs=1e-8)


@pytest.mark.slow
def test_second_order_limit_of_bump():
    bump = SmoothBump()
    spec = bump.spec(2)

    def zero(values, positions):
        return np.zeros((values.shape[0], 2, 1))

    rhs = second_order_rhs_disk(
        1.0, GAUSSIAN, spec, grey_gradient=bump.grey_gradient, position_gradient=zero
    )
    empirical = second_order_empirical(UNIT_DISC, GAUSSIAN, spec, [1 / 8, 1 / 16, 1 / 32])
    assert empirical.limit == pytest.approx(rhs.total, rel=0.10)
