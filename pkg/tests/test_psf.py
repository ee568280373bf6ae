import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given
from scipy import stats

from greytensors.psf import PSFS, make_psf
from greytensors.psf.ball import BallIndicatorPsf
from greytensors.psf.exceptions import (
    InvalidPsfConfigException,
    PsfDomainException,
    UnsupportedPsfException,
)
from greytensors.psf.gaussian import GaussianPsf
from greytensors.types import PsfKind

GAUSSIAN = make_psf({"kind": PsfKind.GAUSSIAN, "dim": 2})
DISC = make_psf({"kind": PsfKind.BALL_INDICATOR, "dim": 2, "radius": 1.0})

levels = st.floats(min_value=0.01, max_value=0.99)


def test_registry():
    assert set(PSFS) == {PsfKind.GAUSSIAN, PsfKind.BALL_INDICATOR}
    assert isinstance(GAUSSIAN, GaussianPsf)
    assert isinstance(DISC, BallIndicatorPsf)


def test_unknown_kind():
    with pytest.raises(UnsupportedPsfException):
        make_psf({"kind": "airy", "dim": 2})


def test_missing_dimension():
    with pytest.raises(InvalidPsfConfigException):
        make_psf({"kind": PsfKind.GAUSSIAN})


def test_nonpositive_ball_radius():
    with pytest.raises(InvalidPsfConfigException):
        make_psf({"kind": PsfKind.BALL_INDICATOR, "dim": 2, "radius": 0.0})


def test_ball_profile_needs_low_dimension():
    with pytest.raises(UnsupportedPsfException):
        make_psf({"kind": PsfKind.BALL_INDICATOR, "dim": 4})


def test_gaussian_theta_is_normal_tail():
    assert GAUSSIAN.profile.theta(1.0) == pytest.approx(stats.norm.sf(1.0), abs=1e-9)
    assert GAUSSIAN.profile.theta(0.0) == pytest.approx(0.5, abs=1e-15)


def test_gaussian_support_radius():
    assert GAUSSIAN.support_radius == pytest.approx(6.44, abs=0.01)
    three = make_psf({"kind": PsfKind.GAUSSIAN, "dim": 3})
    assert three.support_radius > GAUSSIAN.support_radius


@given(levels)
def test_gaussian_phi_inverts_theta(v):
    assert GAUSSIAN.profile.theta(GAUSSIAN.profile.phi(v)) == pytest.approx(v, abs=1e-9)


@given(levels)
def test_disc_phi_inverts_theta(v):
    assert DISC.profile.theta(DISC.profile.phi(v)) == pytest.approx(v, abs=1e-9)


@given(
    st.floats(min_value=-3.0, max_value=3.0),
    st.floats(min_value=0.0, max_value=2 * np.pi),
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=-1.0, max_value=1.0),
)
def test_coordinate_identity(t, angle, v0, v1):
    u = np.array([np.cos(angle), np.sin(angle)])
    v = np.array([v0, v1])
    profile = GAUSSIAN.profile
    shifted = profile.phi(profile.theta(t + float(u @ v))) - profile.phi(profile.theta(t))
    assert shifted == pytest.approx(float(u @ v), abs=1e-9)


def test_disc_profile_values():
    profile = DISC.profile
    assert profile.theta(0.0) == pytest.approx(0.5)
    assert profile.theta(1.0) == pytest.approx(0.0)
    assert profile.theta(-1.0) == pytest.approx(1.0)
    assert profile.theta(2.0) == 0.0
    assert profile.monotone_window == (-1.0, 1.0)


def test_ball_profile_in_three_dimensions():
    profile = make_psf({"kind": PsfKind.BALL_INDICATOR, "dim": 3, "radius": 2.0}).profile
    assert profile.theta(0.0) == pytest.approx(0.5)
    assert profile.theta_prime(0.0) == pytest.approx(-3 / 8)


def test_theta_is_non_increasing():
    t = np.linspace(-2.0, 2.0, 401)
    for psf in (GAUSSIAN, DISC):
        assert np.all(np.diff(psf.profile.theta(t)) <= 0.0)


def test_phi_outside_unit_interval():
    with pytest.raises(PsfDomainException) as e:
        GAUSSIAN.profile.phi(1.0)
    assert e.value.value == 1.0
    with pytest.raises(PsfDomainException):
        DISC.profile.phi(np.array([0.5, 0.0]))


def test_scaled_density():
    x = np.array([[0.3, 0.4]])
    assert GAUSSIAN.scaled_density(0.5, x) == pytest.approx(4 * GAUSSIAN.density(x / 0.5))
    with pytest.raises(PsfDomainException):
        GAUSSIAN.scaled_density(0.0, x)


def test_density_is_radial():
    assert GAUSSIAN.density(np.array([3.0, 4.0])) == pytest.approx(
        GAUSSIAN.radial_density(np.array(5.0))
    )
    assert DISC.density(np.array([0.0, 1.5])) == 0.0


def test_built_in_psfs_are_rotation_invariant():
    assert GAUSSIAN.rotation_invariant
    assert DISC.rotation_invariant


def test_regular_values():
    assert GAUSSIAN.regular_value(0.5)
    assert not GAUSSIAN.regular_value(0.0)
    assert not DISC.regular_value(1.0)


def test_validate_conditions():
    report = DISC.validate_conditions(0.1, 0.9, 0.05)
    assert report.valid
    assert report.slack > 0.0
    assert not DISC.validate_conditions(0.1, 0.9, 0.5).valid
    bad = GAUSSIAN.validate_conditions(0.9, 0.1, 1.0)
    assert not bad.valid
    assert bad.reason


def test_profile_export(tmp_path):
    path = tmp_path / "profile.txt"
    GAUSSIAN.profile.export(str(path), points=11)
    table = np.loadtxt(path)
    assert table.shape == (11, 2)
    assert table[5, 0] == pytest.approx(0.0, abs=1e-12)
    assert table[5, 1] == pytest.approx(0.5)
