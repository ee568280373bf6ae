from logging import Logger
from math import gamma, pi

import numpy as np

from ..logger import LOGGER
from ..types import PsfConfig
from .exceptions import InvalidPsfConfigException, UnsupportedPsfException
from .interfaces import PsfInterface
from .profile import Profile


def _segment_profile(radius: float, dim: int):
    """Fraction of the ball B(radius) beyond the hyperplane at distance t, and its derivative."""
    if dim == 1:

        def theta(t: np.ndarray) -> np.ndarray:
            return (radius - np.clip(t, -radius, radius)) / (2 * radius)

        def theta_prime(t: np.ndarray) -> np.ndarray:
            return np.where(np.abs(t) < radius, -1 / (2 * radius), 0.0)

        return theta, theta_prime, 1 / (2 * radius)

    if dim == 2:

        def theta(t: np.ndarray) -> np.ndarray:
            c = np.clip(t, -radius, radius)
            chord = np.sqrt(np.maximum(radius**2 - c**2, 0.0))
            return (radius**2 * np.arccos(c / radius) - c * chord) / (pi * radius**2)

        def theta_prime(t: np.ndarray) -> np.ndarray:
            c = np.clip(t, -radius, radius)
            return -2 * np.sqrt(np.maximum(radius**2 - c**2, 0.0)) / (pi * radius**2)

        return theta, theta_prime, 2 / (pi * radius)

    if dim == 3:

        def theta(t: np.ndarray) -> np.ndarray:
            h = radius - np.clip(t, -radius, radius)
            return h**2 * (3 * radius - h) / (4 * radius**3)

        def theta_prime(t: np.ndarray) -> np.ndarray:
            c = np.clip(t, -radius, radius)
            return -3 * (radius**2 - c**2) / (4 * radius**3)

        return theta, theta_prime, 3 / (4 * radius)

    raise UnsupportedPsfException(f"ball indicator profile is implemented for d <= 3, got d={dim}")


class BallIndicatorPsf(PsfInterface):
    """Uniform density on the ball of radius R_B; compactly supported with D_eff = R_B."""

    def __init__(self, config: PsfConfig, log: Logger = LOGGER) -> None:
        super().__init__(config=config, log=log)
        radius = float(config.get("radius", 1.0))
        if not radius > 0.0:
            raise InvalidPsfConfigException(f"ball radius must be positive, got {radius}")

        self.__radius = radius
        d = self.__dim__
        self.__volume = pi ** (d / 2) * radius**d / gamma(d / 2 + 1)
        self.__support_radius__ = radius

        theta, theta_prime, max_slope = _segment_profile(radius, self.__dim__)
        self.__profile__ = Profile(
            theta=theta,
            theta_prime=theta_prime,
            monotone_window=(-radius, radius),
            max_slope=max_slope,
            export_window=(-radius, radius),
        )
        self._check_mass()

    @property
    def radius(self) -> float:
        return self.__radius

    def radial_density(self, r: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(r) <= self.__radius, 1 / self.__volume, 0.0)
