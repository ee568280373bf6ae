from logging import Logger
from math import pi, sqrt

import numpy as np
from scipy import special, stats

from ..logger import LOGGER
from ..types import PsfConfig
from .interfaces import TAIL_TOLERANCE, PsfInterface
from .profile import Profile


def _theta(t: np.ndarray) -> np.ndarray:
    return special.ndtr(-t)


def _theta_prime(t: np.ndarray) -> np.ndarray:
    return -np.exp(-0.5 * t * t) / sqrt(2 * pi)


def _phi(v: np.ndarray) -> np.ndarray:
    return -special.ndtri(v)


class GaussianPsf(PsfInterface):
    """Standard Gaussian PSF; theta is the complementary normal distribution function."""

    def __init__(self, config: PsfConfig, log: Logger = LOGGER) -> None:
        super().__init__(config=config, log=log)
        self.__support_radius__ = float(stats.chi(df=self.__dim__).isf(TAIL_TOLERANCE))
        self.__profile__ = Profile(
            theta=_theta,
            theta_prime=_theta_prime,
            monotone_window=(-np.inf, np.inf),
            max_slope=1 / sqrt(2 * pi),
            export_window=(-self.__support_radius__, self.__support_radius__),
            phi=_phi,
        )
        self._check_mass()

    def radial_density(self, r: np.ndarray) -> np.ndarray:
        return (2 * pi) ** (-self.__dim__ / 2) * np.exp(-0.5 * np.asarray(r) ** 2)
