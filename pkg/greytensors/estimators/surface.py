"""Surface tensor estimators from forward (2^n) and centred (3^n) configurations.

For lattice basis vectors v_i, phi(theta(x + a v)) - phi(theta(x)) tends to <v, u(x)>, so
products of such differences with <x, v_i> estimate evaluations of x^r u^s on the basis.
The evaluation table is solved against the dual basis and symmetrized at the end.
"""

from abc import abstractmethod
from functools import cached_property
from logging import Logger
from math import factorial

import numpy as np

from ..digitizer import ConfigOffsets
from ..logger import LOGGER
from ..psf.interfaces import PsfInterface
from ..tensors import SymTensor, from_basis_evaluations, multi_indices, sphere_area
from ..types import EstimatorConfig
from .exceptions import InvalidEstimatorConfigException, PsfConditionException
from .interfaces import EstimatorInterface
from .weights import WeightSpec

DEFAULT_BETA = 0.1
DEFAULT_OMEGA = 0.9
DEFAULT_EPSILON = 0.01

IndexPair = tuple[tuple[int, ...], tuple[int, ...]]


def _products(
    projections: np.ndarray, differences: list[np.ndarray], pairs: list[IndexPair]
) -> np.ndarray:
    columns = []
    for position_index, normal_index in pairs:
        position_part = np.prod(projections[:, list(position_index)], axis=1)
        normal_part = sum(np.prod(d[:, list(normal_index)], axis=1) for d in differences)
        columns.append(position_part * normal_part)
    return np.stack(columns, axis=1)


class SurfaceEstimatorInterface(EstimatorInterface):
    __beta__: float
    __omega__: float
    __epsilon__: float

    def __init__(self, config: EstimatorConfig, psf: PsfInterface, log: Logger = LOGGER) -> None:
        super().__init__(config=config, psf=psf, log=log)
        self.__beta__ = float(config.get("beta", DEFAULT_BETA))
        self.__omega__ = float(config.get("omega", DEFAULT_OMEGA))
        self.__epsilon__ = float(config.get("epsilon", DEFAULT_EPSILON))

    def _check_thresholds(self) -> None:
        if not 0.0 < self.__beta__ < self.__omega__ < 1.0:
            raise InvalidEstimatorConfigException(
                f"need 0 < beta < omega < 1, got beta={self.__beta__}, omega={self.__omega__}"
            )
        if self.__epsilon__ < 0.0:
            raise InvalidEstimatorConfigException(f"epsilon must be >= 0, got {self.__epsilon__}")

    @property
    def beta(self) -> float:
        return self.__beta__

    @property
    def omega(self) -> float:
        return self.__omega__

    @property
    def epsilon(self) -> float:
        return self.__epsilon__

    @cached_property
    def pairs(self) -> list[IndexPair]:
        """Sorted position and normal index parts, one per raw weight component."""
        return [
            (position_index, normal_index)
            for position_index in multi_indices(self.dim, self.__r__)
            for normal_index in multi_indices(self.dim, self.__s__)
        ]

    def neighbour_box(self, V: float) -> tuple[float, float]:
        """Grey values a neighbour can take while the centre lies in [beta, omega]."""
        report = self.__psf__.validate_conditions(
            self.__beta__, self.__omega__, V + self.__epsilon__
        )
        if not report.valid:
            raise PsfConditionException(report.reason)
        profile = self.__psf__.profile
        t_lo, t_hi = report.window
        return float(profile.theta(t_hi)), float(profile.theta(t_lo))

    @abstractmethod
    def normalization(self) -> float:
        """Length of the profile window the centre grey value sweeps, times the difference count."""
        pass

    def finalize(self, raw: np.ndarray, basis: np.ndarray) -> SymTensor:
        r, s = self.__r__, self.__s__
        lookup = {pair: i for i, pair in enumerate(self.pairs)}
        evaluations = np.empty((self.dim,) * (r + s))
        for position in np.ndindex(evaluations.shape):
            key = (tuple(sorted(position[:r])), tuple(sorted(position[r:])))
            evaluations[position] = raw[lookup[key]]

        factor = 2 / (factorial(r) * factorial(s) * sphere_area(s + 1) * self.normalization())
        return from_basis_evaluations(evaluations, basis) * factor


class SurfaceEstimator2(SurfaceEstimatorInterface):
    """Configurations {0, v_1, ..., v_d}; first-order bias O(a)."""

    def __init__(self, config: EstimatorConfig, psf: PsfInterface, log: Logger = LOGGER) -> None:
        super().__init__(config=config, psf=psf, log=log)
        self._check_thresholds()

    def normalization(self) -> float:
        phi = self.__psf__.profile.phi
        return float(phi(self.__beta__)) - float(phi(self.__omega__))

    def weight_spec(self, basis: np.ndarray) -> WeightSpec:
        basis = np.asarray(basis, dtype=np.float64)
        V = float(np.max(np.linalg.norm(basis, axis=1)))
        lo, hi = self.neighbour_box(V)
        phi = self.__psf__.profile.phi
        pairs = self.pairs

        def weight(values: np.ndarray, positions: np.ndarray) -> np.ndarray:
            t = np.asarray(phi(values))
            return _products(positions @ basis.T, [t[:, 1:] - t[:, :1]], pairs)

        spec = WeightSpec(
            offsets=ConfigOffsets.forward(self.dim),
            box=[[self.__beta__, self.__omega__]] + [[lo, hi]] * self.dim,
            q=1,
            weight=weight,
            n_components=len(pairs),
            metadata={
                "kind": str(self.__kind__),
                "r": self.__r__,
                "s": self.__s__,
                "beta": self.__beta__,
                "omega": self.__omega__,
                "epsilon": self.__epsilon__,
            },
        )
        spec.check_regular(self.__psf__.profile)
        return spec


class SurfaceEstimator3(SurfaceEstimatorInterface):
    """Configurations {0, +-v_1, ..., +-v_d} with omega = 1 - beta.

    Forward and backward difference products are summed, which cancels the first-order
    bias of the forward estimator on sets with a smooth boundary.
    """

    def __init__(self, config: EstimatorConfig, psf: PsfInterface, log: Logger = LOGGER) -> None:
        super().__init__(config=config, psf=psf, log=log)
        if "omega" in config and float(config["omega"]) != 1.0 - self.__beta__:
            log.warning(f"centred surface estimator uses omega = 1 - beta, ignoring {config['omega']}")
        self.__omega__ = 1.0 - self.__beta__
        self._check_thresholds()

    def normalization(self) -> float:
        phi = self.__psf__.profile.phi
        return 2 * (float(phi(self.__beta__)) - float(phi(self.__omega__)))

    def weight_spec(self, basis: np.ndarray) -> WeightSpec:
        basis = np.asarray(basis, dtype=np.float64)
        V = float(np.max(np.linalg.norm(basis, axis=1)))
        lo, hi = self.neighbour_box(V)
        phi = self.__psf__.profile.phi
        pairs = self.pairs
        d = self.dim

        def weight(values: np.ndarray, positions: np.ndarray) -> np.ndarray:
            t = np.asarray(phi(values))
            forward = t[:, 1 : 1 + d] - t[:, :1]
            backward = t[:, :1] - t[:, 1 + d :]
            return _products(positions @ basis.T, [forward, backward], pairs)

        spec = WeightSpec(
            offsets=ConfigOffsets.symmetric(d),
            box=[[self.__beta__, self.__omega__]] + [[lo, hi]] * (2 * d),
            q=1,
            weight=weight,
            n_components=len(pairs),
            metadata={
                "kind": str(self.__kind__),
                "r": self.__r__,
                "s": self.__s__,
                "beta": self.__beta__,
                "epsilon": self.__epsilon__,
            },
        )
        spec.check_regular(self.__psf__.profile)
        return spec
