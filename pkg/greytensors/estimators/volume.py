from logging import Logger
from math import factorial

import numpy as np

from ..digitizer import ConfigOffsets
from ..logger import LOGGER
from ..psf.interfaces import PsfInterface
from ..tensors import SymTensor, multi_indices, sym_pow_batch
from ..types import EstimatorConfig
from .exceptions import InvalidEstimatorConfigException
from .interfaces import EstimatorInterface
from .weights import WeightSpec

DEFAULT_BETA = 0.5


class VolumeEstimator(EstimatorInterface):
    """a^d / r! * sum over lattice points with grey value >= beta of (a z)^r."""

    def __init__(self, config: EstimatorConfig, psf: PsfInterface, log: Logger = LOGGER) -> None:
        super().__init__(config=config, psf=psf, log=log)
        if self.__s__ != 0:
            raise InvalidEstimatorConfigException("volume tensors have no normal part, s must be 0")

        self.__beta = float(config.get("beta", DEFAULT_BETA))
        if not 0.0 < self.__beta < 1.0:
            raise InvalidEstimatorConfigException(f"beta must lie in (0, 1), got {self.__beta}")

    @property
    def beta(self) -> float:
        return self.__beta

    def weight_spec(self, basis: np.ndarray) -> WeightSpec:
        r = self.__r__
        scale = 1 / factorial(r)

        def weight(values: np.ndarray, positions: np.ndarray) -> np.ndarray:
            return scale * sym_pow_batch(positions, r)

        return WeightSpec(
            offsets=ConfigOffsets.single(self.dim),
            box=[[self.__beta, 1.0]],
            q=self.dim,
            weight=weight,
            n_components=len(multi_indices(self.dim, r)),
            metadata={"kind": str(self.__kind__), "r": r, "beta": self.__beta},
        )

    def finalize(self, raw: np.ndarray, basis: np.ndarray) -> SymTensor:
        return SymTensor(self.dim, self.__r__, raw)
