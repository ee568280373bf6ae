from abc import abstractmethod
from logging import Logger
from typing import Protocol

import numpy as np

from .. import integrals
from ..digitizer import GreyImage
from ..logger import LOGGER
from ..psf.interfaces import PsfInterface
from ..shapes.interfaces import ShapeInterface
from ..shapes.oracle import RANK_CAP
from ..tensors import SymTensor
from ..types import EstimatorConfig, EstimatorKind
from .exceptions import InvalidEstimatorConfigException
from .weights import WeightSpec, local_sum

REQUIRED_CONFIG_FIELDS = ["kind"]


class EstimatorInterface(Protocol):
    __kind__: EstimatorKind
    __config__: EstimatorConfig
    __psf__: PsfInterface
    __log__: Logger
    __r__: int
    __s__: int

    def __init__(self, config: EstimatorConfig, psf: PsfInterface, log: Logger = LOGGER) -> None:
        self.__validate_config(config)
        self.__kind__ = EstimatorKind(config["kind"])
        self.__config__ = config
        self.__psf__ = psf
        self.__log__ = log
        self.__r__ = int(config.get("r", 0))
        self.__s__ = int(config.get("s", 0))

        if self.__r__ < 0 or self.__s__ < 0:
            raise InvalidEstimatorConfigException(
                f"tensor ranks must be non-negative, got r={self.__r__}, s={self.__s__}"
            )
        if self.__r__ + self.__s__ > RANK_CAP:
            raise InvalidEstimatorConfigException(
                f"rank r+s={self.__r__ + self.__s__} exceeds the supported cap {RANK_CAP}"
            )

    @staticmethod
    def __validate_config(config: EstimatorConfig) -> None:
        for config_field_name in REQUIRED_CONFIG_FIELDS:
            if config.get(config_field_name) in (None, ""):
                raise InvalidEstimatorConfigException(
                    f"estimator configuration missing field '{config_field_name}'"
                )

    @property
    def kind(self) -> EstimatorKind:
        return self.__kind__

    @property
    def dim(self) -> int:
        return self.__psf__.dim

    @property
    def r(self) -> int:
        return self.__r__

    @property
    def s(self) -> int:
        return self.__s__

    @property
    def psf(self) -> PsfInterface:
        return self.__psf__

    @abstractmethod
    def weight_spec(self, basis: np.ndarray) -> WeightSpec:
        pass

    @abstractmethod
    def finalize(self, raw: np.ndarray, basis: np.ndarray) -> SymTensor:
        """Turn summed weight components into the tensor estimate."""
        pass

    def estimate(self, image: GreyImage) -> SymTensor:
        basis = image.lattice.basis
        return self.finalize(local_sum(image, self.weight_spec(basis)), basis)

    def expected(
        self,
        shape: ShapeInterface,
        a: float,
        basis: np.ndarray | None = None,
        method: str = "polar",
    ) -> SymTensor:
        """The estimate averaged over all lattice translations."""
        basis = np.eye(self.dim) if basis is None else np.asarray(basis, dtype=np.float64)
        spec = self.weight_spec(basis)
        raw = integrals.mean_integral(
            shape, self.__psf__, spec, a, basis, method, log=self.__log__
        )
        return self.finalize(raw, basis)
