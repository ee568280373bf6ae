from abc import abstractmethod
from copy import deepcopy
from logging import Logger
from typing import Protocol

import numpy as np

from ..logger import LOGGER
from ..types import ShapeConfig, ShapeKind
from .exceptions import InvalidShapeConfigException, ShapeException
from .types import BoundaryPanels

REQUIRED_CONFIG_FIELDS = ["kind"]
MIN_PANELS = 8


class ShapeInterface(Protocol):
    __kind__: ShapeKind
    __dim__: int
    __center__: np.ndarray
    __config__: ShapeConfig
    __log__: Logger

    def __init__(self, config: ShapeConfig, log: Logger = LOGGER) -> None:
        self.__validate_config(config)
        self.__kind__ = ShapeKind(config["kind"])
        self.__config__ = config
        self.__log__ = log

        dim = config.get("dim")
        if dim is None:
            dim = len(config["center"]) if "center" in config else 2
        self.__dim__ = int(dim)
        center = config.get("center", np.zeros(self.__dim__))
        self.__center__ = np.asarray(center, dtype=np.float64)
        if self.__center__.shape != (self.__dim__,):
            raise InvalidShapeConfigException(
                f"center {config.get('center')} does not match dimension {self.__dim__}"
            )

    @staticmethod
    def __validate_config(config: ShapeConfig) -> None:
        for config_field_name in REQUIRED_CONFIG_FIELDS:
            if config.get(config_field_name) in (None, ""):
                raise InvalidShapeConfigException(
                    f"shape configuration missing field '{config_field_name}'"
                )

    @staticmethod
    def _check_panels(n_panels: int) -> None:
        if n_panels < MIN_PANELS:
            raise ShapeException(f"boundary quadrature needs at least {MIN_PANELS} panels")

    @property
    def kind(self) -> ShapeKind:
        return self.__kind__

    @property
    def dim(self) -> int:
        return self.__dim__

    @property
    def center(self) -> np.ndarray:
        return self.__center__.copy()

    @property
    def config(self) -> ShapeConfig:
        return deepcopy(self.__config__)

    @property
    @abstractmethod
    def regularity_radius(self) -> float:
        pass

    @abstractmethod
    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        """Signed distance to the boundary for points of shape (..., d); negative inside."""
        pass

    @abstractmethod
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        pass

    @abstractmethod
    def boundary_quadrature(self, n_panels: int) -> BoundaryPanels:
        pass

    @abstractmethod
    def scaled(self, factor: float) -> "ShapeInterface":
        """The image of the shape under x -> factor * x."""
        pass

    def indicator(self, x: np.ndarray) -> np.ndarray:
        return self.signed_distance(x) <= 0.0

    def translated(self, offset: np.ndarray) -> "ShapeInterface":
        config = self.config
        config["center"] = (self.__center__ + np.asarray(offset, dtype=np.float64)).tolist()
        config["dim"] = self.__dim__
        return type(self)(config=config, log=self.__log__)
