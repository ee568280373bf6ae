from logging import Logger

import numpy as np

from ..logger import LOGGER
from ..types import ShapeConfig
from .exceptions import InvalidShapeConfigException, UnsupportedShapeException
from .interfaces import ShapeInterface
from .types import BoundaryPanels


class Halfspace(ShapeInterface):
    """{x : <x - center, u> <= offset}. Unbounded, so it has no oracles or quadrature."""

    def __init__(self, config: ShapeConfig, log: Logger = LOGGER) -> None:
        if "dim" not in config and "center" not in config and "normal" in config:
            config = {**config, "dim": len(config["normal"])}
        super().__init__(config=config, log=log)

        normal = np.asarray(config.get("normal", np.eye(self.__dim__)[0]), dtype=np.float64)
        length = np.linalg.norm(normal)
        if normal.shape != (self.__dim__,) or length == 0.0:
            raise InvalidShapeConfigException(f"invalid halfspace normal {config.get('normal')}")
        self.__normal = normal / length
        self.__offset = float(config.get("offset", 0.0))

    @property
    def normal(self) -> np.ndarray:
        return self.__normal.copy()

    @property
    def offset(self) -> float:
        return self.__offset

    @property
    def regularity_radius(self) -> float:
        return np.inf

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.__center__) @ self.__normal - self.__offset

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise UnsupportedShapeException("a halfspace has no bounding box; pass an explicit window")

    def boundary_quadrature(self, n_panels: int = 0) -> BoundaryPanels:
        raise UnsupportedShapeException("a halfspace has no finite boundary quadrature")

    def scaled(self, factor: float) -> "Halfspace":
        config = self.config
        config["center"] = (self.__center__ * factor).tolist()
        config["offset"] = self.__offset * factor
        config["dim"] = self.__dim__
        return Halfspace(config=config, log=self.__log__)
