from logging import Logger
from math import pi

import numpy as np

from ..logger import LOGGER
from ..types import ShapeConfig
from .exceptions import InvalidShapeConfigException, UnsupportedShapeException
from .interfaces import ShapeInterface
from .types import BoundaryPanels
from .utils import gauss_legendre_panels

DEFAULT_PANELS = 256


class Ball(ShapeInterface):
    def __init__(self, config: ShapeConfig, log: Logger = LOGGER) -> None:
        super().__init__(config=config, log=log)
        if self.__dim__ not in (2, 3):
            raise UnsupportedShapeException(f"balls are supported in d=2 and d=3, got {self.__dim__}")

        self.__radius = float(config.get("radius", 1.0))
        if not self.__radius > 0.0:
            raise InvalidShapeConfigException(f"radius must be positive, got {self.__radius}")

    @property
    def radius(self) -> float:
        return self.__radius

    @property
    def regularity_radius(self) -> float:
        return self.__radius

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(x) - self.__center__, axis=-1) - self.__radius

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.__center__ - self.__radius, self.__center__ + self.__radius

    def scaled(self, factor: float) -> "Ball":
        config = self.config
        config["center"] = (self.__center__ * factor).tolist()
        config["radius"] = self.__radius * factor
        config["dim"] = self.__dim__
        return Ball(config=config, log=self.__log__)

    def boundary_quadrature(self, n_panels: int = DEFAULT_PANELS) -> BoundaryPanels:
        self._check_panels(n_panels)
        if self.__dim__ == 2:
            angle, w = gauss_legendre_panels(0.0, 2 * pi, n_panels)
            normals = np.column_stack([np.cos(angle), np.sin(angle)])
            curvatures = np.full((angle.size, 1), 1 / self.__radius)
            weights = self.__radius * w
        else:
            # Gauss-Legendre in cos(polar angle), trapezoid in azimuth
            z, wz = gauss_legendre_panels(-1.0, 1.0, n_panels)
            n_azimuth = 4 * n_panels
            azimuth = 2 * pi * np.arange(n_azimuth) / n_azimuth
            zz, aa = np.meshgrid(z, azimuth, indexing="ij")
            rho = np.sqrt(1.0 - zz**2)
            normals = np.column_stack(
                [(rho * np.cos(aa)).ravel(), (rho * np.sin(aa)).ravel(), zz.ravel()]
            )
            curvatures = np.full((normals.shape[0], 2), 1 / self.__radius)
            weights = self.__radius**2 * np.repeat(wz, n_azimuth) * (2 * pi / n_azimuth)

        points = self.__center__ + self.__radius * normals
        return BoundaryPanels(points, normals, curvatures, weights)
