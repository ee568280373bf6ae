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
ROOT_BISECTION_STEPS = 160


def _ellipse_root(r0: float, z0: np.ndarray, z1: np.ndarray, g: np.ndarray) -> np.ndarray:
    n0 = r0 * z0
    s0 = z1 - 1.0
    s1 = np.where(g < 0.0, 0.0, np.hypot(n0, z1) - 1.0)
    for _ in range(ROOT_BISECTION_STEPS):
        s = 0.5 * (s0 + s1)
        value = (n0 / (s + r0)) ** 2 + (z1 / (s + 1.0)) ** 2 - 1.0
        s0 = np.where(value > 0.0, s, s0)
        s1 = np.where(value > 0.0, s1, s)
    return 0.5 * (s0 + s1)


def ellipse_distance(e0: float, e1: float, y0: np.ndarray, y1: np.ndarray) -> np.ndarray:
    """Distance from first-quadrant points (y0, y1) to the ellipse with semi-axes e0 >= e1."""
    y0 = np.asarray(y0, dtype=np.float64)
    y1 = np.asarray(y1, dtype=np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        z0 = y0 / e0
        z1 = y1 / e1
        g = z0**2 + z1**2 - 1.0
        r0 = (e0 / e1) ** 2
        sbar = _ellipse_root(r0, z0, np.maximum(z1, np.finfo(float).tiny), g)
        x0 = r0 * y0 / (sbar + r0)
        x1 = y1 / (sbar + 1.0)
        general = np.hypot(x0 - y0, x1 - y1)

        denom0 = e0**2 - e1**2
        numer0 = e0 * y0
        inner = numer0 < denom0
        xde0 = np.where(inner, numer0 / np.where(denom0 > 0.0, denom0, 1.0), 1.0)
        on_axis = np.where(
            inner,
            np.hypot(e0 * xde0 - y0, e1 * np.sqrt(np.maximum(1.0 - xde0**2, 0.0))),
            np.abs(y0 - e0),
        )

    distance = np.where(y1 > 0.0, np.where(y0 > 0.0, general, np.abs(y1 - e1)), on_axis)
    return distance


class Ellipse(ShapeInterface):
    """Axis-aligned ellipse with semi-axes a1 >= a2 > 0."""

    def __init__(self, config: ShapeConfig, log: Logger = LOGGER) -> None:
        super().__init__(config=config, log=log)
        if self.__dim__ != 2:
            raise UnsupportedShapeException(f"ellipses are two-dimensional, got d={self.__dim__}")

        semi_axes = config.get("semi_axes")
        if semi_axes is None or len(semi_axes) != 2:
            raise InvalidShapeConfigException("ellipse needs two semi_axes")
        self.__a1, self.__a2 = float(semi_axes[0]), float(semi_axes[1])
        if not self.__a1 >= self.__a2 > 0.0:
            raise InvalidShapeConfigException(f"need a1 >= a2 > 0, got {semi_axes}")

    @property
    def semi_axes(self) -> tuple[float, float]:
        return self.__a1, self.__a2

    @property
    def regularity_radius(self) -> float:
        return self.__a2**2 / self.__a1

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        y = np.abs(np.asarray(x, dtype=np.float64) - self.__center__)
        distance = ellipse_distance(self.__a1, self.__a2, y[..., 0], y[..., 1])
        inside = (y[..., 0] / self.__a1) ** 2 + (y[..., 1] / self.__a2) ** 2 < 1.0
        return np.where(inside, -distance, distance)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        half = np.array([self.__a1, self.__a2])
        return self.__center__ - half, self.__center__ + half

    def scaled(self, factor: float) -> "Ellipse":
        config = self.config
        config["center"] = (self.__center__ * factor).tolist()
        config["semi_axes"] = [self.__a1 * factor, self.__a2 * factor]
        return Ellipse(config=config, log=self.__log__)

    def boundary_quadrature(self, n_panels: int = DEFAULT_PANELS) -> BoundaryPanels:
        self._check_panels(n_panels)
        t, w = gauss_legendre_panels(0.0, 2 * pi, n_panels)
        cos, sin = np.cos(t), np.sin(t)
        speed = np.sqrt((self.__a1 * sin) ** 2 + (self.__a2 * cos) ** 2)

        points = self.__center__ + np.column_stack([self.__a1 * cos, self.__a2 * sin])
        normals = np.column_stack([self.__a2 * cos, self.__a1 * sin]) / speed[:, None]
        curvatures = (self.__a1 * self.__a2 / speed**3)[:, None]
        return BoundaryPanels(points, normals, curvatures, speed * w)
