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


class RoundedBox(ShapeInterface):
    """Box with half-widths (h1, h2) whose corners are rounded with radius r_c."""

    def __init__(self, config: ShapeConfig, log: Logger = LOGGER) -> None:
        super().__init__(config=config, log=log)
        if self.__dim__ != 2:
            raise UnsupportedShapeException(f"rounded boxes are two-dimensional, got d={self.__dim__}")

        half_widths = config.get("half_widths")
        if half_widths is None or len(half_widths) != 2:
            raise InvalidShapeConfigException("rounded_box needs two half_widths")
        self.__half_widths = np.asarray(half_widths, dtype=np.float64)
        self.__corner_radius = float(config.get("corner_radius", 0.0))
        if not 0.0 < self.__corner_radius <= float(self.__half_widths.min()):
            raise InvalidShapeConfigException(
                f"corner radius must lie in (0, min(half_widths)], got {self.__corner_radius}"
            )

    @property
    def half_widths(self) -> np.ndarray:
        return self.__half_widths.copy()

    @property
    def corner_radius(self) -> float:
        return self.__corner_radius

    @property
    def regularity_radius(self) -> float:
        return self.__corner_radius

    def perimeter(self) -> float:
        inner = self.__half_widths - self.__corner_radius
        return float(4 * inner.sum() + 2 * pi * self.__corner_radius)

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        q = np.abs(np.asarray(x, dtype=np.float64) - self.__center__) - (
            self.__half_widths - self.__corner_radius
        )
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside - self.__corner_radius

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.__center__ - self.__half_widths, self.__center__ + self.__half_widths

    def scaled(self, factor: float) -> "RoundedBox":
        config = self.config
        config["center"] = (self.__center__ * factor).tolist()
        config["half_widths"] = (self.__half_widths * factor).tolist()
        config["corner_radius"] = self.__corner_radius * factor
        return RoundedBox(config=config, log=self.__log__)

    def boundary_quadrature(self, n_panels: int = DEFAULT_PANELS) -> BoundaryPanels:
        self._check_panels(n_panels)
        rc = self.__corner_radius
        w1, w2 = self.__half_widths - rc
        arc_length = 0.5 * pi * rc
        perimeter = self.perimeter()

        x, y = self.__half_widths
        # counter-clockwise from the right side: (side normal, side start, side end, corner)
        sides = [
            (np.array([1.0, 0.0]), np.array([x, -w2]), np.array([x, w2]), (w1, w2)),
            (np.array([0.0, 1.0]), np.array([w1, y]), np.array([-w1, y]), (-w1, w2)),
            (np.array([-1.0, 0.0]), np.array([-x, w2]), np.array([-x, -w2]), (-w1, -w2)),
            (np.array([0.0, -1.0]), np.array([-w1, -y]), np.array([w1, -y]), (w1, -w2)),
        ]

        parts = []
        for quarter, (normal, start, end, corner) in enumerate(sides):
            length = float(np.linalg.norm(end - start))
            if length > 0.0:
                count = max(1, round(n_panels * length / perimeter))
                s, w = gauss_legendre_panels(0.0, 1.0, count)
                points = start + s[:, None] * (end - start)
                parts.append(
                    BoundaryPanels(
                        points,
                        np.tile(normal, (s.size, 1)),
                        np.zeros((s.size, 1)),
                        w * length,
                    )
                )

            count = max(1, round(n_panels * arc_length / perimeter))
            angle, w = gauss_legendre_panels(quarter * pi / 2, (quarter + 1) * pi / 2, count)
            normals = np.column_stack([np.cos(angle), np.sin(angle)])
            parts.append(
                BoundaryPanels(
                    np.asarray(corner) + rc * normals,
                    normals,
                    np.full((angle.size, 1), 1 / rc),
                    rc * w,
                )
            )

        panels = BoundaryPanels.concatenate(parts)
        return BoundaryPanels(
            panels.points + self.__center__, panels.normals, panels.curvatures, panels.weights
        )
