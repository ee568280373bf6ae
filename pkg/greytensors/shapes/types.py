from typing import Iterator, NamedTuple

import numpy as np


class BoundaryPanel(NamedTuple):
    point: np.ndarray
    normal: np.ndarray
    curvatures: np.ndarray
    weight: float


class BoundaryPanels:
    """Quadrature nodes on the boundary, stored as parallel arrays.

    points and normals have shape (N, d), curvatures (N, d - 1), weights (N,).
    Iterating yields one BoundaryPanel per node.
    """

    def __init__(
        self,
        points: np.ndarray,
        normals: np.ndarray,
        curvatures: np.ndarray,
        weights: np.ndarray,
    ) -> None:
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        self.normals = np.ascontiguousarray(normals, dtype=np.float64)
        self.curvatures = np.ascontiguousarray(curvatures, dtype=np.float64)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        for array in (self.points, self.normals, self.curvatures, self.weights):
            array.setflags(write=False)

    @classmethod
    def concatenate(cls, parts: list["BoundaryPanels"]) -> "BoundaryPanels":
        return cls(
            np.concatenate([p.points for p in parts]),
            np.concatenate([p.normals for p in parts]),
            np.concatenate([p.curvatures for p in parts]),
            np.concatenate([p.weights for p in parts]),
        )

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def mean_curvature(self) -> np.ndarray:
        """tr(II) at every node."""
        return self.curvatures.sum(axis=1)

    def total_weight(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, i: int) -> BoundaryPanel:
        return BoundaryPanel(
            self.points[i], self.normals[i], self.curvatures[i], float(self.weights[i])
        )

    def __iter__(self) -> Iterator[BoundaryPanel]:
        for i in range(len(self)):
            yield self[i]
