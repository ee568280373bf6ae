"""Ground-truth Minkowski tensors by boundary quadrature.

Surface tensors carry the full boundary measure (factor 2/omega_{s+1}); curvature tensors
use the curvature measure normalized to total mass one on convex sets.
"""

from math import factorial, pi

import numpy as np

from ..tensors import SymTensor, TensorIndex, sphere_area, sym_pow_batch, sym_product_batch
from .exceptions import RankCapException, UnsupportedShapeException
from .interfaces import ShapeInterface
from .types import BoundaryPanels

RANK_CAP = 4


def _check_rank(rank: int) -> None:
    if rank > RANK_CAP:
        raise RankCapException(rank, RANK_CAP)


def _panels(shape: ShapeInterface, n_panels: int | None) -> BoundaryPanels:
    if n_panels is None:
        return shape.boundary_quadrature()
    return shape.boundary_quadrature(n_panels)


def volume_tensor_oracle(shape: ShapeInterface, r: int, n_panels: int | None = None) -> SymTensor:
    """(1/r!) int_X x^r dx, through int_X x^r = 1/(d+r) int_dX <x,u> x^r."""
    _check_rank(r)
    panels = _panels(shape, n_panels)
    flux = np.einsum("ij,ij->i", panels.points, panels.normals) * panels.weights
    integral = flux @ sym_pow_batch(panels.points, r) / (shape.dim + r)
    return SymTensor(shape.dim, r, integral / factorial(r))


def surface_tensor_oracle(
    shape: ShapeInterface, r: int, s: int, n_panels: int | None = None
) -> SymTensor:
    _check_rank(r + s)
    panels = _panels(shape, n_panels)
    factor = 2 / (factorial(r) * factorial(s) * sphere_area(s + 1))
    integral = panels.weights @ sym_product_batch(panels.points, r, panels.normals, s)
    return SymTensor(shape.dim, r + s, factor * integral)


def curvature_tensor_oracle(
    shape: ShapeInterface, r: int, s: int = 0, n_panels: int | None = None
) -> SymTensor:
    if shape.dim != 2:
        raise UnsupportedShapeException(f"curvature tensors are implemented for d=2, got d={shape.dim}")
    _check_rank(r + s)
    panels = _panels(shape, n_panels)
    factor = sphere_area(2) / (factorial(r) * factorial(s) * sphere_area(2 + s) * 2 * pi)
    weights = panels.weights * panels.mean_curvature()
    integral = weights @ sym_product_batch(panels.points, r, panels.normals, s)
    return SymTensor(shape.dim, r + s, factor * integral)


def oracle_family(
    shape: ShapeInterface, max_rank: int = 3, n_panels: int | None = None
) -> dict[TensorIndex, SymTensor]:
    """Every oracle tensor Phi_k^{r,s} with r + s <= max_rank the shape supports."""
    d = shape.dim
    family: dict[TensorIndex, SymTensor] = {}
    for rank in range(max_rank + 1):
        family[TensorIndex(d, rank, 0)] = volume_tensor_oracle(shape, rank, n_panels)
        for s in range(rank + 1):
            family[TensorIndex(d - 1, rank - s, s)] = surface_tensor_oracle(
                shape, rank - s, s, n_panels
            )
            if d == 2:
                family[TensorIndex(0, rank - s, s)] = curvature_tensor_oracle(
                    shape, rank - s, s, n_panels
                )
    return family
