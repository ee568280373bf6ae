"""Integrals of configuration weights over the plane.

The expectation of a local sum over a uniformly translated lattice is
a^{q-d} * int f(Theta_a^X(x; aS), x) dx. Two ways to evaluate the integral:

polar    discs under the Gaussian PSF in d=2; trapezoid rule in the angle and
         Gauss-Legendre in the radius between the radii where a grey value crosses a
         box endpoint or break level, so every radial piece is smooth.
riemann  any bounded shape; midpoint sum on a lattice refined by `subgrid`.
"""

from logging import Logger
from math import pi

import numpy as np

from .digitizer import (
    GreyImage,
    Lattice,
    ball_gaussian_intensity,
    sample_intensity,
    window_for_shape,
)
from .estimators.weights import WeightSpec, local_sum
from .exceptions import IntegrationException
from .logger import LOGGER
from .psf.interfaces import PsfInterface
from .shapes.interfaces import ShapeInterface
from .shapes.utils import gauss_legendre_intervals
from .types import PsfKind, ShapeKind


POLAR = "polar"
RIEMANN = "riemann"
POLAR_ANGLES = 256
RADIAL_NODES = 16
RIEMANN_SUBGRID = 8
BISECTION_STEPS = 100


def polar_supported(shape: ShapeInterface, psf: PsfInterface) -> bool:
    return shape.kind == ShapeKind.BALL and psf.kind == PsfKind.GAUSSIAN and shape.dim == 2


def level_radii(
    levels: np.ndarray, radius: float, a: float, dim: int, support_radius: float
) -> np.ndarray:
    """Distance from the centre at which the blurred ball has each grey level.

    Levels never attained inside the ball map to 0; the grey value decreases with the
    distance, so bisection brackets each root.
    """
    levels = np.asarray(levels, dtype=np.float64)

    def grey(rho: np.ndarray) -> np.ndarray:
        return ball_gaussian_intensity(rho, radius, a, dim, support_radius)

    lo = np.zeros(levels.shape)
    hi = np.full(levels.shape, radius + a * (support_radius + 1.0))
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        above = grey(mid) >= levels
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return np.where(grey(np.zeros(levels.shape)) >= levels, 0.5 * (lo + hi), 0.0)


def _polar_integral(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    a: float,
    basis: np.ndarray,
    angles: int,
) -> np.ndarray:
    radius = shape.radius
    center = shape.center
    shifts = a * (spec.offsets.offsets @ basis)
    levels = np.array(spec.levels())
    radii = level_radii(levels, radius, a, shape.dim, psf.support_radius)

    # grey values are at least min(lo) only within r(min lo) of the centre
    lowest = float(np.min(spec.box[:, 0]))
    if lowest <= 0.0:
        raise IntegrationException("polar integration needs box endpoints above 0")
    reach = float(level_radii(np.array([lowest]), radius, a, shape.dim, psf.support_radius)[0])
    rho_max = reach + float(np.max(np.linalg.norm(shifts, axis=1))) + a

    alpha = 2 * pi * np.arange(angles) / angles
    e = np.column_stack([np.cos(alpha), np.sin(alpha)])

    # |rho e + shift| = r  <=>  rho = -<e, shift> +- sqrt(r^2 - |shift|^2 + <e, shift>^2)
    breakpoints = [np.zeros(angles), np.full(angles, rho_max)]
    for shift in shifts:
        along = e @ shift
        across = float(shift @ shift) - along**2
        for r in radii:
            discriminant = r**2 - across
            root = np.sqrt(np.maximum(discriminant, 0.0))
            for rho in (-along - root, -along + root):
                breakpoints.append(np.where(discriminant >= 0.0, np.clip(rho, 0.0, rho_max), 0.0))
    edges = np.sort(np.column_stack(breakpoints), axis=1)

    rho, weights = gauss_legendre_intervals(edges[:, :-1], edges[:, 1:], RADIAL_NODES)
    points = center + rho[..., np.newaxis] * e[:, np.newaxis, np.newaxis, :]
    flat = points.reshape(-1, 2)
    grey = np.stack(
        [
            ball_gaussian_intensity(
                np.linalg.norm(flat + shift - center, axis=-1),
                radius,
                a,
                shape.dim,
                psf.support_radius,
            )
            for shift in shifts
        ],
        axis=-1,
    )
    values = spec.evaluate(grey, flat)
    measure = (rho * weights).reshape(-1)
    return (2 * pi / angles) * (measure @ values)


def _riemann_integral(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    a: float,
    basis: np.ndarray,
    subgrid: int,
) -> np.ndarray:
    fine = Lattice(basis, a / subgrid, 0.5 * np.ones(basis.shape[0]) @ basis)
    offsets = spec.offsets.scaled(subgrid)
    window = window_for_shape(shape, psf, fine, offsets, psf_scale=a)
    values, _ = sample_intensity(shape, psf, fine, window, psf_scale=a)
    image = GreyImage(fine, window, values)
    return local_sum(image, spec.with_offsets(offsets), factor=fine.a ** fine.dim)


def weighted_integral(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    a: float,
    basis: np.ndarray | None = None,
    method: str = POLAR,
    subgrid: int = RIEMANN_SUBGRID,
    angles: int = POLAR_ANGLES,
    log: Logger = LOGGER,
) -> np.ndarray:
    """int f(Theta_a^X(x; aS), x) dx, one entry per weight component."""
    basis = np.eye(shape.dim) if basis is None else np.asarray(basis, dtype=np.float64)
    if method == POLAR:
        if not polar_supported(shape, psf):
            raise IntegrationException(
                f"polar integration needs a disc under the Gaussian PSF, got {shape.kind}/{psf.kind}"
            )
        result = _polar_integral(shape, psf, spec, a, basis, angles)
    elif method == RIEMANN:
        result = _riemann_integral(shape, psf, spec, a, basis, subgrid)
    else:
        raise IntegrationException(f"unknown integration method '{method}'")

    log.debug(f"{method} integral at a={a!r}: {result.tolist()}")
    return result


def mean_integral(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    a: float,
    basis: np.ndarray | None = None,
    method: str = POLAR,
    subgrid: int = RIEMANN_SUBGRID,
    angles: int = POLAR_ANGLES,
    log: Logger = LOGGER,
) -> np.ndarray:
    """The expected local sum over uniformly translated lattices, a^{q-d} int f dx."""
    integral = weighted_integral(shape, psf, spec, a, basis, method, subgrid, angles, log)
    return a ** (spec.q - shape.dim) * integral
