"""Both sides of the first- and second-order limits of local sums on smooth sets.

first order   a^{-1} int f(Theta_a(x; aS), x) dx
                  -> int_{dX} int f(Theta_u(t; S), x) dt dH(x)
second order  a^{-2} int f - a^{-1} * (first-order limit)
                  -> curvature term + gradient term + boundary term

Theta_u(t; S) is the tuple theta(t + <s, u>) over the offsets s. The right-hand sides are
panel quadratures over the boundary with Gauss-Legendre in t between the points where a
grey value crosses a box endpoint or break level; second-order terms are planar only.
"""

from logging import Logger
from math import inf, pi
from typing import Callable, NamedTuple, TypeAlias

import numpy as np
from scipy import integrate, stats

from .digitizer import ConfigOffsets
from .estimators.exceptions import InvalidWeightException
from .estimators.weights import WeightSpec
from .exceptions import EmptyWindowException, ExtrapolationException, IntegrationException
from .integrals import POLAR, RIEMANN, RIEMANN_SUBGRID, polar_supported, weighted_integral
from .logger import LOGGER
from .psf.exceptions import UnsupportedPsfException
from .psf.interfaces import PsfInterface
from .psf.profile import Profile
from .shapes.ball import Ball
from .shapes.exceptions import UnsupportedShapeException
from .shapes.interfaces import ShapeInterface
from .shapes.types import BoundaryPanels
from .shapes.utils import gauss_legendre_intervals
from .types import PsfKind, ShapeKind

GradientFunction: TypeAlias = Callable[[np.ndarray, np.ndarray], np.ndarray]

INNER_SUBPANELS = 4
INNER_NODES = 16
FD_STEP = 1e-5
ACTIVE_TOLERANCE = 1e-10
EDGE_OFFSET = 1e-7
QUADRATURE_TOLERANCE = 1e-12
DEFAULT_BUMP = (0.2, 0.7)
DEFAULT_SHOULDER = 0.02


class RichardsonResult(NamedTuple):
    limit: float
    a_values: tuple[float, ...]
    values: tuple[float, ...]
    residuals: tuple[float, ...]
    stable: bool


class SecondOrderTerms(NamedTuple):
    """Window ends, their first-order shifts and the three second-order integrals.

    t0, t1, psi0 and psi1 hold one entry per boundary direction.
    """

    t0: np.ndarray
    t1: np.ndarray
    psi0: np.ndarray
    psi1: np.ndarray
    curvature_term: float
    gradient_term: float
    boundary_term: float

    @property
    def total(self) -> float:
        return self.curvature_term + self.gradient_term + self.boundary_term


def richardson(
    a_values: list[float] | np.ndarray,
    values: list[float] | np.ndarray,
    exponent: float = 1.0,
    log: Logger = LOGGER,
) -> RichardsonResult:
    """Limit at a = 0 of the polynomial in a^exponent through every (a, value) pair.

    The extrapolation is flagged unstable unless |value - limit| strictly decreases with a.
    """
    a = np.asarray(a_values, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if a.ndim != 1 or a.size < 2 or a.shape != v.shape:
        raise ExtrapolationException(
            f"need at least two matching resolutions and values, got {a.shape} and {v.shape}"
        )
    if np.any(np.diff(a) >= 0.0) or np.any(a <= 0.0):
        raise ExtrapolationException(f"resolutions must be positive and decreasing, got {a.tolist()}")
    if not np.all(np.isfinite(v)):
        raise ExtrapolationException(f"cannot extrapolate non-finite values {v.tolist()}")

    coefficients = np.polynomial.polynomial.polyfit(a**exponent, v, a.size - 1)
    limit = float(coefficients[0])
    residuals = np.abs(v - limit)
    stable = bool(np.all(np.diff(residuals) < 0.0))
    if not stable:
        log.warning(f"extrapolation residuals {residuals.tolist()} do not decrease with a")
    return RichardsonResult(
        limit=limit,
        a_values=tuple(a.tolist()),
        values=tuple(v.tolist()),
        residuals=tuple(residuals.tolist()),
        stable=stable,
    )


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


def _smoothstep_prime(x: np.ndarray) -> np.ndarray:
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, 30.0 * x**2 * (1.0 - x) ** 2, 0.0)


class SmoothBump:
    """h(v) = 1 on [lo + width, hi - width], falling to 0 at lo and hi over quintic shoulders."""

    def __init__(
        self,
        lo: float = DEFAULT_BUMP[0],
        hi: float = DEFAULT_BUMP[1],
        width: float = DEFAULT_SHOULDER,
    ) -> None:
        if not (0.0 < lo and lo + 2 * width <= hi < 1.0 and width > 0.0):
            raise InvalidWeightException(f"bump [{lo}, {hi}] cannot hold shoulders of width {width}")
        self.__lo = float(lo)
        self.__hi = float(hi)
        self.__width = float(width)

    @property
    def lo(self) -> float:
        return self.__lo

    @property
    def hi(self) -> float:
        return self.__hi

    @property
    def breaks(self) -> tuple[float, float]:
        return self.__lo + self.__width, self.__hi - self.__width

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        w = self.__width
        return _smoothstep((v - self.__lo) / w) * _smoothstep((self.__hi - v) / w)

    def derivative(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        w = self.__width
        rise, fall = (v - self.__lo) / w, (self.__hi - v) / w
        rising = _smoothstep_prime(rise) * _smoothstep(fall)
        falling = _smoothstep(rise) * _smoothstep_prime(fall)
        return (rising - falling) / w

    def spec(self, dim: int) -> WeightSpec:
        """f(Theta, x) = h(theta_0) on single-point configurations."""
        return WeightSpec(
            offsets=ConfigOffsets.single(dim),
            box=[[self.__lo, self.__hi]],
            q=1,
            weight=lambda values, positions: self(values[:, 0])[:, np.newaxis],
            breaks=self.breaks,
            metadata={"kind": "bump", "lo": self.__lo, "hi": self.__hi, "width": self.__width},
        )

    def grey_gradient(self, values: np.ndarray, positions: np.ndarray) -> np.ndarray:
        return self.derivative(values[:, 0])[:, np.newaxis, np.newaxis]


def indicator_spec(lo: float, hi: float, dim: int) -> WeightSpec:
    """f(Theta, x) = 1_{[lo, hi]}(theta_0)."""
    return WeightSpec(
        offsets=ConfigOffsets.single(dim),
        box=[[lo, hi]],
        q=1,
        weight=lambda values, positions: np.ones((values.shape[0], 1)),
        metadata={"kind": "indicator", "lo": lo, "hi": hi},
    )


def _panels(shape: ShapeInterface, n_panels: int | None) -> BoundaryPanels:
    if n_panels is None:
        return shape.boundary_quadrature()
    return shape.boundary_quadrature(n_panels)


def _offset_vectors(spec: WeightSpec, basis: np.ndarray | None, dim: int) -> np.ndarray:
    basis = np.eye(dim) if basis is None else np.asarray(basis, dtype=np.float64)
    return spec.offsets.offsets @ basis


def _local_offsets(
    spec: WeightSpec, basis: np.ndarray | None, normals: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Offset components along each normal and along its tangent, each (P, |S|); d=2."""
    vectors = _offset_vectors(spec, basis, 2)
    tangents = np.column_stack([-normals[:, 1], normals[:, 0]])
    return normals @ vectors.T, tangents @ vectors.T


def _inner_nodes(
    lo: np.ndarray, hi: np.ndarray, cuts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in t per boundary node, split at every cut inside [lo, hi]."""
    cuts = np.clip(cuts, lo[:, np.newaxis], hi[:, np.newaxis])
    edges = np.sort(np.column_stack([lo, cuts, hi]), axis=1)
    fractions = np.linspace(0.0, 1.0, INNER_SUBPANELS + 1)
    width = (edges[:, 1:] - edges[:, :-1])[..., np.newaxis]
    starts = edges[:, :-1, np.newaxis] + width * fractions[:-1]
    ends = edges[:, :-1, np.newaxis] + width * fractions[1:]
    t, w = gauss_legendre_intervals(starts, ends, INNER_NODES)
    return t.reshape(lo.size, -1), w.reshape(lo.size, -1)


def _level_cuts(profile: Profile, levels: tuple[float, ...], along: np.ndarray) -> np.ndarray:
    """t where theta(t + <s, u>) equals a level, one column per (level, offset)."""
    if not levels:
        return np.empty((along.shape[0], 0))
    inverse = np.asarray(profile.phi(np.array(levels, dtype=np.float64)))
    return (inverse[:, np.newaxis, np.newaxis] - along.T[np.newaxis]).reshape(-1, along.shape[0]).T


def _grey(profile: Profile, t: np.ndarray, along: np.ndarray) -> np.ndarray:
    return np.asarray(profile.theta(t[..., np.newaxis] + along[:, np.newaxis, :]))


def _evaluate(spec: WeightSpec, grey: np.ndarray, points: np.ndarray) -> np.ndarray:
    n_panels, n_nodes, m = grey.shape
    positions = np.broadcast_to(points[:, np.newaxis, :], (n_panels, n_nodes, points.shape[1]))
    values = spec.evaluate(grey.reshape(-1, m), positions.reshape(-1, points.shape[1]))
    return values.reshape(n_panels, n_nodes, -1)


def finite_difference_gradients(
    spec: WeightSpec, values: np.ndarray, positions: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Central differences of the weight in the grey values (N, |S|, K) and positions (N, d, K)."""

    def differences(arguments: list[np.ndarray], slot: int) -> np.ndarray:
        columns = []
        for j in range(arguments[slot].shape[1]):
            step = np.zeros(arguments[slot].shape[1])
            step[j] = FD_STEP
            forward, backward = list(arguments), list(arguments)
            forward[slot] = arguments[slot] + step
            backward[slot] = arguments[slot] - step
            columns.append(
                np.reshape(spec.weight(*forward), (count, -1))
                - np.reshape(spec.weight(*backward), (count, -1))
            )
        return np.stack(columns, axis=1) / (2 * FD_STEP)

    arguments = [np.asarray(values, dtype=np.float64), np.asarray(positions, dtype=np.float64)]
    count = arguments[0].shape[0]
    return differences(arguments, 0), differences(arguments, 1)


def first_order_rhs(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    basis: np.ndarray | None = None,
    n_panels: int | None = None,
) -> np.ndarray:
    """int_{dX} int f(Theta_u(t; S), x) dt dH(x), one entry per weight component."""
    profile = psf.profile
    panels = _panels(shape, n_panels)
    vectors = _offset_vectors(spec, basis, shape.dim)
    along = panels.normals @ vectors.T

    reach = psf.support_radius + float(np.max(np.linalg.norm(vectors, axis=1)))
    lo = np.full(len(panels), -reach)
    hi = np.full(len(panels), reach)
    t, w = _inner_nodes(lo, hi, _level_cuts(profile, spec.levels(), along))

    values = _evaluate(spec, _grey(profile, t, along), panels.points)
    inner = np.einsum("pq,pqk->pk", w, values)
    return panels.weights @ inner


def first_order_lhs(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    a: float,
    basis: np.ndarray | None = None,
    subgrid: int = RIEMANN_SUBGRID,
    method: str = RIEMANN,
    log: Logger = LOGGER,
) -> np.ndarray:
    """a^{-1} int f(Theta_a(x; aS), x) dx."""
    return weighted_integral(shape, psf, spec, a, basis, method, subgrid, log=log) / a


def _check_rotation_invariant(psf: PsfInterface) -> None:
    if not psf.rotation_invariant:
        raise UnsupportedPsfException(f"theta_Q needs a rotation invariant psf, got {psf.kind}")


def theta_Q(
    t: np.ndarray | float,
    s: np.ndarray,
    curvatures: np.ndarray | float,
    psf: PsfInterface,
) -> np.ndarray:
    """Grey-value correction -1/2 int_{u-perp} II(z) rho(z - t u - s) dz of a curved boundary.

    `s` holds local coordinates with the normal component last; `curvatures` holds the
    principal curvatures in the order of the tangent coordinates of s.
    """
    _check_rotation_invariant(psf)
    t = np.asarray(t, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    curvatures = np.asarray(curvatures, dtype=np.float64)
    across, along = s[..., :-1], s[..., -1]

    if psf.kind == PsfKind.GAUSSIAN:
        second_moments = np.sum(curvatures * (1.0 + across**2), axis=-1)
        return -0.5 * stats.norm.pdf(t + along) * second_moments
    if psf.kind == PsfKind.BALL_INDICATOR and psf.dim == 2:
        radius = psf.radius
        half_chord = np.sqrt(np.maximum(radius**2 - (t + along) ** 2, 0.0))
        p = across[..., 0]
        moment = (6 * p**2 * half_chord + 2 * half_chord**3) / (3 * pi * radius**2)
        return -0.5 * curvatures[..., 0] * moment
    raise UnsupportedPsfException(f"theta_Q is not available for the {psf.kind} psf in d={psf.dim}")


def theta_Q_quadrature(t: float, s: np.ndarray, curvature: float, psf: PsfInterface) -> float:
    """theta_Q in the plane by adaptive quadrature of its defining integral."""
    _check_rotation_invariant(psf)
    if psf.dim != 2:
        raise UnsupportedPsfException(f"quadrature theta_Q is planar, got d={psf.dim}")
    across, along = float(s[0]), float(s[1])
    depth = -(t + along)

    def integrand(z: float) -> float:
        return z**2 * float(psf.density(np.array([z - across, depth])))

    if psf.kind == PsfKind.GAUSSIAN:
        moment, _ = integrate.quad(
            integrand,
            -inf,
            inf,
            epsabs=QUADRATURE_TOLERANCE,
            epsrel=QUADRATURE_TOLERANCE,
            limit=200,
        )
    else:
        reach = psf.support_radius
        half_chord = np.sqrt(max(reach**2 - depth**2, 0.0))
        moment, _ = integrate.quad(
            integrand,
            across - reach,
            across + reach,
            points=[across - half_chord, across + half_chord],
            epsabs=QUADRATURE_TOLERANCE,
            epsrel=QUADRATURE_TOLERANCE,
            limit=200,
        )
    return -0.5 * curvature * moment


def _psi(
    t: np.ndarray,
    along: np.ndarray,
    across: np.ndarray,
    curvature: np.ndarray,
    psf: PsfInterface,
) -> np.ndarray:
    """-theta_Q(t, s) / theta'(t + <s, u>) per boundary node and offset."""
    local = np.stack([across, along], axis=-1)
    correction = theta_Q(t, local, curvature[:, np.newaxis, np.newaxis], psf)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -correction / np.asarray(psf.profile.theta_prime(t + along))


def _window(
    spec: WeightSpec, profile: Profile, along: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-offset lower and upper bounds in t and their intersection [t0, t1]."""
    box = spec.box
    upper_inverse = np.array([float(profile.phi(v)) if v < 1.0 else -inf for v in box[:, 1]])
    lower_inverse = np.array([float(profile.phi(v)) if v > 0.0 else inf for v in box[:, 0]])
    lower = upper_inverse[np.newaxis, :] - along
    upper = lower_inverse[np.newaxis, :] - along
    t0, t1 = lower.max(axis=1), upper.min(axis=1)
    if not (np.all(np.isfinite(t0)) and np.all(np.isfinite(t1))):
        raise IntegrationException(f"box {box.tolist()} leaves the window unbounded in t")
    if np.any(t0 >= t1):
        raise EmptyWindowException(f"box {box.tolist()} is empty on the profile range")
    return lower, upper, t0, t1


def _bounds(
    spec: WeightSpec,
    psf: PsfInterface,
    curvature: np.ndarray,
    along: np.ndarray,
    across: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    lower, upper, t0, t1 = _window(spec, psf.profile, along)
    low, high = t0[:, np.newaxis], t1[:, np.newaxis]
    active0 = np.abs(lower - low) <= ACTIVE_TOLERANCE * (1.0 + np.abs(low))
    active1 = np.abs(upper - high) <= ACTIVE_TOLERANCE * (1.0 + np.abs(high))
    psi0 = np.where(active0, _psi(low, along, across, curvature, psf), -inf).max(axis=1)
    psi1 = np.where(active1, _psi(high, along, across, curvature, psf), inf).min(axis=1)
    return t0, t1, psi0, psi1


def t_bounds_psi(
    spec: WeightSpec,
    psf: PsfInterface,
    curvatures: np.ndarray | float,
    normals: np.ndarray,
    basis: np.ndarray | None = None,
) -> SecondOrderTerms:
    """Window ends t0, t1 and the shifts psi0, psi1 for planar boundary directions.

    The second-order integrals are left at zero.
    """
    normals = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    curvature = np.broadcast_to(np.asarray(curvatures, dtype=np.float64), (normals.shape[0],))
    along, across = _local_offsets(spec, basis, normals)
    t0, t1, psi0, psi1 = _bounds(spec, psf, curvature, along, across)
    return SecondOrderTerms(t0, t1, psi0, psi1, 0.0, 0.0, 0.0)


def second_order_rhs(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    basis: np.ndarray | None = None,
    grey_gradient: GradientFunction | None = None,
    position_gradient: GradientFunction | None = None,
    component: int = 0,
    n_panels: int | None = None,
) -> SecondOrderTerms:
    """The three second-order integrals for a planar set.

    Gradients default to central differences of the weight. Jumps of f at break levels
    inside the window contribute to the boundary term like the window ends do.
    """
    if shape.dim != 2:
        raise UnsupportedShapeException(f"second-order terms are planar, got d={shape.dim}")
    profile = psf.profile
    panels = _panels(shape, n_panels)
    curvature = panels.curvatures[:, 0]
    normals = panels.normals
    along, across = _local_offsets(spec, basis, normals)
    t0, t1, psi0, psi1 = _bounds(spec, psf, curvature, along, across)

    breaks = tuple(level for level in spec.breaks if 0.0 < level < 1.0)
    cuts = _level_cuts(profile, breaks, along)
    t, w = _inner_nodes(t0, t1, cuts)
    grey = _grey(profile, t, along)
    f = _evaluate(spec, grey, panels.points)[..., component]

    curvature_term = float(panels.weights @ (curvature * np.sum(w * t * f, axis=1)))

    n_boundary, n_nodes, m = grey.shape
    flat_grey = grey.reshape(-1, m)
    flat_points = np.broadcast_to(
        panels.points[:, np.newaxis, :], (n_boundary, n_nodes, 2)
    ).reshape(-1, 2)
    if grey_gradient is None or position_gradient is None:
        fd_grey, fd_position = finite_difference_gradients(spec, flat_grey, flat_points)
    d_grey = fd_grey if grey_gradient is None else grey_gradient(flat_grey, flat_points)
    if position_gradient is None:
        d_position = fd_position
    else:
        d_position = position_gradient(flat_grey, flat_points)
    d_grey = np.reshape(d_grey, (n_boundary, n_nodes, m, -1))[..., component]
    d_position = np.reshape(d_position, (n_boundary, n_nodes, 2, -1))[..., component]

    local = np.stack([across, along], axis=-1)
    corrections = theta_Q(
        t[..., np.newaxis],
        local[:, np.newaxis, :, :],
        curvature[:, np.newaxis, np.newaxis, np.newaxis],
        psf,
    )
    integrand = np.sum(d_grey * corrections, axis=-1) + t * np.einsum(
        "pqj,pj->pq", d_position, normals
    )
    gradient_term = float(panels.weights @ np.sum(w * integrand, axis=1))

    def f_at(edge: np.ndarray) -> np.ndarray:
        grey_at_edge = _grey(profile, edge[:, np.newaxis], along)
        return _evaluate(spec, grey_at_edge, panels.points)[:, 0, component]

    margin0 = EDGE_OFFSET * (1.0 + np.abs(t0))
    margin1 = EDGE_OFFSET * (1.0 + np.abs(t1))
    jumps = f_at(t1 - margin1) * psi1 - f_at(t0 + margin0) * psi0
    for column in range(cuts.shape[1]):
        cut = cuts[:, column]
        k = column % m
        margin = EDGE_OFFSET * (1.0 + np.abs(cut))
        inside = (cut > t0 + margin) & (cut < t1 - margin)
        if not np.any(inside):
            continue
        shift = _psi(
            cut[:, np.newaxis], along[:, k : k + 1], across[:, k : k + 1], curvature, psf
        )[:, 0]
        jump = f_at(cut - margin) - f_at(cut + margin)
        jumps = jumps + np.where(inside, jump * shift, 0.0)
    boundary_term = float(panels.weights @ jumps)

    return SecondOrderTerms(t0, t1, psi0, psi1, curvature_term, gradient_term, boundary_term)


def second_order_rhs_disk(
    radius: float,
    psf: PsfInterface,
    spec: WeightSpec,
    center: list[float] | None = None,
    basis: np.ndarray | None = None,
    grey_gradient: GradientFunction | None = None,
    position_gradient: GradientFunction | None = None,
    component: int = 0,
    n_panels: int | None = None,
) -> SecondOrderTerms:
    disk = Ball(
        {"kind": ShapeKind.BALL, "dim": 2, "radius": radius, "center": center or [0.0, 0.0]}
    )
    return second_order_rhs(
        disk, psf, spec, basis, grey_gradient, position_gradient, component, n_panels
    )


def second_order_bracket(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    a: float,
    first_order: float,
    basis: np.ndarray | None = None,
    method: str | None = None,
    subgrid: int = RIEMANN_SUBGRID,
    component: int = 0,
    log: Logger = LOGGER,
) -> float:
    """a^{-2} int f - a^{-1} * first_order at one resolution."""
    if method is None:
        method = POLAR if polar_supported(shape, psf) else RIEMANN
    integral = weighted_integral(shape, psf, spec, a, basis, method, subgrid, log=log)[component]
    return float(integral / a**2 - first_order / a)


def second_order_empirical(
    shape: ShapeInterface,
    psf: PsfInterface,
    spec: WeightSpec,
    a_schedule: list[float],
    basis: np.ndarray | None = None,
    method: str | None = None,
    subgrid: int = RIEMANN_SUBGRID,
    first_order: float | None = None,
    component: int = 0,
    log: Logger = LOGGER,
) -> RichardsonResult:
    """The second-order bracket on every resolution, extrapolated to a = 0.

    Discs under the Gaussian PSF use polar integration, everything else fine Riemann sums.
    """
    if first_order is None:
        first_order = float(first_order_rhs(shape, psf, spec, basis)[component])
    brackets = []
    for a in a_schedule:
        bracket = second_order_bracket(
            shape, psf, spec, a, first_order, basis, method, subgrid, component, log
        )
        log.debug(f"second-order bracket at a={a!r}: {bracket!r}")
        brackets.append(bracket)
    return richardson(a_schedule, brackets, log=log)
