"""Grey-value images of blurred sets observed on translated lattices.

Lattice points are integer coordinate vectors z; the physical sample position of z is
a * (z @ basis + c). Windows are half-open index ranges per axis and image axis i
runs over lattice coordinate i.
"""

from copy import deepcopy
from itertools import product
from logging import Logger
from math import ceil
from typing import Any

import numpy as np
from scipy import signal, stats

from .exceptions import (
    ConfigOutOfWindowException,
    ImageBudgetException,
    ImageValueException,
    InvalidLatticeException,
    LatticeException,
)
from .logger import LOGGER
from .psf.interfaces import TAIL_TOLERANCE, PsfInterface
from .shapes.interfaces import ShapeInterface
from .types import PsfKind, ShapeKind, TranslationSampler, Window

DET_TOLERANCE = 1e-12
LATTICE_POINT_BUDGET = 2**24
FINE_CELL_BUDGET = 2**26
SUPERSAMPLING = 8
INTENSITY_TOLERANCE = 1e-6
POINT_CHUNK = 2**22


class Lattice:
    """The scaled translated lattice a * (Z^d @ basis + c) with a unimodular basis."""

    def __init__(
        self,
        basis: np.ndarray | list[list[float]],
        a: float,
        c: np.ndarray | list[float] | None = None,
    ) -> None:
        basis = np.array(basis, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise InvalidLatticeException(f"basis must be a square matrix, got shape {basis.shape}")
        if abs(abs(np.linalg.det(basis)) - 1.0) > DET_TOLERANCE:
            raise InvalidLatticeException(
                f"basis must span a unit cell, |det| = {abs(np.linalg.det(basis))!r}"
            )
        if not (a > 0.0 and np.isfinite(a)):
            raise InvalidLatticeException(f"resolution must be positive, got {a}")

        dim = basis.shape[0]
        c = np.zeros(dim) if c is None else np.array(c, dtype=np.float64)
        if c.shape != (dim,):
            raise InvalidLatticeException(f"translation {c} does not match dimension {dim}")

        inverse = np.linalg.inv(basis)
        cell = c @ inverse
        if np.any(cell < -DET_TOLERANCE) or np.any(cell >= 1.0):
            raise InvalidLatticeException(f"translation {c.tolist()} is outside the fundamental cell")

        basis.setflags(write=False)
        inverse.setflags(write=False)
        c.setflags(write=False)
        self.__basis = basis
        self.__inverse = inverse
        self.__a = float(a)
        self.__c = c

    @classmethod
    def standard(
        cls, dim: int, a: float, c: np.ndarray | list[float] | None = None
    ) -> "Lattice":
        return cls(np.eye(dim), a, c)

    @property
    def dim(self) -> int:
        return self.__basis.shape[0]

    @property
    def basis(self) -> np.ndarray:
        return self.__basis

    @property
    def inverse_basis(self) -> np.ndarray:
        return self.__inverse

    @property
    def a(self) -> float:
        return self.__a

    @property
    def c(self) -> np.ndarray:
        return self.__c

    @property
    def V(self) -> float:
        return float(np.max(np.linalg.norm(self.__basis, axis=1)))

    def with_translation(self, c: np.ndarray | list[float]) -> "Lattice":
        return Lattice(self.__basis, self.__a, c)

    def with_resolution(self, a: float) -> "Lattice":
        return Lattice(self.__basis, a, self.__c)

    def positions(self, z: np.ndarray) -> np.ndarray:
        return self.__a * (np.asarray(z, dtype=np.float64) @ self.__basis + self.__c)

    def to_lattice(self, x: np.ndarray) -> np.ndarray:
        """Real lattice coordinates of physical points."""
        return (np.asarray(x, dtype=np.float64) / self.__a - self.__c) @ self.__inverse

    def to_record(self) -> dict[str, Any]:
        return {"a": self.__a, "basis": self.__basis.tolist(), "c": self.__c.tolist()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return (
            self.__a == other.a
            and np.array_equal(self.__basis, other.basis)
            and np.array_equal(self.__c, other.c)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Lattice(basis={self.__basis.tolist()}, a={self.__a!r}, c={self.__c.tolist()})"


class ConfigOffsets:
    """Ordered lattice offsets S inside the block anchor + [0, n)^d."""

    def __init__(self, offsets: np.ndarray | list[list[int]], n: int, anchor: int = 0) -> None:
        offsets = np.array(offsets, dtype=np.int64)
        if offsets.ndim != 2 or offsets.shape[0] == 0:
            raise LatticeException(f"offsets must be a non-empty (m, d) array, got {offsets.shape}")
        relative = offsets - anchor
        if np.any(relative < 0) or np.any(relative >= n):
            raise LatticeException(f"offsets {offsets.tolist()} leave the block {anchor} + [0, {n})")
        offsets.setflags(write=False)
        self.__offsets = offsets
        self.__n = int(n)
        self.__anchor = int(anchor)

    @classmethod
    def single(cls, dim: int) -> "ConfigOffsets":
        return cls(np.zeros((1, dim)), n=1)

    @classmethod
    def forward(cls, dim: int) -> "ConfigOffsets":
        """{0, e_1, ..., e_d} in the 2 x ... x 2 block."""
        return cls(np.vstack([np.zeros((1, dim)), np.eye(dim)]), n=2)

    @classmethod
    def symmetric(cls, dim: int) -> "ConfigOffsets":
        """{0, e_1, ..., e_d, -e_1, ..., -e_d} in the centered 3 x ... x 3 block."""
        return cls(np.vstack([np.zeros((1, dim)), np.eye(dim), -np.eye(dim)]), n=3, anchor=-1)

    @property
    def offsets(self) -> np.ndarray:
        return self.__offsets

    @property
    def n(self) -> int:
        return self.__n

    @property
    def anchor(self) -> int:
        return self.__anchor

    @property
    def dim(self) -> int:
        return self.__offsets.shape[1]

    def scaled(self, factor: int) -> "ConfigOffsets":
        """The same offsets on a lattice refined by an integer factor."""
        return ConfigOffsets(
            self.__offsets * factor, n=(self.__n - 1) * factor + 1, anchor=self.__anchor * factor
        )

    def __len__(self) -> int:
        return self.__offsets.shape[0]

    def __repr__(self) -> str:
        return f"ConfigOffsets(offsets={self.__offsets.tolist()}, n={self.__n}, anchor={self.__anchor})"


def window_points(window: Window) -> np.ndarray:
    axes = [np.arange(lo, hi) for lo, hi in window]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


class GreyImage:
    def __init__(
        self,
        lattice: Lattice,
        window: Window,
        values: np.ndarray,
        metadata: dict[str, Any] | None = None,
    ) -> None:
        window = tuple((int(lo), int(hi)) for lo, hi in window)
        if len(window) != lattice.dim:
            raise ImageValueException(f"window {window} does not match dimension {lattice.dim}")
        shape = tuple(hi - lo for lo, hi in window)
        if any(size <= 0 for size in shape):
            raise ImageValueException(f"window {window} is empty")

        values = np.array(values, dtype=np.float64)
        if values.shape != shape:
            raise ImageValueException(f"values of shape {values.shape} for window {window}")
        if np.any(~np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
            raise ImageValueException("grey values must lie in [0, 1]")

        values.setflags(write=False)
        self.__lattice = lattice
        self.__window = window
        self.__values = values
        self.__metadata = dict(metadata or {})

    @property
    def lattice(self) -> Lattice:
        return self.__lattice

    @property
    def window(self) -> Window:
        return self.__window

    @property
    def values(self) -> np.ndarray:
        return self.__values

    @property
    def shape(self) -> tuple[int, ...]:
        return self.__values.shape

    @property
    def metadata(self) -> dict[str, Any]:
        return deepcopy(self.__metadata)

    @property
    def error(self) -> float:
        return float(self.__metadata.get("error", 0.0))

    @property
    def degraded(self) -> bool:
        return bool(self.__metadata.get("degraded", False))

    def lattice_points(self) -> np.ndarray:
        """Integer coordinates of every sample, shape self.shape + (d,)."""
        return window_points(self.__window)

    def positions(self) -> np.ndarray:
        return self.__lattice.positions(self.lattice_points())

    def contains(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z)
        lo = np.array([lo for lo, _ in self.__window])
        hi = np.array([hi for _, hi in self.__window])
        return np.all((z >= lo) & (z < hi), axis=-1)

    def value_at(self, z: np.ndarray | tuple[int, ...]) -> float:
        z = np.asarray(z, dtype=np.int64)
        if not self.contains(z):
            raise ConfigOutOfWindowException(f"lattice point {z.tolist()} is outside {self.__window}")
        index = tuple(int(zi - lo) for zi, (lo, _) in zip(z, self.__window))
        return float(self.__values[index])


def ball_gaussian_intensity(
    rho: np.ndarray, radius: float, a: float, dim: int, support_radius: float
) -> np.ndarray:
    # |Y| <= R/a for Y ~ N(x/a, I): a noncentral chi-square distribution function
    rho = np.asarray(rho, dtype=np.float64)
    values = (rho < radius).astype(np.float64)
    band = np.abs(rho - radius) < a * (support_radius + 1.0)
    if np.any(band):
        nc = (rho[band] / a) ** 2
        level = (radius / a) ** 2
        central = nc == 0.0
        band_values = np.empty(nc.shape)
        band_values[central] = stats.chi2.cdf(level, df=dim)
        band_values[~central] = stats.ncx2.cdf(level, df=dim, nc=nc[~central])
        values[band] = band_values
    return np.clip(values, 0.0, 1.0)


def _coverage(shape: ShapeInterface, x: np.ndarray, h: float) -> np.ndarray:
    return np.clip(0.5 - shape.signed_distance(x) / h, 0.0, 1.0)


def _kernel(psf: PsfInterface, steps: np.ndarray) -> np.ndarray:
    """The PSF sampled on the grid spanned by `steps` (rows, in PSF units), truncated at D_eff, unit mass."""
    dim = steps.shape[0]
    inverse_norm = float(np.linalg.norm(np.linalg.inv(steps), 2))
    half_width = int(ceil(psf.support_radius * inverse_norm))
    axes = [np.arange(-half_width, half_width + 1)] * dim
    nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1) @ steps
    radius = np.linalg.norm(nodes, axis=-1)
    kernel = np.where(radius <= psf.support_radius, psf.radial_density(radius), 0.0)
    return kernel / kernel.sum()


def _generic_points(
    shape: ShapeInterface, psf: PsfInterface, a: float, x: np.ndarray, supersampling: int
) -> np.ndarray:
    dim = x.shape[-1]
    kernel = _kernel(psf, np.eye(dim) / supersampling)
    half_width = kernel.shape[0] // 2
    axes = [np.arange(-half_width, half_width + 1)] * dim
    offsets = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    weights = kernel.reshape(-1)
    keep = weights > 0.0
    offsets = offsets[keep] * (a / supersampling)
    weights = weights[keep]

    flat = x.reshape(-1, dim)
    values = np.empty(flat.shape[0])
    chunk = max(1, POINT_CHUNK // offsets.shape[0])
    for start in range(0, flat.shape[0], chunk):
        block = flat[start : start + chunk]
        coverage = _coverage(shape, block[:, np.newaxis, :] + offsets, a / supersampling)
        values[start : start + chunk] = coverage @ weights
    return np.clip(values, 0.0, 1.0).reshape(x.shape[:-1])


def intensity_with_error(
    shape: ShapeInterface,
    psf: PsfInterface,
    a: float,
    x: np.ndarray,
    supersampling: int = SUPERSAMPLING,
) -> tuple[np.ndarray, float]:
    """theta_a^X at physical points x of shape (..., d), with an error estimate.

    Halfspaces use the profile exactly and balls under the Gaussian PSF a closed form;
    everything else is rasterized and convolved, with the error estimated by halving
    the supersampling factor.
    """
    x = np.asarray(x, dtype=np.float64)
    if not a > 0.0:
        raise LatticeException(f"resolution must be positive, got {a}")

    if _has_closed_form(shape, psf):
        return _closed_form(shape, psf, a, x)

    values = _generic_points(shape, psf, a, x, supersampling)
    coarse = _generic_points(shape, psf, a, x, max(1, supersampling // 2))
    return values, float(np.max(np.abs(values - coarse), initial=0.0))


def intensity(
    shape: ShapeInterface,
    psf: PsfInterface,
    a: float,
    x: np.ndarray,
    supersampling: int = SUPERSAMPLING,
) -> np.ndarray | float:
    values, _ = intensity_with_error(shape, psf, a, x, supersampling)
    if np.ndim(values) == 0:
        return float(values)
    return values


def _has_closed_form(shape: ShapeInterface, psf: PsfInterface) -> bool:
    return shape.kind == ShapeKind.HALFSPACE or (
        shape.kind == ShapeKind.BALL and psf.kind == PsfKind.GAUSSIAN
    )


def _closed_form(
    shape: ShapeInterface, psf: PsfInterface, a: float, x: np.ndarray
) -> tuple[np.ndarray, float]:
    if shape.kind == ShapeKind.HALFSPACE:
        return np.asarray(psf.profile.theta(shape.signed_distance(x) / a)), 0.0
    rho = np.linalg.norm(x - shape.center, axis=-1)
    values = ball_gaussian_intensity(rho, shape.radius, a, shape.dim, psf.support_radius)
    return values, TAIL_TOLERANCE


def _check_lattice_budget(window: Window) -> None:
    count = int(np.prod([hi - lo for lo, hi in window]))
    if count > LATTICE_POINT_BUDGET:
        raise ImageBudgetException(count, LATTICE_POINT_BUDGET)


def _render_generic(
    shape: ShapeInterface,
    psf: PsfInterface,
    lattice: Lattice,
    window: Window,
    psf_scale: float,
    fine_per_cell: int,
) -> np.ndarray:
    spacing = lattice.a / fine_per_cell
    kernel = _kernel(psf, lattice.basis * (spacing / psf_scale))
    half_width = kernel.shape[0] // 2
    fine_shape = [fine_per_cell * (hi - lo - 1) + 1 + 2 * half_width for lo, hi in window]
    cells = int(np.prod(fine_shape))
    if cells > FINE_CELL_BUDGET:
        raise ImageBudgetException(cells, FINE_CELL_BUDGET)

    # fine node m sits at lattice coordinate m / fine_per_cell
    axes = [
        np.arange(fine_per_cell * lo - half_width, fine_per_cell * lo - half_width + size)
        / fine_per_cell
        for (lo, _), size in zip(window, fine_shape)
    ]
    fine = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    coverage = _coverage(shape, lattice.positions(fine), spacing)
    blurred = signal.fftconvolve(coverage, kernel, mode="valid")
    stride = tuple(slice(None, None, fine_per_cell) for _ in window)
    return np.clip(blurred[stride], 0.0, 1.0)


def sample_intensity(
    shape: ShapeInterface,
    psf: PsfInterface,
    lattice: Lattice,
    window: Window,
    psf_scale: float | None = None,
    supersampling: int = SUPERSAMPLING,
) -> tuple[np.ndarray, float]:
    """theta_{psf_scale}^X at every lattice point of the window, with an error estimate.

    The PSF scale defaults to the lattice resolution. Generic shapes are rasterized at
    spacing at most psf_scale / supersampling; the error estimate compares against half
    that resolution and is NaN when the lattice is already the raster.
    """
    if shape.dim != lattice.dim or psf.dim != lattice.dim:
        raise LatticeException(
            f"dimension mismatch: shape {shape.dim}, psf {psf.dim}, lattice {lattice.dim}"
        )
    _check_lattice_budget(window)
    psf_scale = lattice.a if psf_scale is None else psf_scale

    if _has_closed_form(shape, psf):
        return _closed_form(shape, psf, psf_scale, lattice.positions(window_points(window)))

    fine_per_cell = max(1, int(ceil(supersampling * lattice.a / psf_scale - 1e-9)))
    values = _render_generic(shape, psf, lattice, window, psf_scale, fine_per_cell)
    if fine_per_cell < 2:
        return values, float("nan")
    coarse = _render_generic(shape, psf, lattice, window, psf_scale, fine_per_cell // 2)
    return values, float(np.max(np.abs(values - coarse)))


def render(
    shape: ShapeInterface,
    psf: PsfInterface,
    lattice: Lattice,
    window: Window,
    supersampling: int = SUPERSAMPLING,
    log: Logger = LOGGER,
) -> GreyImage:
    values, error = sample_intensity(shape, psf, lattice, window, supersampling=supersampling)
    metadata: dict[str, Any] = {
        "shape": str(shape.kind),
        "psf": str(psf.kind),
        "supersampling": supersampling,
        "error": error,
        "degraded": error > INTENSITY_TOLERANCE,
    }
    if metadata["degraded"]:
        log.warning(
            f"rendered {shape.kind} at a={lattice.a!r} with estimated error {error:.2e} "
            f"above {INTENSITY_TOLERANCE:.0e}"
        )
    log.debug(f"rendered {shape.kind} on window {window} at a={lattice.a!r}")
    return GreyImage(lattice, window, values, metadata)


def extract_config(
    image: GreyImage, z: np.ndarray | tuple[int, ...], offsets: ConfigOffsets
) -> tuple[float, ...]:
    z = np.asarray(z, dtype=np.int64)
    return tuple(image.value_at(z + s) for s in offsets.offsets)


def configuration_range(image: GreyImage, offsets: ConfigOffsets) -> Window:
    """Lattice points z with z + S inside the image window."""
    low = offsets.offsets.min(axis=0)
    high = offsets.offsets.max(axis=0)
    return tuple(
        (lo - int(low[i]), hi - int(high[i])) for i, (lo, hi) in enumerate(image.window)
    )


def configurations(image: GreyImage, offsets: ConfigOffsets) -> tuple[np.ndarray, np.ndarray]:
    """Every complete configuration in the image.

    Returns lattice points of shape grid + (d,) and grey values of shape grid + (|S|,),
    where grid is the shape of configuration_range.
    """
    window = configuration_range(image, offsets)
    grid = tuple(hi - lo for lo, hi in window)
    if any(size <= 0 for size in grid):
        raise ConfigOutOfWindowException(
            f"no configuration of {offsets!r} fits into the window {image.window}"
        )

    values = image.values
    columns = []
    for s in offsets.offsets:
        index = tuple(
            slice(lo - wlo + int(si), lo - wlo + int(si) + size)
            for (lo, _), (wlo, _), si, size in zip(window, image.window, s, grid)
        )
        columns.append(values[index])

    return window_points(window), np.stack(columns, axis=-1)


def window_for_shape(
    shape: ShapeInterface,
    psf: PsfInterface,
    lattice: Lattice,
    offsets: ConfigOffsets | None = None,
    psf_scale: float | None = None,
) -> Window:
    """A window covering the bounding box grown by 2 D_eff PSF scales plus one block."""
    lo, hi = shape.bounding_box()
    corners = np.array(list(product(*zip(lo, hi))))
    coordinates = lattice.to_lattice(corners)
    inverse_norm = float(np.linalg.norm(lattice.inverse_basis, 2))
    psf_scale = lattice.a if psf_scale is None else psf_scale
    margin = int(ceil(2 * psf.support_radius * (psf_scale / lattice.a) * inverse_norm))
    if offsets is not None:
        margin += offsets.n
    low = np.floor(coordinates.min(axis=0)).astype(int) - margin
    high = np.ceil(coordinates.max(axis=0)).astype(int) + margin + 1
    return tuple((int(l), int(h)) for l, h in zip(low, high))


def translations(
    dim: int,
    count: int,
    seed: int,
    sampler: TranslationSampler = TranslationSampler.RANDOM,
    basis: np.ndarray | None = None,
) -> np.ndarray:
    """Lattice translations c in the fundamental cell, shape (count, d).

    Draws come from a Philox generator, so a seed reproduces the same translations on
    every platform. The stratified sampler jitters one point in each of k^d sub-cells.
    """
    if count < 1:
        raise LatticeException(f"need at least one translation, got {count}")
    basis = np.eye(dim) if basis is None else np.asarray(basis, dtype=np.float64)
    generator = np.random.Generator(np.random.Philox(seed))

    if TranslationSampler(sampler) == TranslationSampler.RANDOM:
        cell = generator.random((count, dim))
    else:
        k = int(round(count ** (1 / dim)))
        if k**dim != count:
            raise LatticeException(f"stratified sampling needs a perfect power count, got {count}")
        strata = np.array(list(product(range(k), repeat=dim)), dtype=np.float64)
        cell = (strata + generator.random((count, dim))) / k

    # keep c @ inverse(basis) strictly below one after rounding
    cell = np.minimum(cell, np.nextafter(1.0, 0.0))
    return cell @ basis
