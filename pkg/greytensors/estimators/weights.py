"""Local weighted configuration sums a^q * sum_z f(Theta(a z; a S), a z)."""

from typing import Any, Iterable

import numpy as np

from ..digitizer import ConfigOffsets, GreyImage, configurations
from ..exceptions import WindowTooSmallException
from ..psf.profile import Profile
from .exceptions import InvalidWeightException, PsfConditionException
from .types import WeightFunction

TILE_SIZE = 65536


class WeightSpec:
    """A weight f supported on the box A = prod_s [lo_s, hi_s] of grey-value tuples.

    `weight` maps admissible grey tuples (N, |S|) and physical positions (N, d) to
    (N, n_components) values; it is never called outside A. `breaks` lists further grey
    levels at which f is discontinuous.
    """

    def __init__(
        self,
        offsets: ConfigOffsets,
        box: np.ndarray | list[list[float]],
        q: int,
        weight: WeightFunction,
        n_components: int = 1,
        breaks: Iterable[float] = (),
        metadata: dict[str, Any] | None = None,
    ) -> None:
        box = np.array(box, dtype=np.float64)
        if box.shape != (len(offsets), 2):
            raise InvalidWeightException(
                f"box of shape {box.shape} for {len(offsets)} offsets, expected ({len(offsets)}, 2)"
            )
        if np.any(box[:, 0] > box[:, 1]) or np.any(box < 0.0) or np.any(box > 1.0):
            raise InvalidWeightException(f"box {box.tolist()} is not a product of intervals in [0, 1]")
        if n_components < 1:
            raise InvalidWeightException(f"weights need at least one component, got {n_components}")

        box.setflags(write=False)
        self.__offsets = offsets
        self.__box = box
        self.__q = int(q)
        self.__weight = weight
        self.__n_components = int(n_components)
        self.__breaks = tuple(sorted(float(b) for b in breaks))
        self.__metadata = dict(metadata or {})

    @property
    def offsets(self) -> ConfigOffsets:
        return self.__offsets

    @property
    def box(self) -> np.ndarray:
        return self.__box

    @property
    def q(self) -> int:
        return self.__q

    @property
    def weight(self) -> WeightFunction:
        """The unmasked weight callable."""
        return self.__weight

    @property
    def n_components(self) -> int:
        return self.__n_components

    @property
    def breaks(self) -> tuple[float, ...]:
        return self.__breaks

    @property
    def metadata(self) -> dict[str, Any]:
        return dict(self.__metadata)

    def levels(self) -> tuple[float, ...]:
        """Every grey level where f may jump, restricted to (0, 1)."""
        candidates = set(self.__box.reshape(-1).tolist()) | set(self.__breaks)
        return tuple(sorted(v for v in candidates if 0.0 < v < 1.0))

    def with_offsets(self, offsets: ConfigOffsets) -> "WeightSpec":
        return WeightSpec(
            offsets,
            self.__box,
            self.__q,
            self.__weight,
            self.__n_components,
            self.__breaks,
            self.__metadata,
        )

    def admissible(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        return np.all((values >= self.__box[:, 0]) & (values <= self.__box[:, 1]), axis=-1)

    def evaluate(self, values: np.ndarray, positions: np.ndarray) -> np.ndarray:
        """f on arbitrary tuples, zero outside A; shape (N, n_components)."""
        values = np.asarray(values, dtype=np.float64).reshape(-1, len(self.__offsets))
        positions = np.asarray(positions, dtype=np.float64).reshape(values.shape[0], -1)
        result = np.zeros((values.shape[0], self.__n_components))
        mask = self.admissible(values)
        if np.any(mask):
            result[mask] = np.reshape(
                self.__weight(values[mask], positions[mask]), (-1, self.__n_components)
            )
        return result

    def check_regular(self, profile: Profile) -> None:
        for level in self.__box.reshape(-1):
            if 0.0 < level < 1.0 and not profile.regular_value(float(level)):
                raise PsfConditionException(f"box endpoint {level!r} is not a regular value")


def tree_sum(parts: list[np.ndarray], n_components: int) -> np.ndarray:
    """Pairwise sum in a fixed topology, so the result depends only on the part order."""
    if not parts:
        return np.zeros(n_components)
    while len(parts) > 1:
        parts = [
            parts[i] + parts[i + 1] if i + 1 < len(parts) else parts[i]
            for i in range(0, len(parts), 2)
        ]
    return parts[0]


def check_window(values: np.ndarray, spec: WeightSpec) -> None:
    """Fail when a configuration on the outer ring of the window is admissible.

    `values` is the configuration grid returned by `configurations`; an admissible border
    configuration means the support of f may extend beyond the image.
    """
    grid = values.shape[:-1]
    ring = np.zeros(grid, dtype=bool)
    for axis, size in enumerate(grid):
        first = [slice(None)] * len(grid)
        last = [slice(None)] * len(grid)
        first[axis] = 0
        last[axis] = size - 1
        ring[tuple(first)] = True
        ring[tuple(last)] = True
    if np.any(spec.admissible(values[ring])):
        raise WindowTooSmallException("the weight's support reaches the window border")


def local_sum(
    image: GreyImage,
    spec: WeightSpec,
    factor: float | None = None,
    check: bool = True,
) -> np.ndarray:
    """factor * sum_z f(Theta(a z; a S), a z) over every configuration of the image.

    The factor defaults to a^q. Tiles of TILE_SIZE configurations are masked by the box
    before the weight is called and their partial sums are combined by `tree_sum`.
    """
    points, values = configurations(image, spec.offsets)
    if check:
        check_window(values, spec)

    flat_points = points.reshape(-1, image.lattice.dim)
    flat_values = values.reshape(-1, len(spec.offsets))
    parts = []
    for start in range(0, flat_values.shape[0], TILE_SIZE):
        tile = flat_values[start : start + TILE_SIZE]
        mask = spec.admissible(tile)
        if not np.any(mask):
            parts.append(np.zeros(spec.n_components))
            continue
        positions = image.lattice.positions(flat_points[start : start + TILE_SIZE][mask])
        parts.append(spec.evaluate(tile[mask], positions).sum(axis=0))

    if factor is None:
        factor = image.lattice.a**spec.q
    return factor * tree_sum(parts, spec.n_components)
