"""Symmetric tensors over R^d.

Components are stored once per non-decreasing multi-index (0-based internally,
1-based in the text record). Multiplicities only enter when a tensor is expanded
to its full array, so two tensors are equal exactly when their stored components are.
"""

from functools import cache
from itertools import combinations, combinations_with_replacement
from math import comb, gamma, pi
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .exceptions import (
    MissingFamilyMemberException,
    TensorDimensionException,
    TensorException,
    TensorRankException,
)

TEXT_FLOAT_FORMAT = "%.17g"


class TensorIndex(NamedTuple):
    k: int
    r: int
    s: int


@cache
def multi_indices(dim: int, rank: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations_with_replacement(range(dim), rank))


@cache
def _full_to_component(dim: int, rank: int) -> tuple[np.ndarray, np.ndarray]:
    # flat position in the full array -> stored component, plus per-component counts
    lookup = {index: i for i, index in enumerate(multi_indices(dim, rank))}
    positions = np.indices((dim,) * rank).reshape(rank, -1).T
    table = np.array([lookup[tuple(sorted(p))] for p in positions], dtype=np.intp)
    counts = np.bincount(table, minlength=len(lookup))
    table.setflags(write=False)
    counts.setflags(write=False)
    return table, counts


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n (so omega_1 = 2, omega_2 = 2 pi)."""
    return 2 * pi ** (n / 2) / gamma(n / 2)


class SymTensor:
    def __init__(self, dim: int, rank: int, components: Iterable[float] | np.ndarray) -> None:
        if dim < 1:
            raise TensorDimensionException(f"dimension must be positive, got {dim}")
        if rank < 0:
            raise TensorRankException(rank)

        values = np.array(components, dtype=np.float64).reshape(-1)
        expected = comb(dim + rank - 1, rank)
        if values.size != expected:
            raise TensorDimensionException(
                f"rank {rank} tensor in dimension {dim} has {expected} components, got {values.size}"
            )
        values.setflags(write=False)

        self.__dim = dim
        self.__rank = rank
        self.__components = values

    @classmethod
    def zeros(cls, dim: int, rank: int) -> "SymTensor":
        return cls(dim, rank, np.zeros(comb(dim + rank - 1, rank)))

    @classmethod
    def scalar(cls, value: float, dim: int) -> "SymTensor":
        return cls(dim, 0, [value])

    @classmethod
    def from_full(cls, full: np.ndarray) -> "SymTensor":
        """Symmetrize a full array (averaging over index permutations) and store it."""
        full = np.asarray(full, dtype=np.float64)
        rank = full.ndim
        if rank == 0:
            raise TensorException("from_full needs the dimension for scalars; use SymTensor.scalar")
        dim = full.shape[0]
        if any(n != dim for n in full.shape):
            raise TensorDimensionException(f"full tensor must be square, got shape {full.shape}")

        table, counts = _full_to_component(dim, rank)
        sums = np.bincount(table, weights=full.reshape(-1), minlength=counts.size)
        return cls(dim, rank, sums / counts)

    @property
    def dim(self) -> int:
        return self.__dim

    @property
    def rank(self) -> int:
        return self.__rank

    @property
    def components(self) -> np.ndarray:
        return self.__components

    def indices(self) -> tuple[tuple[int, ...], ...]:
        return multi_indices(self.__dim, self.__rank)

    def to_full(self) -> np.ndarray:
        if self.__rank == 0:
            return np.array(self.__components[0])
        table, _ = _full_to_component(self.__dim, self.__rank)
        return self.__components[table].reshape((self.__dim,) * self.__rank)

    def __getitem__(self, index: tuple[int, ...] | int) -> float:
        if isinstance(index, int):
            index = (index,)
        key = tuple(sorted(index))
        if len(key) != self.__rank:
            raise TensorRankException(self.__rank, f"index {index} does not match rank {self.__rank}")
        return float(self.__components[multi_indices(self.__dim, self.__rank).index(key)])

    def __check_compatible(self, other: "SymTensor") -> None:
        if self.__dim != other.dim or self.__rank != other.rank:
            raise TensorDimensionException(
                f"cannot combine (dim={self.__dim}, rank={self.__rank}) "
                f"with (dim={other.dim}, rank={other.rank})"
            )

    def __add__(self, other: "SymTensor") -> "SymTensor":
        self.__check_compatible(other)
        return SymTensor(self.__dim, self.__rank, self.__components + other.components)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        self.__check_compatible(other)
        return SymTensor(self.__dim, self.__rank, self.__components - other.components)

    def __mul__(self, factor: float) -> "SymTensor":
        return SymTensor(self.__dim, self.__rank, self.__components * float(factor))

    __rmul__ = __mul__

    def __truediv__(self, factor: float) -> "SymTensor":
        return SymTensor(self.__dim, self.__rank, self.__components / float(factor))

    def __neg__(self) -> "SymTensor":
        return SymTensor(self.__dim, self.__rank, -self.__components)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymTensor):
            return NotImplemented
        return (
            self.__dim == other.dim
            and self.__rank == other.rank
            and bool(np.array_equal(self.__components, other.components))
        )

    __hash__ = None  # type: ignore[assignment]

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.__components)))

    def allclose(self, other: "SymTensor", tol: float) -> bool:
        return (self - other).max_norm() <= tol

    def to_text(self) -> str:
        lines = [f"dim {self.__dim}", f"rank {self.__rank}"]
        for index, value in zip(self.indices(), self.__components):
            label = " ".join(str(i + 1) for i in index)
            number = TEXT_FLOAT_FORMAT % value
            lines.append(f"{label} {number}" if label else number)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SymTensor":
        lines = [line.split() for line in text.strip().splitlines() if line.strip()]
        try:
            if lines[0][0] != "dim" or lines[1][0] != "rank":
                raise TensorException("tensor record must start with 'dim' and 'rank' lines")
            dim, rank = int(lines[0][1]), int(lines[1][1])
            values = {}
            for fields in lines[2:]:
                index = tuple(sorted(int(i) - 1 for i in fields[:-1]))
                values[index] = float(fields[-1])
        except (IndexError, ValueError) as e:
            raise TensorException(f"malformed tensor record: {e}")

        expected = multi_indices(dim, rank)
        if set(values) != set(expected):
            raise TensorException("tensor record does not list every sorted multi-index once")
        return cls(dim, rank, [values[index] for index in expected])

    def __repr__(self) -> str:
        return f"SymTensor(dim={self.__dim}, rank={self.__rank}, components={self.__components!r})"


def metric(dim: int) -> SymTensor:
    return SymTensor.from_full(np.eye(dim))


def sym_pow(x: Iterable[float] | np.ndarray, r: int) -> SymTensor:
    x = np.asarray(x, dtype=np.float64)
    if r < 0:
        raise TensorRankException(r)
    return SymTensor(x.size, r, sym_pow_batch(x[np.newaxis, :], r)[0])


def sym_pow_batch(points: np.ndarray, r: int) -> np.ndarray:
    """Components of x^r for every row of `points`, shape (N, n_components)."""
    points = np.asarray(points, dtype=np.float64)
    dim = points.shape[1]
    columns = [np.prod(points[:, list(index)], axis=1) for index in multi_indices(dim, r)]
    return np.stack(columns, axis=1)


def sym_product_batch(x: np.ndarray, r: int, u: np.ndarray, s: int) -> np.ndarray:
    """Components of the symmetric product x^r u^s for paired rows of x and u."""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    n, dim = x.shape
    p = r + s
    columns = []
    for index in multi_indices(dim, p):
        total = np.zeros(n)
        for slots in combinations(range(p), r):
            term = np.ones(n)
            for position, i in enumerate(index):
                term = term * (x[:, i] if position in slots else u[:, i])
            total += term
        columns.append(total / comb(p, r))
    return np.stack(columns, axis=1)


def sym_product(t: SymTensor, u: SymTensor) -> SymTensor:
    if t.dim != u.dim:
        raise TensorDimensionException(f"dimension mismatch {t.dim} != {u.dim}")
    if t.rank == 0:
        return u * t.components[0]
    if u.rank == 0:
        return t * u.components[0]
    return SymTensor.from_full(np.multiply.outer(t.to_full(), u.to_full()))


def tensor_eval(t: SymTensor, *args: Iterable[float] | np.ndarray) -> float:
    if len(args) != t.rank:
        raise TensorRankException(t.rank, f"rank {t.rank} tensor evaluated on {len(args)} vectors")

    result = t.to_full()
    for arg in args:
        vector = np.asarray(arg, dtype=np.float64)
        if vector.shape != (t.dim,):
            raise TensorDimensionException(
                f"argument of shape {vector.shape} for tensor of dimension {t.dim}"
            )
        result = result @ vector
    return float(result)


def trace_contract(t: SymTensor) -> SymTensor:
    if t.rank < 2:
        raise TensorRankException(t.rank, f"trace needs rank >= 2, got {t.rank}")
    traced = np.trace(t.to_full(), axis1=-2, axis2=-1)
    if t.rank == 2:
        return SymTensor.scalar(float(traced), t.dim)
    return SymTensor.from_full(traced)


def from_basis_evaluations(evaluations: np.ndarray, basis: np.ndarray) -> SymTensor:
    """Recover a tensor from its evaluations on the lattice basis (rows of `basis`).

    evaluations[i1, ..., ip] = T(v_i1, ..., v_ip); each mode is solved against the dual basis.
    The result is symmetrized, so partially symmetric inputs are accepted.
    """
    evaluations = np.asarray(evaluations, dtype=np.float64)
    inverse = np.linalg.inv(np.asarray(basis, dtype=np.float64))
    if evaluations.ndim == 0:
        return SymTensor.scalar(float(evaluations), inverse.shape[0])

    result = evaluations
    for mode in range(evaluations.ndim):
        result = np.moveaxis(np.tensordot(inverse, result, axes=([1], [mode])), 0, mode)
    return SymTensor.from_full(result)


def mcmullen_terms(
    k: int, r: int, dim: int
) -> tuple[list[tuple[float, TensorIndex]], list[TensorIndex]]:
    """Members of 2pi sum_s s Phi_{k-r+s}^{r-s,s} = Q sum_s Phi_{k-r+s}^{r-s,s-2}.

    Indices outside 0..dim and volume tensors with a normal part are the zero tensor
    and are left out.
    """
    lhs: list[tuple[float, TensorIndex]] = []
    rhs: list[TensorIndex] = []
    for s in range(1, r + 1):
        j = k - r + s
        if not 0 <= j <= dim:
            continue
        if j != dim:
            lhs.append((2 * pi * s, TensorIndex(j, r - s, s)))
        if s >= 2 and (j != dim or s == 2):
            rhs.append(TensorIndex(j, r - s, s - 2))
    return lhs, rhs


def mcmullen_residual(
    k: int,
    r: int,
    family: Mapping[TensorIndex, SymTensor],
    dim: int | None = None,
    full_surface_measure: bool = True,
) -> float:
    """Max-norm of the McMullen residual for (k, r).

    With full_surface_measure the k = d-1 members carry the full boundary measure and
    are halved before entering the relation.
    """
    if dim is None:
        if not family:
            return 0.0
        dim = next(iter(family.values())).dim

    lhs, rhs = mcmullen_terms(k, r, dim)
    if not lhs and not rhs:
        return 0.0

    def member(index: TensorIndex) -> SymTensor:
        key = TensorIndex(*index)
        if key not in family:
            raise MissingFamilyMemberException(tuple(key))
        tensor = family[key]
        if full_surface_measure and key.k == dim - 1:
            return tensor * 0.5
        return tensor

    residual = SymTensor.zeros(dim, r)
    for coefficient, index in lhs:
        residual = residual + member(index) * coefficient

    q = metric(dim)
    for index in rhs:
        residual = residual - sym_product(q, member(index))

    return residual.max_norm()
