from math import inf, isfinite
from typing import Callable, TypeAlias

import numpy as np

from .exceptions import PsfDomainException
from .types import ConditionReport

ArrayLike: TypeAlias = float | np.ndarray
ProfileFunction: TypeAlias = Callable[[np.ndarray], np.ndarray]

BISECTION_STEPS = 100
UNBOUNDED_BRACKET = 40.0
REGULAR_SLOPE_FRACTION = 1e-3
DEFAULT_TABLE_POINTS = 1001


def _as_output(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(values)
    return values


class Profile:
    """The blurred halfspace: theta(t) is the grey value at signed distance t.

    theta is non-increasing, strictly decreasing on `monotone_window`, and phi is its
    inverse there. When no closed-form inverse is supplied, phi bisects on theta.
    """

    def __init__(
        self,
        theta: ProfileFunction,
        theta_prime: ProfileFunction,
        monotone_window: tuple[float, float],
        max_slope: float,
        export_window: tuple[float, float],
        phi: ProfileFunction | None = None,
    ) -> None:
        self.__theta = theta
        self.__theta_prime = theta_prime
        self.__phi = phi
        self.__monotone_window = monotone_window
        self.__max_slope = max_slope
        self.__export_window = export_window

    @property
    def monotone_window(self) -> tuple[float, float]:
        return self.__monotone_window

    @property
    def max_slope(self) -> float:
        return self.__max_slope

    def theta(self, t: ArrayLike) -> ArrayLike:
        return _as_output(self.__theta(np.asarray(t, dtype=np.float64)), t)

    def theta_prime(self, t: ArrayLike) -> ArrayLike:
        return _as_output(self.__theta_prime(np.asarray(t, dtype=np.float64)), t)

    def phi(self, v: ArrayLike) -> ArrayLike:
        values = np.asarray(v, dtype=np.float64)
        outside = ~((values > 0.0) & (values < 1.0))
        if np.any(outside):
            bad = float(values[outside].flat[0]) if values.ndim else float(values)
            raise PsfDomainException(bad)

        if self.__phi is not None:
            return _as_output(self.__phi(values), v)
        return _as_output(self.__bisect(values), v)

    def __bisect(self, values: np.ndarray) -> np.ndarray:
        t_lo, t_hi = self.__monotone_window
        lo = np.full(values.shape, t_lo if isfinite(t_lo) else -UNBOUNDED_BRACKET)
        hi = np.full(values.shape, t_hi if isfinite(t_hi) else UNBOUNDED_BRACKET)
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            above = self.__theta(mid) > values
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return 0.5 * (lo + hi)

    def regular_value(self, v: float) -> bool:
        if not 0.0 < v < 1.0:
            return False
        slope = float(self.__theta_prime(np.asarray(self.phi(v))))
        return slope < -REGULAR_SLOPE_FRACTION * self.__max_slope

    def table(self, points: int = DEFAULT_TABLE_POINTS) -> np.ndarray:
        t = np.linspace(*self.__export_window, points)
        return np.column_stack([t, self.__theta(t)])

    def export(self, path: str, points: int = DEFAULT_TABLE_POINTS) -> None:
        np.savetxt(path, self.table(points), fmt="%.17g", header="t theta")


def validate_conditions(profile: Profile, beta: float, omega: float, V: float) -> ConditionReport:
    """Check that [phi(omega) - V, phi(beta) + V] sits where theta is strictly decreasing."""
    if not (0.0 < beta < omega < 1.0) or V <= 0.0:
        return ConditionReport(
            valid=False,
            strictly_decreasing=False,
            inside_support=False,
            window=(inf, -inf),
            slack=-inf,
            reason=f"need 0 < beta < omega < 1 and V > 0, got beta={beta}, omega={omega}, V={V}",
        )

    window = (float(profile.phi(omega)) - V, float(profile.phi(beta)) + V)
    t_lo, t_hi = profile.monotone_window
    slack = min(window[0] - t_lo, t_hi - window[1])
    inside = slack > 0.0
    reason = "" if inside else f"distance window {window} leaves ({t_lo}, {t_hi})"
    return ConditionReport(
        valid=inside,
        strictly_decreasing=inside,
        inside_support=inside,
        window=window,
        slack=slack,
        reason=reason,
    )
