"""Mean-curvature tensors from single-point weights g(theta) x^r with g(x) = -g(1 - x).

The raw sum a^{d-2} sum_z g(theta_z) (a z)^r tends to
r! C_g Phi_{d-2}^{r,0} + r! I_g Q Phi_d^{r-2,0}, so the estimate removes the volume
term with a volume estimate and divides by the calibrated constant C_g.
"""

from logging import Logger
from math import factorial

import numpy as np
from scipy import integrate

from .. import integrals
from ..digitizer import ConfigOffsets, GreyImage
from ..logger import LOGGER
from ..psf.interfaces import PsfInterface
from ..psf.profile import Profile
from ..shapes.interfaces import ShapeInterface
from ..tensors import SymTensor, metric, multi_indices, sym_pow_batch, sym_product
from ..types import CurvatureWeightKind, EstimatorConfig, EstimatorKind
from .exceptions import (
    CalibrationException,
    InvalidEstimatorConfigException,
    InvalidWeightException,
)
from .interfaces import EstimatorInterface
from .types import CurvatureCalibration, GreyFunction
from .volume import VolumeEstimator
from .weights import WeightSpec, local_sum

DEFAULT_BETA = 0.1
DEFAULT_VOLUME_BETA = 0.5
ODDNESS_POINTS = 101
ODDNESS_TOLERANCE = 1e-9
QUADRATURE_TOLERANCE = 1e-10
MIN_CALIBRATION = 1e-12


class OddWeight:
    """A grey-value weight g on [beta, 1 - beta] with g(x) = -g(1 - x), zero elsewhere."""

    def __init__(
        self,
        name: str,
        beta: float,
        function: GreyFunction,
        derivative: GreyFunction | None = None,
        breaks: tuple[float, ...] = (),
    ) -> None:
        if not 0.0 < beta < 0.5:
            raise InvalidWeightException(f"beta must lie in (0, 1/2), got {beta}")
        self.__name = name
        self.__beta = float(beta)
        self.__function = function
        self.__derivative = derivative
        self.__breaks = tuple(breaks)
        self.check_odd()

    @property
    def name(self) -> str:
        return self.__name

    @property
    def beta(self) -> float:
        return self.__beta

    @property
    def breaks(self) -> tuple[float, ...]:
        return self.__breaks

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= self.__beta) & (x <= 1.0 - self.__beta)
        return np.where(inside, self.__function(x), 0.0)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """g' away from the jumps; central differences when no derivative was given."""
        x = np.asarray(x, dtype=np.float64)
        if self.__derivative is None:
            h = 1e-5
            return (self(x + h) - self(x - h)) / (2 * h)
        inside = (x > self.__beta) & (x < 1.0 - self.__beta)
        return np.where(inside, self.__derivative(x), 0.0)

    def check_odd(self) -> None:
        x = np.linspace(self.__beta, 1.0 - self.__beta, ODDNESS_POINTS)
        defect = np.max(np.abs(self(x) + self(1.0 - x)))
        if defect > ODDNESS_TOLERANCE:
            raise InvalidWeightException(
                f"weight '{self.__name}' is not odd about 1/2, |g(x) + g(1-x)| reaches {defect!r}"
            )

    def __repr__(self) -> str:
        return f"OddWeight(name={self.__name!r}, beta={self.__beta!r})"


def make_odd_weight(kind: CurvatureWeightKind | str, beta: float) -> OddWeight:
    kind = CurvatureWeightKind(kind)
    if kind == CurvatureWeightKind.LINEAR:
        return OddWeight(
            name=str(kind),
            beta=beta,
            function=lambda x: x - 0.5,
            derivative=lambda x: np.ones_like(x),
        )
    return OddWeight(
        name=str(kind),
        beta=beta,
        function=lambda x: np.sign(0.5 - x),
        derivative=lambda x: np.zeros_like(x),
        breaks=(0.5,),
    )


def compute_Ig(profile: Profile, g: OddWeight, beta: float | None = None) -> float:
    """int t g(theta(t)) dt over [phi(1 - beta), phi(beta)]."""
    beta = g.beta if beta is None else beta
    t0 = float(profile.phi(1.0 - beta))
    t1 = float(profile.phi(beta))
    points = sorted(float(profile.phi(level)) for level in g.breaks if beta < level < 1.0 - beta)

    value, _ = integrate.quad(
        lambda t: t * float(g(profile.theta(t))),
        t0,
        t1,
        points=points or None,
        epsabs=QUADRATURE_TOLERANCE,
        epsrel=QUADRATURE_TOLERANCE,
        limit=200,
    )
    return value


class CurvatureEstimator(EstimatorInterface):
    __calibration__: CurvatureCalibration | None

    def __init__(
        self,
        config: EstimatorConfig,
        psf: PsfInterface,
        log: Logger = LOGGER,
        calibration: CurvatureCalibration | None = None,
        weight: OddWeight | None = None,
    ) -> None:
        super().__init__(config=config, psf=psf, log=log)
        if self.__s__ != 0:
            raise InvalidEstimatorConfigException(
                "curvature tensors are estimated without a normal part, s must be 0"
            )

        self.__beta = float(config.get("beta", DEFAULT_BETA))
        if weight is None:
            weight = make_odd_weight(config.get("g", CurvatureWeightKind.LINEAR), self.__beta)
        self.__g = weight
        self.__beta = weight.beta
        self.__volume_beta = float(config.get("volume_beta", DEFAULT_VOLUME_BETA))
        self.__calibration__ = calibration
        self.__volume = None
        if self.__r__ >= 2:
            self.__volume = VolumeEstimator(
                {"kind": EstimatorKind.VOLUME, "r": self.__r__ - 2, "beta": self.__volume_beta},
                psf=psf,
                log=log,
            )

    @property
    def g(self) -> OddWeight:
        return self.__g

    @property
    def beta(self) -> float:
        return self.__beta

    @property
    def calibration(self) -> CurvatureCalibration | None:
        return self.__calibration__

    def with_calibration(self, calibration: CurvatureCalibration) -> "CurvatureEstimator":
        return CurvatureEstimator(
            self.__config__,
            self.__psf__,
            log=self.__log__,
            calibration=calibration,
            weight=self.__g,
        )

    def weight_spec(self, basis: np.ndarray) -> WeightSpec:
        r = self.__r__
        g = self.__g

        def weight(values: np.ndarray, positions: np.ndarray) -> np.ndarray:
            return g(values[:, 0])[:, np.newaxis] * sym_pow_batch(positions, r)

        spec = WeightSpec(
            offsets=ConfigOffsets.single(self.dim),
            box=[[self.__beta, 1.0 - self.__beta]],
            q=self.dim - 2,
            weight=weight,
            n_components=len(multi_indices(self.dim, r)),
            breaks=g.breaks,
            metadata={"kind": str(self.__kind__), "r": r, "g": g.name, "beta": self.__beta},
        )
        spec.check_regular(self.__psf__.profile)
        return spec

    def raw_tensor(self, raw: np.ndarray) -> SymTensor:
        return SymTensor(self.dim, self.__r__, raw)

    def correct(self, raw: SymTensor, volume: SymTensor | None) -> SymTensor:
        """(raw - r! I_g Q volume) / (r! C_g)."""
        calibration = self.__calibration__
        if calibration is None:
            raise CalibrationException("curvature estimates need a calibration")
        if abs(calibration.C_g) < MIN_CALIBRATION:
            raise CalibrationException(f"calibration constant C_g={calibration.C_g!r} is degenerate")

        scale = factorial(self.__r__)
        corrected = raw
        if self.__r__ >= 2:
            if volume is None:
                raise CalibrationException(f"rank {self.__r__} curvature needs a volume estimate")
            corrected = raw - sym_product(metric(self.dim), volume) * (scale * calibration.I_g)
        return corrected / (scale * calibration.C_g)

    def finalize(self, raw: np.ndarray, basis: np.ndarray) -> SymTensor:
        if self.__r__ >= 2:
            raise CalibrationException(
                f"rank {self.__r__} curvature needs a volume estimate, use estimate or expected"
            )
        return self.correct(self.raw_tensor(raw), None)

    def estimate(self, image: GreyImage) -> SymTensor:
        raw = self.raw_tensor(local_sum(image, self.weight_spec(image.lattice.basis)))
        volume = self.__volume.estimate(image) if self.__volume is not None else None
        return self.correct(raw, volume)

    def expected(
        self,
        shape: ShapeInterface,
        a: float,
        basis: np.ndarray | None = None,
        method: str = "polar",
    ) -> SymTensor:
        basis = np.eye(self.dim) if basis is None else np.asarray(basis, dtype=np.float64)
        raw = integrals.mean_integral(
            shape, self.__psf__, self.weight_spec(basis), a, basis, method, log=self.__log__
        )
        volume = None
        if self.__volume is not None:
            volume = self.__volume.expected(shape, a, basis, method)
        return self.correct(self.raw_tensor(raw), volume)
