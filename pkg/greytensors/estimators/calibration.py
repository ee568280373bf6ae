"""Numeric calibration of the curvature constant C_g on discs.

For a disc the raw rank-0 curvature sum has no volume term, so its expectation divided by
Phi_0^{0,0} = 1 tends to C_g. Expectations are extrapolated to a = 0 on every calibration
radius and compared with each other and with the second-order limit.
"""

from logging import Logger

import numpy as np

from .. import integrals
from ..asymptotics import richardson, second_order_rhs_disk
from ..logger import LOGGER
from ..psf.interfaces import PsfInterface
from ..shapes.ball import Ball
from ..shapes.oracle import curvature_tensor_oracle
from ..types import CurvatureWeightKind, EstimatorKind, ShapeKind
from .curvature import DEFAULT_BETA, MIN_CALIBRATION, CurvatureEstimator, OddWeight, compute_Ig
from .exceptions import CalibrationException, UnstableCalibrationException
from .types import CurvatureCalibration

DEFAULT_RADII = (1.0, 0.8)
DEFAULT_A_SCHEDULE = (1 / 16, 1 / 32, 1 / 64)
CONSISTENCY_TOLERANCE = 0.01
THEORY_TOLERANCE = 0.05


def calibrate_curvature(
    psf: PsfInterface,
    g: CurvatureWeightKind | str = CurvatureWeightKind.LINEAR,
    beta: float = DEFAULT_BETA,
    radii: tuple[float, ...] | list[float] = DEFAULT_RADII,
    a_schedule: tuple[float, ...] | list[float] = DEFAULT_A_SCHEDULE,
    method: str = integrals.POLAR,
    subgrid: int = integrals.RIEMANN_SUBGRID,
    consistency: float = CONSISTENCY_TOLERANCE,
    theory_tolerance: float = THEORY_TOLERANCE,
    strict: bool = False,
    weight: OddWeight | None = None,
    log: Logger = LOGGER,
) -> CurvatureCalibration:
    """C_g from the first calibration radius; the others only check it.

    The result is flagged unstable when an extrapolation is unstable, when the radii
    disagree by more than `consistency` or when the second-order limit disagrees by more
    than `theory_tolerance`. With `strict` an unstable calibration raises.
    """
    if psf.dim != 2:
        raise CalibrationException(f"curvature calibration runs on planar discs, got d={psf.dim}")
    if not radii:
        raise CalibrationException("calibration needs at least one disc radius")

    estimator = CurvatureEstimator(
        {"kind": EstimatorKind.CURVATURE, "r": 0, "g": g, "beta": beta},
        psf=psf,
        log=log,
        weight=weight,
    )
    spec = estimator.weight_spec(np.eye(2))
    I_g = compute_Ig(psf.profile, estimator.g)

    limits = []
    stable = True
    for radius in radii:
        disk = Ball({"kind": ShapeKind.BALL, "dim": 2, "radius": float(radius)})
        oracle = curvature_tensor_oracle(disk, 0).components[0]
        raw = [
            float(integrals.mean_integral(disk, psf, spec, a, None, method, subgrid, log=log)[0])
            / oracle
            for a in a_schedule
        ]
        extrapolation = richardson(a_schedule, raw, log=log)
        log.info(f"disc R={radius!r}: raw curvature sums {raw} extrapolate to {extrapolation.limit!r}")
        limits.append(extrapolation.limit)
        stable = stable and extrapolation.stable

    C_g = limits[0]
    if abs(C_g) < MIN_CALIBRATION:
        raise CalibrationException(f"weight '{estimator.g.name}' calibrates to C_g={C_g!r}")

    spread = max(abs(limit - C_g) for limit in limits) / abs(C_g)
    if spread > consistency:
        log.warning(f"calibration radii {list(radii)} disagree by {spread:.3%}")
        stable = False

    g_weight = estimator.g
    theory = second_order_rhs_disk(
        float(radii[0]),
        psf,
        spec,
        grey_gradient=lambda values, positions: g_weight.derivative(values[:, 0])[:, None, None],
        position_gradient=lambda values, positions: np.zeros((values.shape[0], 2, 1)),
    ).total
    mismatch = abs(theory - C_g) / abs(C_g)
    if mismatch > theory_tolerance:
        log.warning(f"C_g={C_g!r} differs from the second-order limit {theory!r} by {mismatch:.3%}")
        stable = False

    calibration = CurvatureCalibration(
        C_g=C_g,
        I_g=I_g,
        g=estimator.g.name,
        beta=estimator.beta,
        stable=stable,
        theory=theory,
        limits=tuple(limits),
    )
    if strict and not stable:
        raise UnstableCalibrationException(f"unstable calibration {calibration!r}")
    return calibration
