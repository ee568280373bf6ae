from logging import Logger
from types import MappingProxyType

from ..logger import LOGGER
from ..psf.interfaces import PsfInterface
from ..types import EstimatorConfig, EstimatorKind
from .curvature import CurvatureEstimator
from .exceptions import InvalidEstimatorConfigException
from .interfaces import EstimatorInterface
from .surface import SurfaceEstimator2, SurfaceEstimator3
from .types import CurvatureCalibration
from .volume import VolumeEstimator

ESTIMATORS: MappingProxyType[EstimatorKind, type[EstimatorInterface]] = MappingProxyType(
    {
        EstimatorKind.VOLUME: VolumeEstimator,
        EstimatorKind.SURFACE2: SurfaceEstimator2,
        EstimatorKind.SURFACE3: SurfaceEstimator3,
        EstimatorKind.CURVATURE: CurvatureEstimator,
    }
)


def make_estimator(
    config: EstimatorConfig,
    psf: PsfInterface,
    log: Logger = LOGGER,
    calibration: CurvatureCalibration | None = None,
) -> EstimatorInterface:
    kind = config.get("kind")
    if kind not in ESTIMATORS:
        raise InvalidEstimatorConfigException(f"estimator kind '{kind}' is not supported")
    if EstimatorKind(kind) == EstimatorKind.CURVATURE:
        return CurvatureEstimator(config=config, psf=psf, log=log, calibration=calibration)
    return ESTIMATORS[EstimatorKind(kind)](config=config, psf=psf, log=log)
