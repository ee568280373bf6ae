from logging import Logger
from types import MappingProxyType

from ..logger import LOGGER
from ..types import PsfConfig, PsfKind
from .ball import BallIndicatorPsf
from .exceptions import UnsupportedPsfException
from .gaussian import GaussianPsf
from .interfaces import PsfInterface

PSFS: MappingProxyType[PsfKind, type[PsfInterface]] = MappingProxyType(
    {
        PsfKind.GAUSSIAN: GaussianPsf,
        PsfKind.BALL_INDICATOR: BallIndicatorPsf,
    }
)


def make_psf(config: PsfConfig, log: Logger = LOGGER) -> PsfInterface:
    kind = config.get("kind")
    if kind not in PSFS:
        raise UnsupportedPsfException(f"psf kind '{kind}' is not supported")
    return PSFS[PsfKind(kind)](config=config, log=log)
