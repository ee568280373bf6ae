from logging import Logger
from types import MappingProxyType

from ..logger import LOGGER
from ..types import ShapeConfig, ShapeKind
from .ball import Ball
from .ellipse import Ellipse
from .exceptions import UnsupportedShapeException
from .halfspace import Halfspace
from .interfaces import ShapeInterface
from .rounded_box import RoundedBox

SHAPES: MappingProxyType[ShapeKind, type[ShapeInterface]] = MappingProxyType(
    {
        ShapeKind.BALL: Ball,
        ShapeKind.ELLIPSE: Ellipse,
        ShapeKind.ROUNDED_BOX: RoundedBox,
        ShapeKind.HALFSPACE: Halfspace,
    }
)


def make_shape(config: ShapeConfig, log: Logger = LOGGER) -> ShapeInterface:
    kind = config.get("kind")
    if kind not in SHAPES:
        raise UnsupportedShapeException(f"shape kind '{kind}' is not supported")
    return SHAPES[ShapeKind(kind)](config=config, log=log)
