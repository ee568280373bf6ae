from ..exceptions import GreyTensorsException, InvalidConfigException


class ShapeException(GreyTensorsException):
    pass


class InvalidShapeConfigException(InvalidConfigException):
    pass


class UnsupportedShapeException(ShapeException):
    pass


class RankCapException(ShapeException):
    def __init__(self, rank: int, cap: int) -> None:
        super().__init__(f"tensor rank {rank} exceeds the supported cap {cap}")
        self.rank = rank
        self.cap = cap
