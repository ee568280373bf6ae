class GreyTensorsException(Exception):
    pass


class InvalidConfigException(GreyTensorsException):
    pass


class LoadConfigException(GreyTensorsException):
    pass


class ToleranceGateException(GreyTensorsException):
    def __init__(self, failed_gates: list[str]) -> None:
        super().__init__(f"tolerance gates failed: {', '.join(failed_gates)}")
        self.failed_gates = failed_gates


class TensorException(GreyTensorsException):
    pass


class TensorDimensionException(TensorException):
    pass


class TensorRankException(TensorException):
    def __init__(self, rank: int, message: str | None = None) -> None:
        super().__init__(message or f"unsupported tensor rank {rank}")
        self.rank = rank


class MissingFamilyMemberException(TensorException):
    def __init__(self, index: tuple[int, int, int]) -> None:
        super().__init__(f"family is missing required tensor {index}")
        self.index = index


class LatticeException(GreyTensorsException):
    pass


class InvalidLatticeException(LatticeException):
    pass


class ImageException(GreyTensorsException):
    pass


class ImageBudgetException(ImageException):
    def __init__(self, requested: int, budget: int) -> None:
        super().__init__(f"{requested} samples requested, budget is {budget}")
        self.requested = requested
        self.budget = budget


class ConfigOutOfWindowException(ImageException):
    pass


class WindowTooSmallException(ImageException):
    pass


class ImageFormatException(ImageException):
    pass


class ImageValueException(ImageException):
    pass


class EmptyWindowException(GreyTensorsException):
    pass


class ExtrapolationException(GreyTensorsException):
    pass


class PlotException(GreyTensorsException):
    pass


class SchemaMismatchException(PlotException):
    def __init__(self, missing: list[str]) -> None:
        super().__init__(f"csv is missing columns: {', '.join(missing)}")
        self.missing = missing


class EmptyDataException(PlotException):
    pass


class IntegrationException(GreyTensorsException):
    pass
