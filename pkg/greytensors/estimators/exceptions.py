from ..exceptions import GreyTensorsException, InvalidConfigException


class EstimatorException(GreyTensorsException):
    pass


class InvalidEstimatorConfigException(InvalidConfigException):
    pass


class InvalidWeightException(EstimatorException):
    pass


class PsfConditionException(EstimatorException):
    def __init__(self, reason: str) -> None:
        super().__init__(f"psf conditions fail: {reason}")
        self.reason = reason


class CalibrationException(EstimatorException):
    pass


class UnstableCalibrationException(CalibrationException):
    pass


class UnsupportedExpectationException(EstimatorException):
    pass
