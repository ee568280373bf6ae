from ..exceptions import GreyTensorsException, InvalidConfigException


class PsfException(GreyTensorsException):
    pass


class InvalidPsfConfigException(InvalidConfigException):
    pass


class UnsupportedPsfException(PsfException):
    pass


class PsfDomainException(PsfException):
    def __init__(self, value: float, message: str | None = None) -> None:
        super().__init__(message or f"value {value} is outside the invertible range")
        self.value = value
