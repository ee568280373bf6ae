from typing import NamedTuple


class ConditionReport(NamedTuple):
    valid: bool
    strictly_decreasing: bool
    inside_support: bool
    window: tuple[float, float]
    slack: float
    reason: str
