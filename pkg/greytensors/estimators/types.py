from typing import Callable, NamedTuple, TypeAlias

import numpy as np

from ..tensors import SymTensor

WeightFunction: TypeAlias = Callable[[np.ndarray, np.ndarray], np.ndarray]
GreyFunction: TypeAlias = Callable[[np.ndarray], np.ndarray]


class EstimateResult(NamedTuple):
    tensor: SymTensor
    a: float
    translations: int
    values: tuple[SymTensor, ...]
    stderr: SymTensor


class CurvatureCalibration(NamedTuple):
    C_g: float
    I_g: float
    g: str
    beta: float
    stable: bool
    theory: float
    limits: tuple[float, ...]
