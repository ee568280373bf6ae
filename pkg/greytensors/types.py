from enum import StrEnum
from typing import NotRequired, TypeAlias, TypedDict

Vector: TypeAlias = list[float]
Matrix: TypeAlias = list[list[float]]
IndexRange: TypeAlias = tuple[int, int]
Window: TypeAlias = tuple[IndexRange, ...]


class PsfKind(StrEnum):
    GAUSSIAN = "gaussian"
    BALL_INDICATOR = "ball_indicator"


class ShapeKind(StrEnum):
    BALL = "ball"
    ELLIPSE = "ellipse"
    ROUNDED_BOX = "rounded_box"
    HALFSPACE = "halfspace"


class EstimatorKind(StrEnum):
    VOLUME = "volume"
    SURFACE2 = "surface2"
    SURFACE3 = "surface3"
    CURVATURE = "curvature"


class ExpectationMode(StrEnum):
    MONTE_CARLO = "monte_carlo"
    EXACT = "exact"
    RIEMANN = "riemann"


class TranslationSampler(StrEnum):
    RANDOM = "random"
    STRATIFIED = "stratified"


class CurvatureWeightKind(StrEnum):
    LINEAR = "linear"
    STEP = "step"


class PlotKind(StrEnum):
    BIAS = "bias"
    VERIFY = "verify"


class TheoremKind(StrEnum):
    FIRST_ORDER = "first_order"
    SECOND_ORDER = "second_order"
    FLAT_LIMIT = "flat_limit"


class PsfConfig(TypedDict):
    kind: PsfKind
    dim: int
    radius: NotRequired[float]


class ShapeConfig(TypedDict):
    kind: ShapeKind
    dim: NotRequired[int]
    center: NotRequired[Vector]
    radius: NotRequired[float]
    semi_axes: NotRequired[Vector]
    half_widths: NotRequired[Vector]
    corner_radius: NotRequired[float]
    normal: NotRequired[Vector]
    offset: NotRequired[float]


class CalibrationConfig(TypedDict):
    radii: NotRequired[list[float]]
    a_schedule: NotRequired[list[float]]
    C_g: NotRequired[float]
    I_g: NotRequired[float]


class EstimatorConfig(TypedDict):
    kind: EstimatorKind
    r: NotRequired[int]
    s: NotRequired[int]
    beta: NotRequired[float]
    omega: NotRequired[float]
    epsilon: NotRequired[float]
    g: NotRequired[CurvatureWeightKind]
    volume_beta: NotRequired[float]


class LatticeConfig(TypedDict):
    basis: NotRequired[Matrix]
    sampler: NotRequired[TranslationSampler]


class VerifyConfig(TypedDict):
    first_order_a: NotRequired[float]
    indicator: NotRequired[Vector]
    method: NotRequired[str]
    second_order_a_schedule: NotRequired[list[float]]
    bump: NotRequired[Vector]
    flat_radius: NotRequired[float]
    subgrid: NotRequired[int]


class TolerancesConfig(TypedDict):
    first_order: NotRequired[float]
    second_order: NotRequired[float]
    flat_limit: NotRequired[float]
    calibration: NotRequired[float]
    mcmullen_oracle: NotRequired[float]
    mcmullen_sigmas: NotRequired[float]


class OutputConfig(TypedDict):
    directory: str
    image_format: NotRequired[str]


class ExperimentConfig(TypedDict):
    shape: ShapeConfig
    psf: PsfConfig
    estimator: EstimatorConfig
    lattice: NotRequired[LatticeConfig]
    a_schedule: list[float]
    translations: int
    seed: int
    expectation: NotRequired[ExpectationMode]
    workers: NotRequired[int]
    calibration: NotRequired[CalibrationConfig]
    verify: NotRequired[VerifyConfig]
    tolerances: NotRequired[TolerancesConfig]
    output: OutputConfig


class EstimateRow(TypedDict):
    version: str
    estimator: EstimatorKind
    shape: ShapeKind
    a: float
    seed: int
    translations: int
    component: str
    estimate: float
    stderr: float


class SweepRow(TypedDict):
    version: str
    estimator: EstimatorKind
    shape: ShapeKind
    a: float
    seed: int
    translations: int
    component: str
    estimate: float
    stderr: float
    oracle: float
    bias: float
    abs_bias: float
    slope: float


class VerifyRow(TypedDict):
    version: str
    theorem: TheoremKind
    shape: ShapeKind
    a: float
    seed: int
    translations: int
    lhs: float
    rhs: float
    rel_diff: float
    passed: bool


class McMullenRow(TypedDict):
    version: str
    source: str
    shape: ShapeKind
    k: int
    r: int
    a: float
    seed: int
    translations: int
    residual: float
    threshold: float
    passed: bool
