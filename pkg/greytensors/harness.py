from concurrent.futures import ThreadPoolExecutor
from logging import Logger
from math import pi
from typing import Callable

import numpy as np

from . import __version__
from .asymptotics import (
    DEFAULT_BUMP,
    DEFAULT_SHOULDER,
    SmoothBump,
    first_order_lhs,
    first_order_rhs,
    indicator_spec,
    richardson,
    second_order_empirical,
    second_order_rhs,
)
from .config import validate_config
from .digitizer import ConfigOffsets, GreyImage, Lattice, render, translations, window_for_shape
from .estimators import make_estimator
from .estimators.calibration import DEFAULT_RADII, THEORY_TOLERANCE, calibrate_curvature
from .estimators.curvature import DEFAULT_BETA
from .estimators.interfaces import EstimatorInterface
from .estimators.sampling import mean_estimate
from .estimators.types import CurvatureCalibration, EstimateResult
from .exceptions import InvalidConfigException, ToleranceGateException
from .integrals import POLAR, RIEMANN, RIEMANN_SUBGRID, polar_supported
from .psf import make_psf
from .psf.interfaces import PsfInterface
from .shapes import make_shape
from .shapes.ball import Ball
from .shapes.interfaces import ShapeInterface
from .shapes.oracle import (
    curvature_tensor_oracle,
    oracle_family,
    surface_tensor_oracle,
    volume_tensor_oracle,
)
from .tensors import SymTensor, TensorIndex, mcmullen_residual, mcmullen_terms, metric, sym_product
from .types import (
    CurvatureWeightKind,
    EstimateRow,
    EstimatorKind,
    ExpectationMode,
    ExperimentConfig,
    McMullenRow,
    PsfKind,
    ShapeKind,
    SweepRow,
    TheoremKind,
    TranslationSampler,
    VerifyRow,
)
from .utils import log_log_slope

DEFAULT_TOLERANCES = {
    "first_order": 0.01,
    "second_order": 0.10,
    "flat_limit": 0.05,
    "calibration": 0.01,
    "mcmullen_oracle": 1e-6,
    "mcmullen_sigmas": 3.0,
}
DEFAULT_FIRST_ORDER_A = 1 / 128
DEFAULT_INDICATOR = (0.1, 0.9)
DEFAULT_SECOND_ORDER_A_SCHEDULE = (1 / 8, 1 / 16, 1 / 32)
DEFAULT_FLAT_RADIUS = 100.0
MCMULLEN_MAX_ORDER = 3
ORACLE_SOURCE = "oracle"
ESTIMATE_SOURCE = "estimate"


def component_label(index: tuple[int, ...]) -> str:
    return str(tuple(int(i) for i in index))


def _zero_position_gradient(values: np.ndarray, positions: np.ndarray) -> np.ndarray:
    return np.zeros((values.shape[0], positions.shape[1], 1))


def failed_gates(rows: list[VerifyRow] | list[McMullenRow]) -> list[str]:
    names = []
    for row in rows:
        if row["passed"]:
            continue
        if "theorem" in row:
            names.append(str(row["theorem"]))
        else:
            names.append(f"mcmullen_{row['source']}_k{row['k']}_r{row['r']}")
    return names


def check_gates(rows: list[VerifyRow] | list[McMullenRow]) -> None:
    failed = failed_gates(rows)
    if failed:
        raise ToleranceGateException(failed)


class Harness:
    """Runs experiments described by one ExperimentConfig.

    Oracle tensors are computed on every call. Curvature estimators are calibrated once
    per harness unless the configuration carries C_g and I_g.
    """

    def __init__(self, config: ExperimentConfig, logger: Logger) -> None:
        self.__log__: Logger = logger
        self.__config: ExperimentConfig = validate_config(config)

        self.__psf: PsfInterface = make_psf(config["psf"], log=self.__log__)
        shape_config = dict(config["shape"])
        shape_config.setdefault("dim", self.__psf.dim)
        self.__shape: ShapeInterface = make_shape(shape_config, log=self.__log__)
        if self.__shape.dim != self.__psf.dim:
            raise InvalidConfigException(
                f"shape is {self.__shape.dim}-dimensional, psf is {self.__psf.dim}-dimensional"
            )

        lattice_config = config.get("lattice", {})
        basis = lattice_config.get("basis", np.eye(self.__psf.dim).tolist())
        self.__basis = np.asarray(basis, dtype=np.float64)
        if self.__basis.shape != (self.__psf.dim, self.__psf.dim):
            raise InvalidConfigException(
                f"lattice basis {basis} is not {self.__psf.dim}x{self.__psf.dim}"
            )
        sampler = lattice_config.get("sampler", TranslationSampler.RANDOM)
        self.__sampler = TranslationSampler(sampler)
        expectation = config.get("expectation", ExpectationMode.MONTE_CARLO)
        self.__expectation = ExpectationMode(expectation)
        self.__workers = int(config.get("workers", 1))
        self.__tolerances = {**DEFAULT_TOLERANCES, **config.get("tolerances", {})}
        self.__calibration: CurvatureCalibration | None = None

        self.__log__.info(
            f"{self.__config['estimator']['kind']} on {self.__shape.kind} "
            f"under {self.__psf.kind}, "
            f"a={self.__config['a_schedule']}, seed={self.__config['seed']}"
        )

    @property
    def config(self) -> ExperimentConfig:
        return self.__config

    @property
    def psf(self) -> PsfInterface:
        return self.__psf

    @property
    def shape(self) -> ShapeInterface:
        return self.__shape

    @property
    def basis(self) -> np.ndarray:
        return self.__basis.copy()

    @property
    def seed(self) -> int:
        return int(self.__config["seed"])

    @property
    def translation_count(self) -> int:
        return int(self.__config["translations"])

    def calibrate(self) -> CurvatureCalibration:
        if self.__calibration is not None:
            return self.__calibration

        estimator_config = self.__config["estimator"]
        calibration_config = self.__config.get("calibration", {})
        g = estimator_config.get("g", CurvatureWeightKind.LINEAR)
        beta = float(estimator_config.get("beta", DEFAULT_BETA))

        if "C_g" in calibration_config and "I_g" in calibration_config:
            C_g = float(calibration_config["C_g"])
            self.__calibration = CurvatureCalibration(
                C_g=C_g,
                I_g=float(calibration_config["I_g"]),
                g=str(g),
                beta=beta,
                stable=True,
                theory=float("nan"),
                limits=(C_g,),
            )
            self.__log__.info(f"using configured calibration C_g={C_g!r}")
            return self.__calibration

        a_schedule = calibration_config.get("a_schedule", self.__config["a_schedule"])
        self.__calibration = calibrate_curvature(
            self.__psf,
            g=g,
            beta=beta,
            radii=calibration_config.get("radii", list(DEFAULT_RADII)),
            a_schedule=a_schedule,
            method=POLAR if self.__psf.kind == PsfKind.GAUSSIAN else RIEMANN,
            consistency=self.__tolerances["calibration"],
            theory_tolerance=THEORY_TOLERANCE,
            log=self.__log__,
        )
        self.__log__.info(
            f"calibrated C_g={self.__calibration.C_g!r} (theory {self.__calibration.theory!r}), "
            f"I_g={self.__calibration.I_g!r}, stable={self.__calibration.stable}"
        )
        if not self.__calibration.stable:
            self.__log__.warning("curvature calibration failed its consistency gate")
        return self.__calibration

    def estimator(self, config: dict | None = None) -> EstimatorInterface:
        estimator_config = dict(self.__config["estimator"]) if config is None else config
        calibration = None
        if estimator_config["kind"] == EstimatorKind.CURVATURE:
            calibration = self.calibrate()
        return make_estimator(
            estimator_config, self.__psf, log=self.__log__, calibration=calibration
        )

    def oracle(
        self, kind: EstimatorKind | None = None, r: int | None = None, s: int | None = None
    ) -> SymTensor:
        estimator_config = self.__config["estimator"]
        kind = EstimatorKind(estimator_config["kind"] if kind is None else kind)
        r = int(estimator_config.get("r", 0)) if r is None else r
        s = int(estimator_config.get("s", 0)) if s is None else s
        if kind == EstimatorKind.VOLUME:
            return volume_tensor_oracle(self.__shape, r)
        if kind == EstimatorKind.CURVATURE:
            return curvature_tensor_oracle(self.__shape, r, s)
        return surface_tensor_oracle(self.__shape, r, s)

    def render(self, a: float, index: int = 0) -> GreyImage:
        """The index-th seeded translation of the configured shape at resolution a."""
        dim = self.__shape.dim
        c = translations(dim, index + 1, self.seed, self.__sampler, self.__basis)[index]
        lattice = Lattice(self.__basis, a, c)
        window = window_for_shape(
            self.__shape, self.__psf, lattice, ConfigOffsets.symmetric(self.__shape.dim)
        )
        return render(self.__shape, self.__psf, lattice, window, log=self.__log__)

    def __mean(self, estimator: EstimatorInterface, a: float) -> EstimateResult:
        return mean_estimate(
            estimator,
            self.__shape,
            a,
            self.translation_count,
            self.seed,
            self.__sampler,
            self.__basis,
            self.__expectation,
            log=self.__log__,
        )

    def __map(
        self, estimator: EstimatorInterface, a_schedule: list[float]
    ) -> list[EstimateResult]:
        if self.__workers == 1:
            return [self.__mean(estimator, a) for a in a_schedule]
        with ThreadPoolExecutor(max_workers=self.__workers) as pool:
            return list(pool.map(lambda a: self.__mean(estimator, a), a_schedule))

    def estimate(self, a: float | None = None) -> list[EstimateResult]:
        a_schedule = self.__config["a_schedule"] if a is None else [a]
        return self.__map(self.estimator(), a_schedule)

    def estimate_image(self, image: GreyImage) -> SymTensor:
        return self.estimator().estimate(image)

    def estimate_rows(self, results: list[EstimateResult]) -> list[EstimateRow]:
        kind = EstimatorKind(self.__config["estimator"]["kind"])
        rows: list[EstimateRow] = []
        for result in results:
            for index, estimate, stderr in zip(
                result.tensor.indices(), result.tensor.components, result.stderr.components
            ):
                rows.append(
                    {
                        "version": __version__,
                        "estimator": kind,
                        "shape": self.__shape.kind,
                        "a": float(result.a),
                        "seed": self.seed,
                        "translations": result.translations,
                        "component": component_label(index),
                        "estimate": float(estimate),
                        "stderr": float(stderr),
                    }
                )
        rows.sort(key=lambda row: (row["component"], -row["a"]))
        return rows

    def sweep(self) -> list[SweepRow]:
        a_schedule = list(self.__config["a_schedule"])
        kind = EstimatorKind(self.__config["estimator"]["kind"])
        oracle = self.oracle()
        results = self.__map(self.estimator(), a_schedule)

        rows: list[SweepRow] = []
        for position, index in enumerate(oracle.indices()):
            truth = float(oracle.components[position])
            biases = [float(result.tensor.components[position]) - truth for result in results]
            slope = log_log_slope(a_schedule, biases) if len(a_schedule) > 1 else float("nan")
            for result, bias in zip(results, biases):
                rows.append(
                    {
                        "version": __version__,
                        "estimator": kind,
                        "shape": self.__shape.kind,
                        "a": float(result.a),
                        "seed": self.seed,
                        "translations": result.translations,
                        "component": component_label(index),
                        "estimate": float(result.tensor.components[position]),
                        "stderr": float(result.stderr.components[position]),
                        "oracle": truth,
                        "bias": bias,
                        "abs_bias": abs(bias),
                        "slope": slope,
                    }
                )
                self.__log__.info(
                    f"a={result.a!r} component {component_label(index)}: "
                    f"estimate {float(result.tensor.components[position])!r}, bias {bias!r}"
                )
        rows.sort(key=lambda row: (row["component"], -row["a"]))
        return rows

    def __verify_row(
        self, theorem: TheoremKind, a: float, lhs: float, rhs: float, rel_diff: float, passed: bool
    ) -> VerifyRow:
        row: VerifyRow = {
            "version": __version__,
            "theorem": theorem,
            "shape": self.__shape.kind,
            "a": float(a),
            "seed": self.seed,
            "translations": 0,
            "lhs": float(lhs),
            "rhs": float(rhs),
            "rel_diff": float(rel_diff),
            "passed": bool(passed),
        }
        message = f"{theorem}: lhs {lhs!r}, rhs {rhs!r}, relative difference {rel_diff:.3e}"
        if passed:
            self.__log__.info(message)
        else:
            self.__log__.warning(f"{message} fails its tolerance")
        return row

    def verify_first_order(self) -> VerifyRow:
        verify = self.__config.get("verify", {})
        a = float(verify.get("first_order_a", DEFAULT_FIRST_ORDER_A))
        lo, hi = verify.get("indicator", DEFAULT_INDICATOR)
        spec = indicator_spec(lo, hi, self.__shape.dim)
        lhs = float(
            first_order_lhs(
                self.__shape,
                self.__psf,
                spec,
                a,
                subgrid=int(verify.get("subgrid", RIEMANN_SUBGRID)),
                method=verify.get("method", RIEMANN),
                log=self.__log__,
            )[0]
        )
        rhs = float(first_order_rhs(self.__shape, self.__psf, spec)[0])
        rel_diff = abs(lhs - rhs) / abs(rhs)
        passed = rel_diff < self.__tolerances["first_order"]
        return self.__verify_row(TheoremKind.FIRST_ORDER, a, lhs, rhs, rel_diff, passed)

    def __bump(self) -> SmoothBump:
        lo, hi, width = self.__config.get("verify", {}).get(
            "bump", [*DEFAULT_BUMP, DEFAULT_SHOULDER]
        )
        return SmoothBump(lo, hi, width)

    def __second_order(
        self, shape: ShapeInterface, a_schedule: list[float]
    ) -> tuple[float, float]:
        bump = self.__bump()
        spec = bump.spec(shape.dim)
        subgrid = int(self.__config.get("verify", {}).get("subgrid", RIEMANN_SUBGRID))
        rhs = second_order_rhs(
            shape,
            self.__psf,
            spec,
            grey_gradient=bump.grey_gradient,
            position_gradient=_zero_position_gradient,
        ).total
        first_order = float(first_order_rhs(shape, self.__psf, spec)[0])
        lhs = second_order_empirical(
            shape,
            self.__psf,
            spec,
            a_schedule,
            subgrid=subgrid,
            first_order=first_order,
            log=self.__log__,
        ).limit
        return lhs, rhs

    def verify_second_order(self) -> VerifyRow:
        a_schedule = list(
            self.__config.get("verify", {}).get(
                "second_order_a_schedule", DEFAULT_SECOND_ORDER_A_SCHEDULE
            )
        )
        lhs, rhs = self.__second_order(self.__shape, a_schedule)
        rel_diff = abs(lhs - rhs) / abs(rhs)
        passed = rel_diff < self.__tolerances["second_order"]
        return self.__verify_row(
            TheoremKind.SECOND_ORDER, min(a_schedule), lhs, rhs, rel_diff, passed
        )

    def verify_flat_limit(self) -> VerifyRow:
        """Second-order terms per unit boundary length on a large disc.

        Both sides must fall below a floor set by the unit disc value; they decay like 1/R.
        """
        verify = self.__config.get("verify", {})
        radius = float(verify.get("flat_radius", DEFAULT_FLAT_RADIUS))
        a_schedule = list(verify.get("second_order_a_schedule", DEFAULT_SECOND_ORDER_A_SCHEDULE))
        bump = self.__bump()
        spec = bump.spec(2)

        unit = Ball({"kind": ShapeKind.BALL, "dim": 2, "radius": 1.0})
        reference = second_order_rhs(
            unit,
            self.__psf,
            spec,
            grey_gradient=bump.grey_gradient,
            position_gradient=_zero_position_gradient,
        ).total / (2 * pi)
        floor = self.__tolerances["flat_limit"] * abs(reference)

        disk = Ball({"kind": ShapeKind.BALL, "dim": 2, "radius": radius})
        lhs, rhs = self.__second_order(disk, a_schedule)
        perimeter = 2 * pi * radius
        lhs, rhs = lhs / perimeter, rhs / perimeter
        rel_diff = max(abs(lhs), abs(rhs)) / floor
        return self.__verify_row(
            TheoremKind.FLAT_LIMIT, min(a_schedule), lhs, rhs, rel_diff, rel_diff < 1.0
        )

    def verify(self) -> list[VerifyRow]:
        rows = [self.verify_first_order()]
        if self.__shape.dim != 2:
            self.__log__.warning(
                f"second-order checks are planar, skipping them for d={self.__shape.dim}"
            )
            return rows
        rows.append(self.verify_second_order())
        if polar_supported(Ball({"kind": ShapeKind.BALL, "dim": 2, "radius": 1.0}), self.__psf):
            rows.append(self.verify_flat_limit())
        else:
            self.__log__.warning(
                f"flat-limit check needs polar integration, skipping it for {self.__psf.kind}"
            )
        return rows

    def __mcmullen_row(
        self,
        source: str,
        k: int,
        r: int,
        a: float,
        translation_count: int,
        residual: float,
        threshold: float,
    ) -> McMullenRow:
        passed = residual <= threshold
        row: McMullenRow = {
            "version": __version__,
            "source": source,
            "shape": self.__shape.kind,
            "k": k,
            "r": r,
            "a": float(a),
            "seed": self.seed,
            "translations": translation_count,
            "residual": float(residual),
            "threshold": float(threshold),
            "passed": bool(passed),
        }
        message = (
            f"McMullen ({k}, {r}) {source}: residual {residual:.3e}, threshold {threshold:.3e}"
        )
        if passed:
            self.__log__.info(message)
        else:
            self.__log__.warning(f"{message} fails its tolerance")
        return row

    def __relations(
        self, members_available: Callable[[TensorIndex], bool]
    ) -> list[tuple[int, int]]:
        d = self.__shape.dim
        relations = []
        for k in range(d + 1):
            for r in range(MCMULLEN_MAX_ORDER - k + 1):
                lhs, rhs = mcmullen_terms(k, r, d)
                members = [index for _, index in lhs] + rhs
                if members and all(members_available(index) for index in members):
                    relations.append((k, r))
        return relations

    def __estimable(self, index: TensorIndex) -> bool:
        d = self.__shape.dim
        if index.k == d:
            return index.s == 0
        if index.k == d - 1:
            return True
        return d == 2 and index.k == 0 and index.s == 0

    def __member_estimator(self, index: TensorIndex) -> EstimatorInterface:
        d = self.__shape.dim
        estimator_config = self.__config["estimator"]
        if index.k == d:
            config = {"kind": EstimatorKind.VOLUME, "r": index.r}
        elif index.k == d - 1:
            config = {"kind": EstimatorKind.SURFACE3, "r": index.r, "s": index.s}
        else:
            config = {"kind": EstimatorKind.CURVATURE, "r": index.r}
            if estimator_config["kind"] == EstimatorKind.CURVATURE:
                for field_name in ("g", "beta", "volume_beta"):
                    if field_name in estimator_config:
                        config[field_name] = estimator_config[field_name]
        return self.estimator(config)

    def __combined_stderr(self, k: int, r: int, stderr: dict[TensorIndex, SymTensor]) -> float:
        d = self.__shape.dim
        lhs, rhs = mcmullen_terms(k, r, d)
        variance = np.zeros(len(SymTensor.zeros(d, r).components))

        def scaled(index: TensorIndex) -> SymTensor:
            return stderr[index] * (0.5 if index.k == d - 1 else 1.0)

        for coefficient, index in lhs:
            variance += (scaled(index).components * coefficient) ** 2
        q = metric(d)
        for index in rhs:
            variance += sym_product(q, scaled(index)).components ** 2
        return float(np.sqrt(variance).max())

    def mcmullen_check(self) -> list[McMullenRow]:
        """McMullen residuals of the oracle family and of seeded Monte-Carlo estimates."""
        family = oracle_family(self.__shape, max_rank=MCMULLEN_MAX_ORDER)
        rows: list[McMullenRow] = []
        for k, r in self.__relations(lambda index: index in family):
            residual = mcmullen_residual(k, r, family, dim=self.__shape.dim)
            rows.append(
                self.__mcmullen_row(
                    ORACLE_SOURCE, k, r, 0.0, 0, residual, self.__tolerances["mcmullen_oracle"]
                )
            )

        relations = self.__relations(self.__estimable)
        if not relations:
            return rows
        if self.translation_count < 2:
            self.__log__.warning("one translation has no standard error, estimate rows will fail")

        a = float(min(self.__config["a_schedule"]))
        estimates: dict[TensorIndex, SymTensor] = {}
        stderr: dict[TensorIndex, SymTensor] = {}
        for k, r in relations:
            lhs, rhs = mcmullen_terms(k, r, self.__shape.dim)
            for index in [index for _, index in lhs] + rhs:
                if index in estimates:
                    continue
                result = mean_estimate(
                    self.__member_estimator(index),
                    self.__shape,
                    a,
                    self.translation_count,
                    self.seed,
                    self.__sampler,
                    self.__basis,
                    ExpectationMode.MONTE_CARLO,
                    log=self.__log__,
                )
                estimates[index] = result.tensor
                stderr[index] = result.stderr

        sigmas = self.__tolerances["mcmullen_sigmas"]
        for k, r in relations:
            residual = mcmullen_residual(k, r, estimates, dim=self.__shape.dim)
            threshold = sigmas * self.__combined_stderr(k, r, stderr)
            rows.append(
                self.__mcmullen_row(
                    ESTIMATE_SOURCE, k, r, a, self.translation_count, residual, threshold
                )
            )
        return rows

    def extrapolate(self, results: list[EstimateResult]) -> SymTensor:
        """Componentwise a -> 0 extrapolation of a run over the a-schedule."""
        first = results[0].tensor
        a_values = [result.a for result in results]
        limits = []
        for i in range(len(first.components)):
            values = [result.tensor.components[i] for result in results]
            limits.append(richardson(a_values, values, log=self.__log__).limit)
        return SymTensor(first.dim, first.rank, limits)
