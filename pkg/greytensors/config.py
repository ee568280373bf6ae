from argparse import Namespace
from copy import deepcopy
from enum import StrEnum
import json

from .exceptions import InvalidConfigException, LoadConfigException
from .types import (
    CurvatureWeightKind,
    EstimatorKind,
    ExpectationMode,
    ExperimentConfig,
    PsfKind,
    ShapeKind,
    TranslationSampler,
)

REQUIRED_CONFIG_FIELDS = [
    "shape",
    "psf",
    "estimator",
    "a_schedule",
    "translations",
    "seed",
    "output",
]


def load_config(config_path: str) -> ExperimentConfig:
    try:
        with open(config_path, "r") as config_file:
            config: ExperimentConfig = json.load(config_file)
            return config
    except Exception as e:
        raise LoadConfigException(e)


def _check_kind(value: object, kinds: type[StrEnum], field_name: str) -> None:
    if value not in {str(kind) for kind in kinds}:
        raise InvalidConfigException(f"'{field_name}' has unknown kind '{value}'")


def _check_schedule(schedule: object, field_name: str) -> None:
    if not isinstance(schedule, list) or not schedule:
        raise InvalidConfigException(f"'{field_name}' must be a non-empty list")
    if any(not isinstance(a, (int, float)) or a <= 0 for a in schedule):
        raise InvalidConfigException(f"'{field_name}' must hold positive resolutions")
    if any(later >= earlier for earlier, later in zip(schedule, schedule[1:])):
        raise InvalidConfigException(f"'{field_name}' must be strictly decreasing")


def validate_config(config: ExperimentConfig) -> ExperimentConfig:
    for config_field_name in REQUIRED_CONFIG_FIELDS:
        if config_field_name not in config:
            raise InvalidConfigException(f"configuration missing field '{config_field_name}'")

    _check_kind(config["shape"].get("kind"), ShapeKind, "shape.kind")
    _check_kind(config["psf"].get("kind"), PsfKind, "psf.kind")
    _check_kind(config["estimator"].get("kind"), EstimatorKind, "estimator.kind")
    if "g" in config["estimator"]:
        _check_kind(config["estimator"]["g"], CurvatureWeightKind, "estimator.g")
    if "expectation" in config:
        _check_kind(config["expectation"], ExpectationMode, "expectation")
    if "sampler" in config.get("lattice", {}):
        _check_kind(config["lattice"]["sampler"], TranslationSampler, "lattice.sampler")

    _check_schedule(config["a_schedule"], "a_schedule")
    if "a_schedule" in config.get("calibration", {}):
        _check_schedule(config["calibration"]["a_schedule"], "calibration.a_schedule")
    if "second_order_a_schedule" in config.get("verify", {}):
        _check_schedule(
            config["verify"]["second_order_a_schedule"], "verify.second_order_a_schedule"
        )

    if not isinstance(config["translations"], int) or config["translations"] < 1:
        raise InvalidConfigException(f"translations must be >= 1, got {config['translations']}")
    if not isinstance(config["seed"], int):
        raise InvalidConfigException(f"seed must be an integer, got {config['seed']!r}")
    if int(config.get("workers", 1)) < 1:
        raise InvalidConfigException(f"workers must be >= 1, got {config['workers']}")

    estimator = config["estimator"]
    if estimator["kind"] == EstimatorKind.SURFACE2:
        beta = estimator.get("beta", 0.1)
        omega = estimator.get("omega", 0.9)
        if not 0.0 < beta < omega < 1.0:
            raise InvalidConfigException(f"need 0 < beta < omega < 1, got {beta} and {omega}")
    if "directory" not in config["output"]:
        raise InvalidConfigException("configuration missing field 'output.directory'")

    return config


def apply_overrides(config: ExperimentConfig, args: Namespace) -> ExperimentConfig:
    """Copy of the configuration with every CLI flag that was given written over it."""
    config = deepcopy(config)
    overrides = vars(args)

    for field_name in ("seed", "translations", "expectation", "workers"):
        if overrides.get(field_name) is not None:
            config[field_name] = overrides[field_name]
    if overrides.get("a") is not None:
        config["a_schedule"] = list(overrides["a"])
    if overrides.get("output_directory") is not None:
        config.setdefault("output", {})["directory"] = overrides["output_directory"]

    estimator = config.setdefault("estimator", {})
    for field_name in ("r", "s", "beta", "omega", "epsilon", "g"):
        if overrides.get(field_name) is not None:
            estimator[field_name] = overrides[field_name]
    if overrides.get("estimator") is not None:
        estimator["kind"] = overrides["estimator"]

    if overrides.get("radii") is not None:
        calibration = config.setdefault("calibration", {"a_schedule": config["a_schedule"]})
        calibration["radii"] = list(overrides["radii"])
    return config
