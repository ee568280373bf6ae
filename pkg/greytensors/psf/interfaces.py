from abc import abstractmethod
from logging import Logger
from math import isfinite
from typing import Protocol

import numpy as np
from scipy import integrate

from ..logger import LOGGER
from ..tensors import sphere_area
from ..types import PsfConfig, PsfKind
from .exceptions import InvalidPsfConfigException, PsfDomainException
from .profile import Profile, validate_conditions
from .types import ConditionReport

REQUIRED_CONFIG_FIELDS = ["kind", "dim"]
MASS_TOLERANCE = 1e-9
TAIL_TOLERANCE = 1e-9


class PsfInterface(Protocol):
    __kind__: PsfKind
    __dim__: int
    __config__: PsfConfig
    __log__: Logger
    __profile__: Profile
    __support_radius__: float

    def __init__(self, config: PsfConfig, log: Logger = LOGGER) -> None:
        self.__validate_config(config)
        self.__kind__ = PsfKind(config["kind"])
        self.__dim__ = int(config["dim"])
        self.__config__ = config
        self.__log__ = log

    @staticmethod
    def __validate_config(config: PsfConfig) -> None:
        for config_field_name in REQUIRED_CONFIG_FIELDS:
            if config.get(config_field_name) in (None, ""):
                raise InvalidPsfConfigException(
                    f"psf configuration missing field '{config_field_name}'"
                )
        if int(config["dim"]) < 1:
            raise InvalidPsfConfigException(f"psf dimension must be positive, got {config['dim']}")

    def _check_mass(self) -> None:
        upper = self.__support_radius__ if self.__kind__ != PsfKind.GAUSSIAN else np.inf
        area = sphere_area(self.__dim__)
        mass, _ = integrate.quad(
            lambda r: area * r ** (self.__dim__ - 1) * float(self.radial_density(np.asarray(r))),
            0.0,
            upper,
            epsabs=1e-13,
            epsrel=1e-13,
            limit=200,
        )
        if abs(mass - 1.0) > MASS_TOLERANCE:
            raise InvalidPsfConfigException(f"psf mass is {mass}, expected 1")
        self.__log__.debug(f"{self.__kind__} psf in dimension {self.__dim__} has mass {mass!r}")

    @property
    def kind(self) -> PsfKind:
        return self.__kind__

    @property
    def dim(self) -> int:
        return self.__dim__

    @property
    def profile(self) -> Profile:
        return self.__profile__

    @property
    def support_radius(self) -> float:
        """Radius D_eff outside of which the density carries mass below TAIL_TOLERANCE."""
        return self.__support_radius__

    @property
    def rotation_invariant(self) -> bool:
        return True

    @abstractmethod
    def radial_density(self, r: np.ndarray) -> np.ndarray:
        pass

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.radial_density(np.linalg.norm(x, axis=-1))

    def scaled_density(self, a: float, x: np.ndarray) -> np.ndarray:
        if not (a > 0.0 and isfinite(a)):
            raise PsfDomainException(a, f"resolution must be positive, got {a}")
        return a ** (-self.__dim__) * self.density(np.asarray(x, dtype=np.float64) / a)

    def validate_conditions(self, beta: float, omega: float, V: float) -> ConditionReport:
        return validate_conditions(self.__profile__, beta, omega, V)

    def regular_value(self, v: float) -> bool:
        return self.__profile__.regular_value(v)
