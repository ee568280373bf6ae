from logging import Logger

import numpy as np

from ..digitizer import Lattice, render, translations, window_for_shape
from ..integrals import POLAR, RIEMANN, polar_supported
from ..logger import LOGGER
from ..shapes.interfaces import ShapeInterface
from ..tensors import SymTensor
from ..types import ExpectationMode, TranslationSampler
from .exceptions import UnsupportedExpectationException
from .interfaces import EstimatorInterface
from .types import EstimateResult


def _summarize(tensors: list[SymTensor], a: float) -> EstimateResult:
    first = tensors[0]
    components = np.stack([t.components for t in tensors])
    mean = components.mean(axis=0)
    if len(tensors) > 1:
        stderr = components.std(axis=0, ddof=1) / np.sqrt(len(tensors))
    else:
        stderr = np.zeros_like(mean)
    return EstimateResult(
        tensor=SymTensor(first.dim, first.rank, mean),
        a=a,
        translations=len(tensors),
        values=tuple(tensors),
        stderr=SymTensor(first.dim, first.rank, stderr),
    )


def mean_estimate(
    estimator: EstimatorInterface,
    shape: ShapeInterface,
    a: float,
    translation_count: int,
    seed: int,
    sampler: TranslationSampler = TranslationSampler.RANDOM,
    basis: np.ndarray | None = None,
    expectation: ExpectationMode = ExpectationMode.MONTE_CARLO,
    log: Logger = LOGGER,
) -> EstimateResult:
    """The estimator averaged over lattice translations.

    Monte-Carlo mode renders one image per seeded translation. The exact and riemann modes
    integrate over all translations at once and report zero translations and zero error.
    """
    basis = np.eye(shape.dim) if basis is None else np.asarray(basis, dtype=np.float64)
    expectation = ExpectationMode(expectation)

    if expectation != ExpectationMode.MONTE_CARLO:
        if expectation == ExpectationMode.EXACT and not polar_supported(shape, estimator.psf):
            raise UnsupportedExpectationException(
                f"exact expectation needs a disc under the Gaussian PSF, got {shape.kind}"
            )
        method = POLAR if expectation == ExpectationMode.EXACT else RIEMANN
        tensor = estimator.expected(shape, a, basis, method)
        log.debug(f"{estimator.kind} {method} expectation at a={a!r}: {tensor!r}")
        return EstimateResult(
            tensor=tensor,
            a=a,
            translations=0,
            values=(),
            stderr=SymTensor.zeros(tensor.dim, tensor.rank),
        )

    offsets = estimator.weight_spec(basis).offsets
    tensors = []
    for c in translations(shape.dim, translation_count, seed, sampler, basis):
        lattice = Lattice(basis, a, c)
        window = window_for_shape(shape, estimator.psf, lattice, offsets)
        image = render(shape, estimator.psf, lattice, window, log=log)
        tensor = estimator.estimate(image)
        log.debug(f"{estimator.kind} at a={a!r}, c={c.tolist()}: {tensor.components.tolist()}")
        tensors.append(tensor)
    return _summarize(tensors, a)
