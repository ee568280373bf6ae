from functools import cache

import numpy as np

GAUSS_NODES = 8


@cache
def _legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_panels(
    lo: float, hi: float, n_panels: int, nodes: int = GAUSS_NODES
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    x, w = _legendre(nodes)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
    weights = (half[:, None] * w[None, :]).reshape(-1)
    return t, weights


def gauss_legendre_intervals(
    lo: np.ndarray, hi: np.ndarray, nodes: int
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on many intervals at once; output shape lo.shape + (nodes,)."""
    x, w = _legendre(nodes)
    lo = np.asarray(lo, dtype=np.float64)[..., None]
    hi = np.asarray(hi, dtype=np.float64)[..., None]
    half = 0.5 * (hi - lo)
    return 0.5 * (hi + lo) + half * x, half * w
