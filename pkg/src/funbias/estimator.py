"""Functional Nadaraya-Watson estimator with a response transform Phi.

    m_Phi(chi) = sum_k Phi(Y_k) K(||X_k - chi|| / h) / sum_k K(||X_k - chi|| / h)

Three transforms are supported: identity (regression), the indicator
``1{Y <= y}`` (conditional cdf) and the scaled symmetric kernel
``K0((y - Y) / b) / b`` (conditional density).

Scalar sums go through :func:`math.fsum`, which is correctly rounded, so
estimates are bit-identical under any permutation of the sample.  The
vectorized density curve gets the same guarantee by summing in a canonical
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from numpy.typing import NDArray

from .curves import Curve, FunctionalSample
from .errors import EmptyNeighborhoodError
from .kernels import OneSidedKernel, SymmetricKernel


_CHUNK = 1024


@dataclass(frozen=True)
class PhiTransform:
    kind: Literal["identity", "indicator", "density"]
    y: Optional[float] = None
    b: Optional[float] = None
    k0: Optional[SymmetricKernel] = None

    def __post_init__(self):
        if self.kind not in ("identity", "indicator", "density"):
            raise ValueError(f"unknown Phi kind {self.kind!r}")
        if self.kind in ("indicator", "density") and self.y is None:
            raise ValueError(f"{self.kind} transform needs y")
        if self.kind == "density":
            if self.b is None or not self.b > 0:
                raise ValueError("density transform needs b > 0")
            if self.k0 is None:
                raise ValueError("density transform needs a symmetric kernel k0")

    @classmethod
    def identity(cls) -> "PhiTransform":
        return cls("identity")

    @classmethod
    def indicator(cls, y: float) -> "PhiTransform":
        return cls("indicator", y=float(y))

    @classmethod
    def density(cls, y: float, b: float, k0: SymmetricKernel) -> "PhiTransform":
        return cls("density", y=float(y), b=float(b), k0=k0)


@dataclass(frozen=True)
class EstimateResult:
    value: float
    neighbor_count: int
    denominator: float


def apply_phi(phi: PhiTransform, y_k):
    """Evaluate Phi elementwise; returns a float for scalar input."""
    y_k = np.asarray(y_k, dtype=float)
    if phi.kind == "identity":
        out = y_k.copy()
    elif phi.kind == "indicator":
        out = (y_k <= phi.y).astype(float)
    else:
        out = np.asarray(phi.k0((phi.y - y_k) / phi.b), dtype=float) / phi.b
    return out if out.ndim else float(out)


def kernel_weights(distances: NDArray, h: float, kernel: OneSidedKernel) -> NDArray:
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return np.asarray(kernel(np.asarray(distances, dtype=float) / h), dtype=float)


def _weighted_ratio(weights: NDArray, phi_values: NDArray, h: float) -> EstimateResult:
    denom = math.fsum(weights)
    if not denom > 0.0:
        raise EmptyNeighborhoodError(f"no sample curve has positive kernel weight at h={h}")
    numer = math.fsum(weights * phi_values)
    return EstimateResult(numer / denom, int(np.count_nonzero(weights > 0.0)), denom)


def estimate_from_distances(
    distances: NDArray, phi_values: NDArray, h: float, kernel: OneSidedKernel
) -> EstimateResult:
    """Estimator on precomputed distances ``d_k`` and transformed responses."""
    return _weighted_ratio(kernel_weights(distances, h, kernel), np.asarray(phi_values, float), h)


def estimate(
    sample: FunctionalSample,
    chi: Curve,
    h: float,
    kernel: OneSidedKernel,
    phi: Optional[PhiTransform] = None,
    metric: str = "l2",
) -> EstimateResult:
    phi = phi or PhiTransform.identity()
    return estimate_from_distances(
        sample.distances_to(chi, metric), apply_phi(phi, sample.responses), h, kernel
    )


def estimate_cdf_curve(
    sample: FunctionalSample, chi: Curve, h: float, kernel: OneSidedKernel, y_grid, metric: str = "l2"
) -> NDArray:
    """Conditional cdf estimate at each ``y`` in the (ascending) ``y_grid``.

    Exact rounding of the partial sums keeps the output monotone and makes it
    equal to 1 once every positively weighted response is included.
    """
    y_grid = np.asarray(y_grid, dtype=float)
    if np.any(np.diff(y_grid) < 0):
        raise ValueError("y_grid must be sorted ascending")
    w = kernel_weights(sample.distances_to(chi, metric), h, kernel)
    denom = math.fsum(w)
    if not denom > 0.0:
        raise EmptyNeighborhoodError(f"no sample curve has positive kernel weight at h={h}")
    y = sample.responses
    return np.array([math.fsum(w[y <= yy]) / denom for yy in y_grid])


def estimate_density_curve(
    sample: FunctionalSample,
    chi: Curve,
    h: float,
    b: float,
    kernel: OneSidedKernel,
    k0: SymmetricKernel,
    y_grid,
    metric: str = "l2",
) -> NDArray:
    if not b > 0:
        raise ValueError("b must be positive")
    w = kernel_weights(sample.distances_to(chi, metric), h, kernel)
    denom = math.fsum(w)
    if not denom > 0.0:
        raise EmptyNeighborhoodError(f"no sample curve has positive kernel weight at h={h}")
    # canonical column order makes the row sums independent of sample order
    keep = w > 0
    order = np.lexsort((w[keep], sample.responses[keep]))
    y, wk = sample.responses[keep][order], w[keep][order]
    y_grid = np.asarray(y_grid, dtype=float)
    out = np.empty(len(y_grid))
    for start in range(0, len(y_grid), _CHUNK):
        block = y_grid[start:start + _CHUNK, None]
        k = np.asarray(k0((block - y) / b), dtype=float) / b
        out[start:start + _CHUNK] = np.add.reduce(k * wk, axis=1)
    return out / denom
