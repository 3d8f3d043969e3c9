"""Bias reduction by least-squares extrapolation in the regularization parameters.

Pilot estimates ``v_i`` at parameter vectors ``h_i`` are modelled as

    v_i ~ beta_0 + l_1(h_i1) beta_1 + ... + l_p(h_ip) beta_p,

and the reduced estimate is the fitted intercept ``g . v`` with
``g = e_1^T (H^T H)^{-1} H^T``.  The row ``g`` sums to one and annihilates
every link column, which is what removes the leading bias terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import solve_triangular

from .errors import DegenerateDesignError, IllConditionedDesignError, SingularDesignError

DEFAULT_CONDITION_CAP = 1e12


@dataclass(frozen=True)
class LinkFunction:
    name: str
    fn: Callable[[NDArray], NDArray] = field(repr=False, compare=False)

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


LINEAR = LinkFunction("h", lambda x: x)
SQUARE = LinkFunction("h^2", lambda x: x * x)
LINKS = {"h": LINEAR, "linear": LINEAR, "h^2": SQUARE, "h2": SQUARE, "square": SQUARE}


def get_link(name: str) -> LinkFunction:
    try:
        return LINKS[name]
    except KeyError:
        raise ValueError(f"unknown link {name!r}; choose from {sorted(LINKS)}") from None


@dataclass(frozen=True, eq=False)
class BandwidthDesign:
    """B parameter vectors (rows of ``vectors``) with one link per column.

    ``base`` holds the reference values ``h0`` (and ``b0``) so that the
    multipliers are ``C_i = h_i / h0``.
    """

    vectors: NDArray[np.float64]
    links: tuple[LinkFunction, ...]
    base: tuple[float, ...]

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        links = tuple(self.links)
        base = tuple(float(x) for x in self.base)
        B, p = vectors.shape
        if len(links) != p or len(base) != p:
            raise ValueError(f"need {p} links and base values, got {len(links)} and {len(base)}")
        if B < p + 1:
            raise ValueError(f"need B >= p + 1 = {p + 1} parameter vectors, got {B}")
        if not np.all(np.isfinite(vectors)) or np.any(vectors <= 0):
            raise ValueError("regularization parameters must be finite and positive")
        if any(not b > 0 for b in base):
            raise ValueError("base values must be positive")
        if p > 0 and len(np.unique(vectors, axis=0)) != B:
            raise ValueError("parameter vectors must be pairwise distinct")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "base", base)

    @property
    def B(self) -> int:
        return self.vectors.shape[0]

    @property
    def p(self) -> int:
        return self.vectors.shape[1]

    @property
    def bandwidths(self) -> NDArray:
        """The first parameter column (the functional bandwidths ``h_i``)."""
        return self.vectors[:, 0]

    @property
    def multipliers(self) -> NDArray:
        return self.vectors / np.asarray(self.base)

    def satisfies_a6(self) -> bool:
        """``1 < C_1 < ... < C_B`` in every parameter column."""
        C = self.multipliers
        return bool(np.all(C > 1.0) and np.all(np.diff(C, axis=0) > 0))

    def rescaled(self, factor: float) -> "BandwidthDesign":
        return BandwidthDesign(self.vectors * factor, self.links, tuple(b * factor for b in self.base))


def h1_design(bandwidths: Sequence[float], base: Optional[float] = None) -> BandwidthDesign:
    """Columns ``(1, h_i)``.  ``base`` defaults to the smallest bandwidth."""
    h = np.asarray(bandwidths, dtype=float)
    return BandwidthDesign(h[:, None], (LINEAR,), (float(h.min()) if base is None else base,))


def h2_design(
    bandwidths: Sequence[float],
    b_bandwidths: Sequence[float],
    base: Optional[tuple[float, float]] = None,
    b_link: LinkFunction = LINEAR,
) -> BandwidthDesign:
    """Columns ``(1, h_i, l(b_i))``; the default link keeps ``b_i`` raw."""
    h = np.asarray(bandwidths, dtype=float)
    b = np.asarray(b_bandwidths, dtype=float)
    if h.shape != b.shape:
        raise ValueError("h and b sequences must have equal length")
    base = base or (float(h.min()), float(b.min()))
    return BandwidthDesign(np.column_stack([h, b]), (LINEAR, b_link), base)


def intercept_design(B: int) -> BandwidthDesign:
    """p = 0: the design matrix is a column of ones."""
    return BandwidthDesign(np.empty((B, 0)), (), ())


@dataclass(frozen=True, eq=False)
class WeightVector:
    g: NDArray[np.float64]
    design: Optional[BandwidthDesign]
    condition_number: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    def __len__(self) -> int:
        return len(self.g)

    def residuals(self) -> dict[str, float]:
        """``sum g - 1`` and ``sum g_i l_j(h_ij)`` per link column."""
        out = {"sum_minus_one": float(np.sum(self.g) - 1.0)}
        if self.design is not None:
            H = build_design_matrix(self.design)
            for j, link in enumerate(self.design.links):
                out[f"col{j + 1}:{link.name}"] = float(self.g @ H[:, j + 1])
        return out


def build_design_matrix(design: BandwidthDesign) -> NDArray:
    cols = [np.ones(design.B)]
    for j, link in enumerate(design.links):
        cols.append(link(design.vectors[:, j]))
    return np.column_stack(cols)


def projector_weights(design: BandwidthDesign, condition_cap: float = DEFAULT_CONDITION_CAP) -> WeightVector:
    """Intercept row of the least-squares projector, via Householder QR.

    With ``H = QR``, ``e_1^T (H^T H)^{-1} H^T = (R^{-T} e_1)^T Q^T``, so one
    triangular solve replaces the explicit inverse.
    """
    H = build_design_matrix(design)
    k = H.shape[1]
    sv = np.linalg.svd(H, compute_uv=False)
    tol = sv[0] * max(H.shape) * np.finfo(float).eps
    if np.count_nonzero(sv > tol) < k:
        raise SingularDesignError(f"design matrix has rank < {k} (B={design.B})")
    cond = float((sv[0] / sv[-1]) ** 2)
    if cond > condition_cap:
        raise IllConditionedDesignError(
            f"cond(H^T H) = {cond:.3g} exceeds cap {condition_cap:.3g}; bandwidths nearly coincide"
        )
    Q, R = np.linalg.qr(H, mode="reduced")
    e1 = np.zeros(k)
    e1[0] = 1.0
    z = solve_triangular(R, e1, trans="T")
    return WeightVector(Q @ z, design, cond)


def closed_form_weights_h1(bandwidths: Sequence[float], base: Optional[float] = None) -> WeightVector:
    """Explicit weights for the ``(1, h_i)`` design.

    g_i = (sum h^2 - h_i sum h) / (B sum h^2 - (sum h)^2)
    """
    h = np.asarray(bandwidths, dtype=float)
    B = len(h)
    if B < 2:
        raise DegenerateDesignError("closed-form weights need B >= 2")
    s1, s2 = h.sum(), (h * h).sum()
    denom = B * s2 - s1 * s1
    if denom <= 0 or np.ptp(h) == 0:
        raise DegenerateDesignError("bandwidths are all equal; closed-form denominator vanishes")
    g = (s2 - h * s1) / denom
    design = h1_design(h, base) if np.all(h > 0) and len(np.unique(h)) == B else None
    H = np.column_stack([np.ones(B), h])
    return WeightVector(g, design, float(np.linalg.cond(H.T @ H)))


def combine(estimates: Sequence[float], w: WeightVector) -> float:
    v = np.asarray(estimates, dtype=float)
    if v.shape != w.g.shape:
        raise ValueError(f"got {v.shape[0] if v.ndim else 1} estimates for {len(w.g)} weights")
    return float(w.g @ v)


def sum_g_c_squared(design: BandwidthDesign, weights: Optional[WeightVector] = None) -> float:
    """``sum_i g_i C_i^2`` for the first parameter column."""
    weights = weights or projector_weights(design)
    C = design.multipliers[:, 0]
    return float(weights.g @ (C * C))


def limit_sum_g_c_squared(h0: float, hu: float) -> float:
    """Large-B limit of ``sum g_i C_i^2`` for equally spaced bandwidths on ``(h0, hu]``."""
    if not hu > h0 > 0:
        raise ValueError("need hu > h0 > 0")
    d = (hu - h0) / h0
    return -(1.0 + d + d * d / 6.0)


def bias_coefficient_identity(design: BandwidthDesign) -> tuple[float, float]:
    """Both sides of the closed form for ``sum_i g_i h_i^2`` on an H1 design.

    lhs is the direct sum with closed-form weights; rhs is
    ``h0^2 ((sum C^2)^2 - sum C^3 sum C) / (B sum C^2 - (sum C)^2)``.
    No sign is imposed on either value.
    """
    h = design.bandwidths
    h0 = design.base[0]
    lhs = float(closed_form_weights_h1(h).g @ (h * h))
    C = h / h0
    s1, s2, s3 = C.sum(), (C**2).sum(), (C**3).sum()
    denom = design.B * s2 - s1 * s1
    if denom <= 0:
        raise DegenerateDesignError("degenerate H1 design")
    rhs = float(h0 * h0 * (s2 * s2 - s3 * s1) / denom)
    return lhs, rhs
