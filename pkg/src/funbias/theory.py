"""Asymptotic bias and variance constants for pilot and reduced estimators.

Everything is driven by a one-sided kernel K and a limiting small-ball
concentration ``tau0(s)`` on ``[0, 1]``:

    M0 = K(1) - int (s K(s))' tau0(s) ds
    M1 = K(1) - int K'(s) tau0(s) ds
    M3 = int (s^2 K'(s) + 2 s K(s)) tau0(s) ds
    M2[i, j] = K(1) K(C_j / C_i) - int K(s) K'(s C_j / C_i) tau0(s) ds

Integrals use adaptive Simpson with breakpoints at kernel support edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .biasred import BandwidthDesign, WeightVector, projector_weights
from .errors import DegenerateDesignError
from .estimator import PhiTransform, apply_phi, kernel_weights
from .kernels import OneSidedKernel, SymmetricKernel
from .quadrature import adaptive_simpson

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SmallBallModel:
    """Limiting concentration ``tau0``.

    ``power``: ``s**gamma``; ``dirac``: ``1{s >= 1}``; ``table``: linear
    interpolation through ``(table_s, table_tau)``.  Arguments above 1 use the
    natural extension (``s**gamma``, 1, or the last table value).
    """

    family: Literal["power", "dirac", "table"] = "power"
    gamma: float = 1.0
    table_s: Optional[NDArray] = field(default=None, repr=False)
    table_tau: Optional[NDArray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.family == "power":
            if not self.gamma >= 0:
                raise ValueError("power family needs gamma >= 0")
        elif self.family == "table":
            s = np.asarray(self.table_s, dtype=float)
            t = np.asarray(self.table_tau, dtype=float)
            if s.shape != t.shape or s.ndim != 1 or len(s) < 2:
                raise ValueError("table needs matching 1-d arrays of length >= 2")
            if np.any(np.diff(s) <= 0) or s[0] < 0 or s[-1] != 1.0:
                raise ValueError("table_s must increase strictly from >= 0 to 1")
            if np.any(np.diff(t) < 0) or t[-1] != 1.0 or t[0] < 0:
                raise ValueError("table_tau must be nondecreasing with tau(1) = 1")
            object.__setattr__(self, "table_s", s)
            object.__setattr__(self, "table_tau", t)
        elif self.family != "dirac":
            raise ValueError(f"unknown small-ball family {self.family!r}")

    @classmethod
    def power(cls, gamma: float) -> "SmallBallModel":
        return cls("power", gamma=float(gamma))

    @classmethod
    def dirac(cls) -> "SmallBallModel":
        return cls("dirac")

    @classmethod
    def table(cls, s, tau) -> "SmallBallModel":
        return cls("table", table_s=s, table_tau=tau)

    def __call__(self, s):
        if isinstance(s, (float, int)) and self.family == "power":
            return max(float(s), 0.0) ** self.gamma
        s = np.asarray(s, dtype=float)
        if self.family == "power":
            out = np.power(np.maximum(s, 0.0), self.gamma)
        elif self.family == "dirac":
            out = (s >= 1.0).astype(float)
        else:
            out = np.interp(s, self.table_s, self.table_tau)
        return out if out.ndim else float(out)

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self.table_s) if self.family == "table" else ()

    def is_degenerate(self) -> bool:
        return self.family == "dirac"


@dataclass(frozen=True)
class PhiLocalSmoothness:
    """Local behaviour of ``phi(s) = E[m(X) - m(chi) | ||X - chi|| = s]`` at 0.

    ``remainder_scale`` multiplies ``b**2`` in the density case
    (``0.5 * int v^2 K0 * d^2 f / dy^2``); zero for regression and cdf.
    """

    phi_prime0: float = 0.0
    phi_doubleprime0: float = 0.0
    remainder_scale: float = 0.0


@dataclass(frozen=True, eq=False)
class TheoryConstants:
    m0: float
    m1: float
    m3: float
    m2: NDArray
    gamma_var: float
    s_bias: Optional[float] = None


def _integral(f, tau: SmallBallModel, upper: float = 1.0, tol: float = DEFAULT_TOL) -> float:
    if tau.is_degenerate() or upper <= 0:
        return 0.0
    bps = tuple(x for x in tau.breakpoints() if 0 < x < upper)
    return adaptive_simpson(lambda s: float(f(s) * tau(s)), 0.0, upper, tol=tol, breakpoints=bps)


def compute_m_constants(
    kernel: OneSidedKernel, tau: SmallBallModel, tol: float = DEFAULT_TOL
) -> tuple[float, float, float]:
    """``(M0, M1, M3)`` by adaptive quadrature."""
    K1 = kernel(1.0)
    m0 = K1 - _integral(lambda s: kernel(s) + s * kernel.derivative(s), tau, tol=tol)
    m1 = K1 - _integral(kernel.derivative, tau, tol=tol)
    m3 = _integral(lambda s: s * s * kernel.derivative(s) + 2.0 * s * kernel(s), tau, tol=tol)
    return float(m0), float(m1), float(m3)


def compute_m2(
    kernel: OneSidedKernel, tau: SmallBallModel, multipliers: Sequence[float], tol: float = DEFAULT_TOL
) -> NDArray:
    """Matrix ``M2[i, j]`` with ratio ``r = C_j / C_i``.

    ``K'(s r)`` vanishes for ``s r >= 1`` so the integral stops at ``1 / r``.
    """
    C = np.asarray(multipliers, dtype=float)
    if np.any(C <= 0):
        raise ValueError("multipliers must be positive")
    K1 = kernel(1.0)
    B = len(C)
    out = np.empty((B, B))
    cache: dict[float, float] = {}
    for i in range(B):
        for j in range(B):
            r = C[j] / C[i]
            if r not in cache:
                integral = _integral(
                    lambda s, r=r: kernel(s) * kernel.derivative(s * r), tau, upper=min(1.0, 1.0 / r), tol=tol
                )
                cache[r] = K1 * kernel(r) - integral
            out[i, j] = cache[r]
    return out


def variance_factor_from(m1: float, m2: NDArray, g, multipliers, tau: SmallBallModel) -> float:
    g = np.asarray(g, dtype=float)
    C = np.asarray(multipliers, dtype=float)
    if m1 == 0:
        raise DegenerateDesignError("M1 = 0: kernel/concentration pair is degenerate")
    row = g * np.asarray(tau(1.0 / C), dtype=float)
    return float(row @ m2 @ g / (m1 * m1))


def predicted_variance_factor(kernel: OneSidedKernel, tau: SmallBallModel, weights, multipliers) -> float:
    """``Gamma = sum_ij g_i g_j tau0(1/C_i) M2[i, j] / M1^2``.

    Multiplies ``D_Phi(chi) / (n L(h0))`` in the variance of the reduced
    estimator.  Sign is not constrained.
    """
    g = weights.g if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    _, m1, _ = compute_m_constants(kernel, tau)
    m2 = compute_m2(kernel, tau, multipliers)
    return variance_factor_from(m1, m2, g, multipliers, tau)


def compute_constants(
    kernel: OneSidedKernel,
    tau: SmallBallModel,
    design: Optional[BandwidthDesign] = None,
    weights: Optional[WeightVector] = None,
    smooth: Optional[PhiLocalSmoothness] = None,
) -> TheoryConstants:
    """All constants for one kernel/concentration/design; no design means the pilot."""
    m0, m1, m3 = compute_m_constants(kernel, tau)
    if design is None:
        g, C = np.ones(1), np.ones(1)
    else:
        g = (weights or projector_weights(design)).g
        C = design.multipliers[:, 0]
    m2 = compute_m2(kernel, tau, C)
    gamma = variance_factor_from(m1, m2, g, C, tau)
    s_bias = None
    if smooth is not None:
        s_bias = 0.5 * float(g @ (C * C)) * smooth.phi_doubleprime0 * m3 / m1
    return TheoryConstants(m0, m1, m3, m2, gamma, s_bias)


def predicted_bias_pilot(
    constants: TheoryConstants, smooth: PhiLocalSmoothness, h: float, b: Optional[float] = None
) -> float:
    """First-order pilot bias ``phi'(0) M0/M1 h`` plus the density remainder."""
    bias = smooth.phi_prime0 * constants.m0 / constants.m1 * h
    if b is not None:
        bias += smooth.remainder_scale * b * b
    return float(bias)


def predicted_bias(
    constants: TheoryConstants,
    smooth: PhiLocalSmoothness,
    design: BandwidthDesign,
    weights: Optional[WeightVector] = None,
    h0: Optional[float] = None,
    b: Optional[float] = None,
) -> float:
    """``S h0^2`` (+ density remainder ``remainder_scale * b^2``) for an H1 reduction.

    ``S = 0.5 sum g_i C_i^2 phi''(0) M3 / M1`` with ``C`` taken from the
    design's base; ``h0`` defaults to that base.
    """
    g = (weights or projector_weights(design)).g
    C = design.multipliers[:, 0]
    h0 = design.base[0] if h0 is None else h0
    S = 0.5 * float(g @ (C * C)) * smooth.phi_doubleprime0 * constants.m3 / constants.m1
    bias = S * h0 * h0
    if b is not None:
        bias += smooth.remainder_scale * b * b
    return float(bias)


def predicted_bias_double(
    constants: TheoryConstants,
    smooth: PhiLocalSmoothness,
    design: BandwidthDesign,
    k0: SymmetricKernel,
    f_second: float,
    f_fourth: float,
    weights: Optional[WeightVector] = None,
) -> float:
    """Bias of the density estimator reduced jointly in ``h`` and ``b`` (p = 2).

    Keeps the ``b^2`` term ``0.5 f'' int v^2 K0 sum g_i b_i^2``, which the
    weights only cancel when the second link is ``b^2``.
    """
    if design.p != 2:
        raise ValueError("double reduction needs a two-parameter design")
    g = (weights or projector_weights(design)).g
    h, b = design.vectors[:, 0], design.vectors[:, 1]
    h_term = 0.5 * smooth.phi_doubleprime0 * constants.m3 / constants.m1 * float(g @ (h * h))
    b2_term = 0.5 * f_second * k0.second_moment * float(g @ (b * b))
    b4_term = f_fourth / 24.0 * k0.fourth_moment * float(g @ b**4)
    return float(h_term + b2_term + b4_term)


def conditional_variance(
    phi: PhiTransform,
    sigma2: Optional[float] = None,
    cdf: Optional[float] = None,
    density: Optional[float] = None,
) -> float:
    """Plug-in ``D_Phi(chi)`` for the three transforms."""
    if phi.kind == "identity":
        if sigma2 is None:
            raise ValueError("regression needs sigma2")
        return float(sigma2)
    if phi.kind == "indicator":
        if cdf is None:
            raise ValueError("cdf transform needs the conditional cdf value")
        return float(cdf * (1.0 - cdf))
    if density is None:
        raise ValueError("density transform needs the conditional density value")
    return float(phi.k0.square_integral * density / phi.b)


def predicted_variance(gamma: float, d_phi: float, n: int, small_ball_h0: float) -> float:
    """``Gamma D_Phi / (n L(h0))``."""
    return float(gamma * d_phi / (n * small_ball_h0))


# ------------------------------------------------------- empirical diagnostics


def empirical_small_ball(distances, t) -> NDArray:
    """Empirical ``L(t) = P(||X - chi|| <= t)`` from observed distances."""
    d = np.sort(np.asarray(distances, dtype=float))
    return np.searchsorted(d, np.asarray(t, dtype=float), side="right") / len(d)


def empirical_tau(distances, h: float, s) -> NDArray:
    Lh = empirical_small_ball(distances, h)
    if Lh == 0:
        raise ValueError(f"no distances below h={h}")
    return empirical_small_ball(distances, h * np.asarray(s, dtype=float)) / Lh


def fit_power_gamma(distances, h: float, s_grid: Optional[Sequence[float]] = None) -> float:
    """Least-squares slope of ``log tau_h(s)`` on ``log s``.  Diagnostic only."""
    s = np.asarray(s_grid if s_grid is not None else np.linspace(0.2, 1.0, 9), dtype=float)
    tau = empirical_tau(distances, h, s)
    keep = tau > 0
    if keep.sum() < 2:
        raise ValueError("too few positive tau values to fit gamma")
    slope, _ = np.polyfit(np.log(s[keep]), np.log(tau[keep]), 1)
    return float(slope)


def estimate_phi_derivatives(
    distances, responses, h: float, kernel: OneSidedKernel, phi: Optional[PhiTransform] = None
) -> PhiLocalSmoothness:
    """Heuristic ``phi'(0)``, ``phi''(0)`` from a kernel-weighted quadratic fit.

    Fits ``Phi(Y_k) ~ c0 + c1 d_k + c2 d_k^2`` with weights ``K(d_k / h)``;
    returns ``phi'(0) = c1`` and ``phi''(0) = 2 c2``.  Not a consistent
    estimator in general; meant for rough plug-in of the bias formulas.
    """
    d = np.asarray(distances, dtype=float)
    v = apply_phi(phi or PhiTransform.identity(), responses)
    w = kernel_weights(d, h, kernel)
    keep = w > 0
    if keep.sum() < 3:
        raise ValueError("need at least 3 positively weighted points")
    sw = np.sqrt(w[keep])
    X = np.column_stack([np.ones(keep.sum()), d[keep], d[keep] ** 2]) * sw[:, None]
    coef, *_ = np.linalg.lstsq(X, np.asarray(v)[keep] * sw, rcond=None)
    return PhiLocalSmoothness(float(coef[1]), float(2.0 * coef[2]))
