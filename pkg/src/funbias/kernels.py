"""One-sided kernels on [0, 1] and symmetric kernels on [-1, 1].

One-sided kernels weight the scaled distance ``||X - chi|| / h``.  The
A4-style regularity (``K(1) > 0`` and a strictly negative bounded derivative)
is recorded per kernel as ``satisfies_a4``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ONE_SIDED_NAMES = ("quadratic", "shifted_linear", "triangular")
SYMMETRIC_NAMES = ("epanechnikov", "quartic")


def _quadratic(t):
    return 1.5 * (1.0 - t * t)


def _quadratic_d(t):
    return -3.0 * t


def _shifted_linear(t):
    return 2.0 - t


def _shifted_linear_d(t):
    return -np.ones_like(t) if isinstance(t, np.ndarray) else -1.0


def _triangular(t):
    return 2.0 * (1.0 - t)


def _triangular_d(t):
    return -2.0 * np.ones_like(t) if isinstance(t, np.ndarray) else -2.0


_ONE_SIDED = {
    "quadratic": (_quadratic, _quadratic_d, False),
    "shifted_linear": (_shifted_linear, _shifted_linear_d, True),
    "triangular": (_triangular, _triangular_d, False),
}


@dataclass(frozen=True)
class OneSidedKernel:
    name: str
    satisfies_a4: bool
    _fn: Callable = field(default=None, repr=False, compare=False)
    _deriv: Callable = field(default=None, repr=False, compare=False)
    scale: float = 1.0

    def __call__(self, t):
        """Kernel value, zero outside ``[0, 1]``."""
        if isinstance(t, (float, int)):  # scalar fast path for quadrature
            return self.scale * float(self._fn(t)) if 0.0 <= t <= 1.0 else 0.0
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= 1.0)
        out = np.where(inside, self.scale * self._fn(np.where(inside, t, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def derivative(self, t):
        """``K'(t)`` on ``[0, 1)``; zero elsewhere (support clipping)."""
        if isinstance(t, (float, int)):
            return self.scale * float(self._deriv(t)) if 0.0 <= t < 1.0 else 0.0
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t < 1.0)
        out = np.where(inside, self.scale * self._deriv(np.where(inside, t, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def scaled(self, factor: float) -> "OneSidedKernel":
        if factor <= 0:
            raise ValueError("kernel scale must be positive")
        return OneSidedKernel(self.name, self.satisfies_a4, self._fn, self._deriv, self.scale * factor)


def make_one_sided(name: str) -> OneSidedKernel:
    try:
        fn, deriv, a4 = _ONE_SIDED[name]
    except KeyError:
        raise ValueError(
            f"unknown one-sided kernel {name!r}; choose from {ONE_SIDED_NAMES}"
        ) from None
    return OneSidedKernel(name, a4, fn, deriv)


@dataclass(frozen=True)
class SymmetricKernel:
    """Symmetric kernel on [-1, 1] with its closed-form moment functionals."""

    name: str
    _fn: Callable = field(repr=False, compare=False)
    second_moment: float
    fourth_moment: float
    square_integral: float

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        inside = np.abs(v) <= 1.0
        out = np.where(inside, self._fn(np.where(inside, v, 0.0)), 0.0)
        return out if out.ndim else float(out)


def _epanechnikov(v):
    return 0.75 * (1.0 - v * v)


def _quartic(v):
    u = 1.0 - v * v
    return (15.0 / 16.0) * u * u


_SYMMETRIC = {
    # (fn, int v^2 K, int v^4 K, int K^2)
    "epanechnikov": (_epanechnikov, 1.0 / 5.0, 3.0 / 35.0, 3.0 / 5.0),
    "quartic": (_quartic, 1.0 / 7.0, 1.0 / 21.0, 5.0 / 7.0),
}


def make_symmetric(name: str) -> SymmetricKernel:
    try:
        fn, m2, m4, sq = _SYMMETRIC[name]
    except KeyError:
        raise ValueError(
            f"unknown symmetric kernel {name!r}; choose from {SYMMETRIC_NAMES}"
        ) from None
    return SymmetricKernel(name, fn, m2, m4, sq)
