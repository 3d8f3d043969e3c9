"""Sampled curves on uniform grids, L2 geometry and the synthetic curve process.

Curves are plain value objects: a :class:`Grid` plus a vector of samples.
A :class:`FunctionalSample` stores its curves as one ``(n, n_points)`` array
so that distances to a query curve are a single matrix-vector product.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np
from numpy.typing import NDArray

from .errors import GridMismatchError, InsufficientGridError

DEFAULT_GRID_POINTS = 101
DEFAULT_NOISE_SD = math.sqrt(2.0)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[t_min, t_max]`` with ``n_points`` nodes."""

    t_min: float = -1.0
    t_max: float = 1.0
    n_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.t_min) and math.isfinite(self.t_max)):
            raise ValueError("grid endpoints must be finite")
        if not self.t_min < self.t_max:
            raise ValueError(f"t_min={self.t_min} must be < t_max={self.t_max}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return (self.t_max - self.t_min) / (self.n_points - 1)

    @property
    def points(self) -> NDArray[np.float64]:
        return np.linspace(self.t_min, self.t_max, self.n_points)

    def trapezoid_weights(self) -> NDArray[np.float64]:
        """Weights ``w`` with ``values @ w`` equal to the trapezoid rule."""
        w = np.full(self.n_points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w


@dataclass(frozen=True, eq=False)
class Curve:
    grid: Grid
    values: NDArray[np.float64]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.shape[0] != self.grid.n_points:
            raise ValueError(
                f"expected {self.grid.n_points} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[NDArray], NDArray]) -> "Curve":
        t = grid.points
        return cls(grid, np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape).copy())

    def __add__(self, other: "Curve") -> "Curve":
        _check_same_grid(self.grid, other.grid)
        return Curve(self.grid, self.values + other.values)

    def __sub__(self, other: "Curve") -> "Curve":
        _check_same_grid(self.grid, other.grid)
        return Curve(self.grid, self.values - other.values)

    def shift(self, c: float) -> "Curve":
        return Curve(self.grid, self.values + c)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """n pairs ``(Y_k, X_k)`` with all curves on a shared grid.

    ``values`` has shape ``(n, grid.n_points)``; row k is the curve X_k.
    ``latent`` optionally records the process draws ``(a, b, omega)`` per row.
    """

    grid: Grid
    values: NDArray[np.float64]
    responses: NDArray[np.float64]
    latent: Optional[NDArray[np.float64]] = field(default=None)

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        responses = np.asarray(self.responses, dtype=float).reshape(-1)
        if values.shape[1] != self.grid.n_points:
            raise ValueError("curve length does not match the grid")
        if values.shape[0] != responses.shape[0] or values.shape[0] < 1:
            raise ValueError(
                f"need n >= 1 curves and as many responses, got "
                f"{values.shape[0]} curves and {responses.shape[0]} responses"
            )
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(responses))):
            raise ValueError("sample contains non-finite values")
        values.setflags(write=False)
        responses.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "responses", responses)

    @classmethod
    def from_curves(cls, curves: list[Curve], responses) -> "FunctionalSample":
        if not curves:
            raise ValueError("empty curve list")
        grid = curves[0].grid
        for c in curves[1:]:
            _check_same_grid(grid, c.grid)
        return cls(grid, np.vstack([c.values for c in curves]), responses)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def curves(self) -> list[Curve]:
        return [Curve(self.grid, row) for row in self.values]

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[tuple[float, Curve]]:
        for y, row in zip(self.responses, self.values):
            yield float(y), Curve(self.grid, row)

    def distances_to(self, chi: Curve, metric: str = "l2") -> NDArray[np.float64]:
        """Distance of every sample curve to ``chi`` (see :func:`l2_distance`)."""
        _check_same_grid(self.grid, chi.grid)
        diff = self.values - chi.values
        sq = np.maximum(_weighted_rows(diff * diff, self.grid.trapezoid_weights()), 0.0)
        return np.sqrt(sq / _metric_divisor(self.grid, metric))

    def permuted(self, order) -> "FunctionalSample":
        order = np.asarray(order)
        latent = None if self.latent is None else self.latent[order]
        return FunctionalSample(self.grid, self.values[order], self.responses[order], latent)


@dataclass(frozen=True)
class CurveProcessParams:
    """Distribution of ``X(t) = sin(omega t) + t (a + 2 pi) + b`` and its noise.

    ``a ~ U(a_range)``, ``b ~ U(b_range)``, ``omega ~ U(omega_range)``,
    ``Y = r(X) + eps`` with ``eps ~ N(0, noise_sd**2)``. ``noise_sd = 0`` gives
    noiseless responses.
    """

    a_range: tuple[float, float] = (0.0, 1.0)
    b_range: tuple[float, float] = (0.0, 1.0)
    omega_range: tuple[float, float] = (0.0, 2.0 * math.pi)
    noise_sd: float = DEFAULT_NOISE_SD
    seed: int = 0

    def __post_init__(self):
        if not self.noise_sd >= 0.0:
            raise ValueError("noise_sd must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _weighted_rows(values: NDArray, weights: NDArray) -> NDArray:
    # row-wise reduction, unlike BLAS gemv, rounds each row the same way
    # wherever it sits in the matrix, so sample order cannot change a result
    return np.add.reduce(values * weights, axis=-1)


def _check_same_grid(g1: Grid, g2: Grid) -> None:
    if g1 != g2:
        raise GridMismatchError(f"curves live on different grids: {g1} vs {g2}")


def trapezoid_integral(c: Curve) -> float:
    return float(_weighted_rows(c.values, c.grid.trapezoid_weights()))


METRICS = ("l2", "l2_normalized")


def _metric_divisor(grid: Grid, metric: str) -> float:
    if metric == "l2":
        return 1.0
    if metric == "l2_normalized":
        return grid.t_max - grid.t_min
    raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")


def l2_distance(c1: Curve, c2: Curve, metric: str = "l2") -> float:
    """``sqrt(int (c1 - c2)^2 dt)`` by the trapezoid rule.

    ``metric="l2_normalized"`` divides the integral by the interval length
    (the root-mean-square distance).
    """
    _check_same_grid(c1.grid, c2.grid)
    diff = c1.values - c2.values
    sq = max(float(_weighted_rows(diff * diff, c1.grid.trapezoid_weights())), 0.0)
    return math.sqrt(sq / _metric_divisor(c1.grid, metric))


def _derivative_values(values: NDArray, grid: Grid) -> NDArray:
    if grid.n_points < 3:
        raise InsufficientGridError("derivative needs at least 3 grid points")
    # second-order one-sided stencils at the ends; exact for quadratics
    return np.gradient(values, grid.spacing, axis=-1, edge_order=2)


def finite_difference_derivative(c: Curve) -> Curve:
    """Central differences inside, second-order one-sided stencils at the ends."""
    return Curve(c.grid, _derivative_values(c.values, c.grid))


def _regression_weight(grid: Grid) -> NDArray:
    return 1.0 - np.cos(np.pi * grid.points)


def regression_from_derivative(deriv: NDArray, grid: Grid) -> NDArray:
    """``int |X'(t)| (1 - cos(pi t)) dt`` for one or many derivative rows."""
    w = grid.trapezoid_weights() * _regression_weight(grid)
    return _weighted_rows(np.abs(deriv), w)


def true_regression(c: Curve) -> float:
    """The simulation regression functional ``int |X'(t)| (1 - cos(pi t)) dt``."""
    return float(regression_from_derivative(_derivative_values(c.values, c.grid), c.grid))


def true_regression_batch(values: NDArray, grid: Grid) -> NDArray:
    return regression_from_derivative(_derivative_values(values, grid), grid)


def process_values(a, b, omega, t: NDArray) -> NDArray:
    a, b, omega = (np.asarray(v, dtype=float)[..., None] for v in (a, b, omega))
    return np.sin(omega * t) + t * (a + 2.0 * np.pi) + b


def process_derivative(a, b, omega, t: NDArray) -> NDArray:
    """Analytic ``X'(t) = omega cos(omega t) + a + 2 pi``."""
    a, omega = (np.asarray(v, dtype=float)[..., None] for v in (a, omega))
    return omega * np.cos(omega * t) + a + 2.0 * np.pi + 0.0 * t


def process_curve(a: float, b: float, omega: float, grid: Optional[Grid] = None) -> Curve:
    grid = grid or Grid()
    return Curve(grid, process_values(a, b, omega, grid.points).reshape(-1))


def _rng(seed: int) -> np.random.Generator:
    # Philox is counter based: draw order inside a sample is fixed by index
    return np.random.Generator(np.random.Philox(seed))


def generate_sample(
    params: CurveProcessParams,
    n: int,
    grid: Optional[Grid] = None,
    regression: Optional[Callable[[Curve], float]] = None,
    exact_derivative: bool = False,
) -> FunctionalSample:
    """Draw n i.i.d. pairs from the curve process.

    With ``regression=None`` the built-in functional is evaluated in batch,
    from finite differences or, if ``exact_derivative``, from the analytic
    derivative of the process.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    grid = grid or Grid()
    rng = _rng(params.seed)
    a = rng.uniform(*params.a_range, size=n)
    b = rng.uniform(*params.b_range, size=n)
    omega = rng.uniform(*params.omega_range, size=n)
    eps = rng.standard_normal(n)

    t = grid.points
    values = process_values(a, b, omega, t)
    if regression is not None:
        truth = np.array([regression(Curve(grid, row)) for row in values])
    elif exact_derivative:
        truth = regression_from_derivative(process_derivative(a, b, omega, t), grid)
    else:
        truth = true_regression_batch(values, grid)
    responses = truth + params.noise_sd * eps
    return FunctionalSample(grid, values, responses, latent=np.column_stack([a, b, omega]))


# --------------------------------------------------------------------- CSV io


def write_curve_csv(c: Curve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for t, v in zip(c.grid.points, c.values):
            w.writerow([repr(float(t)), repr(float(v))])


def _grid_from_points(t: NDArray) -> Grid:
    grid = Grid(float(t[0]), float(t[-1]), len(t))
    if not np.allclose(grid.points, t, rtol=0, atol=1e-9 * max(1.0, abs(grid.spacing))):
        raise ValueError("CSV grid is not uniform")
    return grid


def read_curve_csv(path) -> Curve:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip().lower() for h in rows[0]] != ["t", "value"]:
        raise ValueError(f"{path}: expected header 't,value'")
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    return Curve(_grid_from_points(data[:, 0]), data[:, 1])


def write_sample_csv(sample: FunctionalSample, path) -> None:
    """Wide layout: header holds the t grid then ``Y``; one row per curve."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([repr(float(t)) for t in sample.grid.points] + ["Y"])
        for row, y in zip(sample.values, sample.responses):
            w.writerow([repr(float(v)) for v in row] + [repr(float(y))])


def read_sample_csv(path) -> FunctionalSample:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][-1].strip() != "Y":
        raise ValueError(f"{path}: last header column must be 'Y'")
    grid = _grid_from_points(np.array([float(x) for x in rows[0][:-1]]))
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    if data.size == 0:
        raise ValueError(f"{path}: no sample rows")
    return FunctionalSample(grid, data[:, :-1], data[:, -1])
