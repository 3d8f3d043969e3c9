"""Monte Carlo harness comparing pilot and bias-reduced estimators.

Each replication draws a fresh sample with a seed derived from
``(master_seed, replication_index)`` and evaluates every estimator at the
fixed query curve.  Replications may run on a thread pool; results are
collected in index order, so output does not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray
from scipy import stats

from .biasred import BandwidthDesign, combine, projector_weights
from .curves import (
    DEFAULT_GRID_POINTS,
    DEFAULT_NOISE_SD,
    METRICS,
    CurveProcessParams,
    Grid,
    generate_sample,
    process_curve,
    true_regression,
)
from .design import DesignSpec
from .errors import DegenerateDiagnosticError, EmptyNeighborhoodError, ExperimentFailedError
from .estimator import PhiTransform, apply_phi, estimate_from_distances
from .kernels import make_one_sided, make_symmetric

log = logging.getLogger(__name__)

CHI_PARAMS = (0.3064023, 0.3744585, 3.826435)
CHI_NOISE = -0.1200122
# pilot bandwidth constants c in h = c * n^(-1/3) for the table presets
PILOT_CONSTANTS = {1: 9.28, 2: 8.12, 3: 6.96}
SMALL_H_CONSTANT = 3.71

_RULE = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*\*\s*n\s*\^\s*\(\s*-\s*1\s*/\s*3\s*\)\s*$")


def resolve_pilot_h(pilot_h: Union[float, str], n: int) -> float:
    """A number, or a rule string ``"c*n^(-1/3)"``."""
    if isinstance(pilot_h, str):
        m = _RULE.match(pilot_h)
        if not m:
            try:
                value = float(pilot_h)
            except ValueError:
                raise ValueError(f"cannot parse pilot bandwidth rule {pilot_h!r}") from None
        else:
            value = float(m.group(1)) * n ** (-1.0 / 3.0)
    else:
        value = float(pilot_h)
    if not value > 0:
        raise ValueError(f"pilot bandwidth must be positive, got {value}")
    return value


def replication_seed(master_seed: int, r: int) -> int:
    """Independent 64-bit seed for replication ``r``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(r,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 500
    replications: int = 500
    seed: int = 0
    pilot_h: Union[float, str] = "8.12*n^(-1/3)"
    design: DesignSpec = field(default_factory=lambda: DesignSpec("centered", B=21, stepwidth=0.01))
    # second reduced estimator on the same replications (design comparison)
    compare_design: Optional[DesignSpec] = None
    estimator: str = "reg"
    y: Optional[float] = None
    b: Optional[float] = None
    kernel: str = "quadratic"
    k0: str = "epanechnikov"
    noise_sd: float = DEFAULT_NOISE_SD
    grid_points: int = DEFAULT_GRID_POINTS
    metric: str = "l2_normalized"
    chi_params: tuple[float, float, float] = CHI_PARAMS
    chi_noise: float = CHI_NOISE  # recorded only
    mse_mode: str = "decomposed"
    table: str = ""
    row_label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.replications < 2:
            raise ValueError("need at least 2 replications")
        if self.estimator not in ("reg", "cdf", "pdf"):
            raise ValueError(f"estimator must be reg, cdf or pdf, got {self.estimator!r}")
        if self.estimator in ("cdf", "pdf") and self.y is None:
            raise ValueError(f"{self.estimator} experiments need y")
        if self.estimator == "pdf" and not (self.b is not None and self.b > 0):
            raise ValueError("pdf experiments need b > 0")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.mse_mode not in ("decomposed", "direct"):
            raise ValueError("mse_mode must be 'decomposed' or 'direct'")
        resolve_pilot_h(self.pilot_h, self.n)

    @property
    def h(self) -> float:
        return resolve_pilot_h(self.pilot_h, self.n)

    def phi(self) -> PhiTransform:
        if self.estimator == "reg":
            return PhiTransform.identity()
        if self.estimator == "cdf":
            return PhiTransform.indicator(self.y)
        return PhiTransform.density(self.y, self.b, make_symmetric(self.k0))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["design"] = self.design.to_dict()
        d["compare_design"] = None if self.compare_design is None else self.compare_design.to_dict()
        d["chi_params"] = list(self.chi_params)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        if isinstance(d.get("design"), dict):
            d["design"] = DesignSpec.from_dict(d["design"])
        if isinstance(d.get("compare_design"), dict):
            d["compare_design"] = DesignSpec.from_dict(d["compare_design"])
        if "chi_params" in d:
            d["chi_params"] = tuple(float(x) for x in d["chi_params"])
        return cls(**d)


@dataclass(frozen=True)
class EstimatorSummary:
    name: str
    B: int
    stepwidth: Optional[float]
    sq_bias: float
    variance: float
    mse: float
    mean_estimate: float
    failed: int
    used: int
    mse_direct: float


@dataclass(frozen=True, eq=False)
class MonteCarloReport:
    config: ExperimentConfig
    truth: float
    rows: tuple[EstimatorSummary, ...]
    estimates: dict[str, NDArray] = field(repr=False)

    def __getitem__(self, name: str) -> EstimatorSummary:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    @property
    def metadata(self) -> dict[str, Any]:
        return self.config.to_dict()


def _design_stepwidth(spec: DesignSpec, design: BandwidthDesign) -> Optional[float]:
    if spec.strategy == "centered":
        return spec.stepwidth
    if spec.strategy == "fixed_interval":
        return (spec.hu - spec.h0) / spec.B
    return None


def _truth(config: ExperimentConfig, chi_regression: float) -> float:
    if config.estimator == "reg":
        return chi_regression
    sd = config.noise_sd
    if config.estimator == "cdf":
        if sd == 0:
            return float(chi_regression <= config.y)
        return float(stats.norm.cdf(config.y, loc=chi_regression, scale=sd))
    if sd == 0:
        raise ValueError("pdf truth undefined without noise")
    return float(stats.norm.pdf(config.y, loc=chi_regression, scale=sd))


def _summarize(name, B, sw, est: NDArray, truth: float, n_rep: int) -> EstimatorSummary:
    ok = est[np.isfinite(est)]
    failed = n_rep - len(ok)
    if len(ok) < 2:
        return EstimatorSummary(name, B, sw, math.nan, math.nan, math.nan, math.nan, failed, len(ok), math.nan)
    mean = math.fsum(ok) / len(ok)
    sq_bias = (mean - truth) ** 2
    variance = math.fsum((ok - mean) ** 2) / (len(ok) - 1)
    mse_direct = math.fsum((ok - truth) ** 2) / len(ok)
    return EstimatorSummary(name, B, sw, sq_bias, variance, sq_bias + variance, mean, failed, len(ok), mse_direct)


def _resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        env = os.environ.get("FUNBIAS_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def simulate_estimates(
    config: ExperimentConfig,
    designs: dict[str, BandwidthDesign],
    threads: Optional[int] = None,
) -> tuple[float, dict[str, NDArray]]:
    """Per-replication estimates for the pilot and each named reduced design.

    Failed evaluations (empty neighbourhood at some bandwidth) are NaN.
    """
    grid = Grid(-1.0, 1.0, config.grid_points)
    chi = process_curve(*config.chi_params, grid=grid)
    truth = _truth(config, true_regression(chi))
    kernel = make_one_sided(config.kernel)
    phi = config.phi()
    h = config.h
    weights = {name: projector_weights(d) for name, d in designs.items()}

    def one(r: int) -> list[float]:
        params = CurveProcessParams(noise_sd=config.noise_sd, seed=replication_seed(config.seed, r))
        sample = generate_sample(params, config.n, grid)
        dist = sample.distances_to(chi, config.metric)
        phi_values = np.asarray(apply_phi(phi, sample.responses), dtype=float)
        out = []
        try:
            out.append(estimate_from_distances(dist, phi_values, h, kernel).value)
        except EmptyNeighborhoodError:
            out.append(math.nan)
        for name, design in designs.items():
            try:
                pilots = [estimate_from_distances(dist, phi_values, hb, kernel).value for hb in design.bandwidths]
                out.append(combine(pilots, weights[name]))
            except EmptyNeighborhoodError:
                out.append(math.nan)
        return out

    n_workers = _resolve_threads(threads)
    if n_workers == 1:
        rows = [one(r) for r in range(config.replications)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(one, range(config.replications)))
    arr = np.asarray(rows, dtype=float)
    names = ["pilot", *designs]
    return truth, {name: arr[:, j].copy() for j, name in enumerate(names)}


def _run(config: ExperimentConfig, specs: dict[str, DesignSpec], threads) -> MonteCarloReport:
    h = config.h
    designs = {name: spec.build(pilot_h=h) for name, spec in specs.items()}
    truth, est = simulate_estimates(config, designs, threads)
    R = config.replications
    rows = [_summarize("pilot", 1, None, est["pilot"], truth, R)]
    for name, spec in specs.items():
        rows.append(_summarize(name, designs[name].B, _design_stepwidth(spec, designs[name]), est[name], truth, R))
    if all(row.used == 0 for row in rows):
        raise ExperimentFailedError(f"all {R} replications failed (empty neighbourhoods at h={h:.4g})")
    for row in rows:
        if row.failed:
            log.warning("%s: %d of %d replications failed", row.name, row.failed, R)
    return MonteCarloReport(config, truth, tuple(rows), est)


def run_experiment(config: ExperimentConfig, threads: Optional[int] = None) -> MonteCarloReport:
    """Pilot vs reduced estimator; adds ``reduced_opt`` if ``compare_design`` is set."""
    specs = {"reduced": config.design}
    if config.compare_design is not None:
        specs["reduced_opt"] = config.compare_design
    return _run(config, specs, threads)


def table10_config(**overrides) -> ExperimentConfig:
    base = ExperimentConfig(
        n=500,
        pilot_h=1.0,
        design=DesignSpec("fixed_interval", B=20, h0=0.9, hu=1.1),
        compare_design=DesignSpec("two_cluster", B=20, lo=(0.9, 0.91), hi=(1.09, 1.1), proportion=0.5),
        table="10",
        row_label="design",
    )
    return replace(base, **overrides)


def run_design_comparison(config: Optional[ExperimentConfig] = None, threads: Optional[int] = None) -> MonteCarloReport:
    """Pilot, equidistant-reduced and two-cluster-reduced on shared replications.

    The report has rows ``pilot``, ``reduced`` and ``reduced_opt``.
    """
    config = config or table10_config()
    if config.compare_design is None:
        raise ValueError("design comparison needs compare_design")
    return run_experiment(config, threads)


def table_configs(table_id: int, **overrides) -> list[ExperimentConfig]:
    """The grid of configurations behind one results table."""
    if table_id in (1, 2, 3):
        c = PILOT_CONSTANTS[table_id]
        cells = [
            ExperimentConfig(n=n, pilot_h=f"{c}*n^(-1/3)", row_label=f"n={n}",
                             design=DesignSpec("centered", B=21, stepwidth=0.01))
            for n in (100, 200, 500)
        ]
    elif table_id in (4, 5):
        h = 1.2 if table_id == 4 else 1.0
        cells = [
            ExperimentConfig(n=500, pilot_h=h, row_label=f"sw={sw}",
                             design=DesignSpec("centered", B=21, stepwidth=sw))
            for sw in (0.005, 0.01, 0.02)
        ]
    elif table_id in (6, 7, 8, 9):
        h = 1.2 if table_id in (6, 8) else 1.0
        cells = []
        for B in (11, 15, 21, 41):
            sw = 0.01 if table_id in (6, 7) else 0.1 / ((B - 1) / 2)
            cells.append(ExperimentConfig(n=500, pilot_h=h, row_label=f"B={B}",
                                          design=DesignSpec("centered", B=B, stepwidth=sw)))
    elif table_id == 10:
        cells = [table10_config()]
    else:
        raise ValueError(f"unknown table id {table_id}; expected 1..10")
    return [replace(cfg, table=str(table_id), **overrides) for cfg in cells]


def run_table_suite(table_id: int, overrides: Optional[dict[str, Any]] = None, threads: Optional[int] = None) -> list[MonteCarloReport]:
    return [run_experiment(cfg, threads) for cfg in table_configs(table_id, **(overrides or {}))]


# ------------------------------------------------------------------ diagnostics


def normality_from_values(values) -> tuple[float, float, NDArray]:
    """Standardize by empirical mean/sd; return skewness, excess kurtosis, values."""
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    sd = np.std(v, ddof=1) if len(v) > 1 else 0.0
    if not sd > 0:
        raise DegenerateDiagnosticError("estimates have zero spread")
    z = (v - v.mean()) / sd
    return float(stats.skew(z)), float(stats.kurtosis(z)), z


def normality_diagnostic(
    config: ExperimentConfig, estimator: str = "reduced", threads: Optional[int] = None
) -> tuple[float, float, NDArray]:
    if config.replications < 200:
        raise ValueError("normality diagnostic needs at least 200 replications")
    report = run_experiment(config, threads)
    return normality_from_values(report.estimates[estimator])


def sup_error_diagnostic(
    config: ExperimentConfig,
    chi_params: Sequence[tuple[float, float, float]],
    threads: Optional[int] = None,
) -> dict[str, float]:
    """Monte Carlo mean of ``max_chi |estimate - truth|`` over a set of query curves."""
    per_chi = []
    for params in chi_params:
        rep = run_experiment(replace(config, chi_params=tuple(params)), threads)
        per_chi.append({k: np.abs(v - rep.truth) for k, v in rep.estimates.items()})
    out = {}
    for name in per_chi[0]:
        stacked = np.vstack([d[name] for d in per_chi])
        sup = np.max(stacked, axis=0)
        out[name] = float(np.nanmean(sup))
    return out


# ------------------------------------------------------------------------- CSV

CSV_COLUMNS = ("table", "row_label", "estimator", "n", "h0", "B", "stepwidth", "sq_bias", "variance", "mse", "failed")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_rows(report: MonteCarloReport) -> list[list[str]]:
    cfg = report.config
    out = []
    for row in report.rows:
        mse = row.mse if cfg.mse_mode == "decomposed" else row.mse_direct
        out.append([
            cfg.table, cfg.row_label, row.name, str(cfg.n), _fmt(cfg.h), str(row.B),
            _fmt(row.stepwidth), _fmt(row.sq_bias), _fmt(row.variance), _fmt(mse), str(row.failed),
        ])
    return out


def reports_to_csv(reports: Sequence[MonteCarloReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        w.writerows(report_rows(rep))
    return buf.getvalue()
