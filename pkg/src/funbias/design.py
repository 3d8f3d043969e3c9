"""Bandwidth-sequence builders and a variance comparator for competing designs."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Literal, Optional

import numpy as np

from .biasred import BandwidthDesign, WeightVector, h1_design, projector_weights
from .errors import DegenerateDesignError
from .kernels import OneSidedKernel

Strategy = Literal["centered", "fixed_interval", "two_cluster"]


def centered_equidistant(h_center: float, B: int, stepwidth: float) -> BandwidthDesign:
    """``h_center + k * stepwidth`` for ``k = -(B-1)/2, ..., (B-1)/2``."""
    if B < 2:
        raise DegenerateDesignError("need B >= 2")
    if not stepwidth > 0:
        raise DegenerateDesignError("stepwidth must be positive")
    k = np.arange(B) - (B - 1) / 2.0
    h = h_center + k * stepwidth
    if h[0] <= 0:
        raise DegenerateDesignError(
            f"smallest bandwidth {h[0]:.6g} is not positive (h_center={h_center}, B={B}, sw={stepwidth})"
        )
    return h1_design(h, base=h_center)


def fixed_interval(h0: float, hu: float, B: int) -> BandwidthDesign:
    """``h_i = h0 (1 + i (hu - h0) / (h0 B))``, ``i = 1..B``; ends exactly at ``hu``."""
    if not hu > h0 > 0:
        raise DegenerateDesignError(f"need hu > h0 > 0, got h0={h0}, hu={hu}")
    if B < 2:
        raise DegenerateDesignError("need B >= 2")
    i = np.arange(1, B + 1)
    h = h0 * (1.0 + i * (hu - h0) / (h0 * B))
    h[-1] = hu
    return h1_design(h, base=h0)


def two_cluster(
    lo: tuple[float, float],
    hi: tuple[float, float],
    B: int,
    proportion: float = 0.5,
    base: Optional[float] = None,
) -> BandwidthDesign:
    """``round(proportion * B)`` bandwidths spread over ``lo``, the rest over ``hi``.

    A cluster with a single point sits at the lower end of its interval.
    ``base`` defaults to the midpoint between ``lo[0]`` and ``hi[1]``.
    """
    lo_a, lo_b = sorted(map(float, lo))
    hi_a, hi_b = sorted(map(float, hi))
    if not lo_b < hi_a:
        raise DegenerateDesignError("lo interval must lie strictly below hi interval")
    if lo_a <= 0:
        raise DegenerateDesignError("bandwidths must be positive")
    n_lo = int(round(proportion * B))
    if n_lo < 1 or n_lo > B - 1:
        raise DegenerateDesignError(f"empty cluster: proportion={proportion}, B={B}")
    h = np.concatenate([np.linspace(lo_a, lo_b, n_lo), np.linspace(hi_a, hi_b, B - n_lo)])
    if len(np.unique(h)) != B:
        raise DegenerateDesignError("cluster interval too short for distinct bandwidths")
    return h1_design(h, base=0.5 * (lo_a + hi_b) if base is None else base)


@dataclass(frozen=True)
class DesignSpec:
    """Serializable description of a bandwidth design.

    ``centered``: h_center (None = use the pilot bandwidth), B, stepwidth.
    ``fixed_interval``: h0, hu, B.
    ``two_cluster``: lo, hi, B, proportion.
    """

    strategy: Strategy
    B: int
    h_center: Optional[float] = None
    stepwidth: Optional[float] = None
    h0: Optional[float] = None
    hu: Optional[float] = None
    lo: Optional[tuple[float, float]] = None
    hi: Optional[tuple[float, float]] = None
    proportion: float = 0.5

    def __post_init__(self):
        if self.strategy not in ("centered", "fixed_interval", "two_cluster"):
            raise ValueError(f"unknown design strategy {self.strategy!r}")
        if self.B < 2:
            raise ValueError("B must be >= 2")
        need = {
            "centered": ("stepwidth",),
            "fixed_interval": ("h0", "hu"),
            "two_cluster": ("lo", "hi"),
        }[self.strategy]
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise ValueError(f"{self.strategy} design needs {missing}")

    def build(self, pilot_h: Optional[float] = None) -> BandwidthDesign:
        if self.strategy == "centered":
            center = self.h_center if self.h_center is not None else pilot_h
            if center is None:
                raise ValueError("centered design needs h_center or a pilot bandwidth")
            return centered_equidistant(center, self.B, self.stepwidth)
        if self.strategy == "fixed_interval":
            return fixed_interval(self.h0, self.hu, self.B)
        return two_cluster(self.lo, self.hi, self.B, self.proportion, base=pilot_h)

    def to_dict(self) -> dict[str, Any]:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        for k in ("lo", "hi"):
            if k in d:
                d[k] = list(d[k])
        if self.strategy != "two_cluster":
            d.pop("proportion", None)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DesignSpec":
        d = dict(d)
        for k in ("lo", "hi"):
            if k in d and d[k] is not None:
                d[k] = tuple(float(x) for x in d[k])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown design fields {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def parse(cls, text: str) -> "DesignSpec":
        """Parse the compact CLI form.

        ``centered:h,B,sw`` | ``interval:h0,hu,B`` | ``cluster:lo_a,lo_b,hi_a,hi_b,B[,prop]``
        """
        name, _, rest = text.partition(":")
        try:
            vals = [float(x) for x in rest.split(",") if x.strip()]
        except ValueError:
            raise ValueError(f"bad design string {text!r}") from None
        name = name.strip().lower()
        if name == "centered" and len(vals) == 3:
            return cls("centered", B=int(vals[1]), h_center=vals[0], stepwidth=vals[2])
        if name in ("interval", "fixed_interval") and len(vals) == 3:
            return cls("fixed_interval", B=int(vals[2]), h0=vals[0], hu=vals[1])
        if name in ("cluster", "two_cluster") and len(vals) in (5, 6):
            prop = vals[5] if len(vals) == 6 else 0.5
            return cls("two_cluster", B=int(vals[4]), lo=(vals[0], vals[1]), hi=(vals[2], vals[3]), proportion=prop)
        raise ValueError(f"bad design string {text!r}")


def variance_proxy(
    design: BandwidthDesign,
    weights: Optional[WeightVector],
    tau,
    kernel: OneSidedKernel,
    base: Optional[float] = None,
) -> float:
    """Design-dependent variance factor ``sum g_i g_j tau0(1/C_i) M2_ij / M1^2``.

    ``base`` overrides the design's reference bandwidth so that competing
    designs can be compared at the same ``h0``.
    """
    from .theory import predicted_variance_factor

    weights = weights or projector_weights(design)
    h0 = design.base[0] if base is None else base
    C = design.bandwidths / h0
    return predicted_variance_factor(kernel, tau, weights.g, C)
