"""Named estimate checks and log-log power-law fits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit


@dataclass(frozen=True)
class Record:
    location: str
    scale: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


@dataclass(frozen=True)
class Fit:
    exponent: float
    constant: float
    residual: float


def exponent_fit(scales, values) -> Fit:
    """Least squares of ``log value`` on ``log scale``.

    ``residual`` is the largest absolute deviation in log coordinates.
    """
    s = np.asarray(scales, dtype=float)
    v = np.asarray(values, dtype=float)
    if s.shape != v.shape or s.ndim != 1:
        raise DegenerateFit("scales and values must be matching 1-d arrays")
    if np.any(~(s > 0)) or np.any(~(v > 0)) or not np.all(np.isfinite(v)):
        raise DegenerateFit("scales and values must be positive and finite")
    if len(np.unique(s)) < 3:
        raise DegenerateFit("need at least three distinct scales")
    x, y = np.log(s), np.log(v)
    slope, icpt = np.polyfit(x, y, 1)
    res = float(np.max(np.abs(y - (slope * x + icpt))))
    return Fit(float(slope), float(np.exp(icpt)), res)


@dataclass
class Report:
    """Per-sample ratios with summary statistics and a pass flag.

    ``thresholds`` may hold ``max_ratio`` (bound on max/min), ``max``,
    ``min`` and ``exponent`` (a ``[lo, hi]`` window for ``fit.exponent``).
    """

    name: str
    records: list[Record]
    thresholds: dict = field(default_factory=dict)
    fit: Fit | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.records], dtype=float)

    @property
    def min(self) -> float:
        return float(self.ratios.min()) if self.records else float("nan")

    @property
    def max(self) -> float:
        return float(self.ratios.max()) if self.records else float("nan")

    @property
    def spread(self) -> float:
        """max/min of the ratios."""
        return self.max / self.min if self.records else float("nan")

    @property
    def passed(self) -> bool:
        t = self.thresholds
        if not self.records:
            return False
        ok = bool(np.all(np.isfinite(self.ratios)) and np.all(self.ratios >= 0))
        if "max_ratio" in t:
            ok &= self.spread <= t["max_ratio"]
        if "max" in t:
            ok &= self.max <= t["max"]
        if "min" in t:
            ok &= self.min >= t["min"]
        if "exponent" in t:
            lo, hi = t["exponent"]
            ok &= self.fit is not None and lo <= self.fit.exponent <= hi
        return bool(ok)

    def summary(self) -> dict:
        out = {"name": self.name, "n": len(self.records), "min": self.min,
               "max": self.max, "ratio": self.spread, "pass": self.passed}
        if self.fit is not None:
            out["fit"] = {"exponent": self.fit.exponent, "constant": self.fit.constant,
                          "residual": self.fit.residual}
        return out


def level_spread(values) -> float:
    """max/min of a statistic tracked across levels or widths."""
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min())
