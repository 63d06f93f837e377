"""Besov seminorms on the boundary with their (VD) and (LS) diagnostics.

Boundary points are addressed by their position in boundary order. Balls
are closed: ``B(x, r) = {y : d(x, y) <= r}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateSample, DimensionMismatch, EmptyBall, InsufficientScales
from .geometry import BALL_RTOL, BoundaryGeometry
from .network import ResistanceNetwork, energy
from .report import Record, Report, exponent_fit
from .trace import TraceForm, trace_energy


@dataclass(frozen=True)
class ScaleFunction:
    """``Psi(r) = r**beta``; doubling with ``C_Psi = 1`` and ``beta1 = beta2 = beta``."""

    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("scale exponent must be positive")

    def __call__(self, r):
        return np.asarray(r, dtype=float) ** self.beta

    def inverse(self, t):
        return np.asarray(t, dtype=float) ** (1.0 / self.beta)

    @property
    def constants(self) -> tuple[float, float, float]:
        return 1.0, self.beta, self.beta


GASKET_WALK_DIMENSION = np.log(5) / np.log(2)


def _ball_mass(sorted_d: np.ndarray, cum: np.ndarray, r) -> np.ndarray:
    k = np.searchsorted(sorted_d, np.asarray(r, dtype=float) * (1 + BALL_RTOL), side="right")
    return np.where(k > 0, cum[np.maximum(k - 1, 0)], 0.0)


@dataclass(eq=False)
class ThetaField:
    """``Theta(x, r) = Psi(r) sigma(B(x, r)) / m0(B(x, r))`` for boundary x.

    The sigma-ball is measured in the boundary metric, the m0-ball over
    interior vertices in graph distance from x.
    """

    psi: ScaleFunction
    sigma: np.ndarray
    m0: np.ndarray
    geom: BoundaryGeometry
    radius_grid: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma.shape != (len(self.geom.boundary),):
            raise DimensionMismatch("sigma must have one entry per boundary vertex")
        if np.any(~(self.sigma > 0)):
            raise ValueError("sigma must have full support on the boundary")
        if self.radius_grid is None:
            self.radius_grid = self.geom.radius_grid
        self.radius_grid = np.asarray(self.radius_grid, dtype=float)

    @property
    def nb(self) -> int:
        return len(self.sigma)

    @cached_property
    def _sigma_tables(self):
        order = np.argsort(self.geom.rho_b, axis=1, kind="stable")
        d = np.take_along_axis(self.geom.rho_b, order, axis=1)
        return d, np.cumsum(self.sigma[order], axis=1)

    @cached_property
    def _m0_tables(self):
        interior = np.ones(self.geom.n, dtype=bool)
        interior[self.geom.boundary] = False
        D = self.geom.dist_b[:, interior]
        w = self.m0[interior]
        order = np.argsort(D, axis=1, kind="stable")
        return np.take_along_axis(D, order, axis=1), np.cumsum(w[order], axis=1)

    def sigma_ball(self, p: int, r) -> np.ndarray:
        d, c = self._sigma_tables
        return _ball_mass(d[p], c[p], r)

    def m0_ball(self, p: int, r) -> np.ndarray:
        d, c = self._m0_tables
        return _ball_mass(d[p], c[p], r)

    def theta_at(self, p: int, r) -> np.ndarray:
        m = self.m0_ball(p, r)
        if np.any(m <= 0):
            raise EmptyBall(f"m0-ball around boundary point {p} has zero mass")
        return self.psi(r) * self.sigma_ball(p, r) / m

    def pair_tables(self):
        """``(sigma(B(x, d_xy)), Theta(x, d_xy))`` for all ordered pairs."""
        if "pairs" not in self._cache:
            rho = self.geom.rho_b
            SB = np.empty_like(rho)
            TH = np.empty_like(rho)
            for p in range(self.nb):
                r = np.where(rho[p] > 0, rho[p], np.inf)
                r_ok = np.where(np.isfinite(r), r, 1.0)
                SB[p] = self.sigma_ball(p, r_ok)
                TH[p] = self.theta_at(p, r_ok)
            self._cache["pairs"] = (SB, TH)
        return self._cache["pairs"]

    def besov_kernel(self) -> np.ndarray:
        """Weights ``sigma_x sigma_y / (sigma(B(x, d)) Theta(x, d))``, zero on the diagonal."""
        if "kernel" not in self._cache:
            SB, TH = self.pair_tables()
            K = np.outer(self.sigma, self.sigma) / (SB * TH)
            np.fill_diagonal(K, 0.0)
            self._cache["kernel"] = K
        return self._cache["kernel"]


def theta(field_: ThetaField, x: int, r) -> float:
    """Theta at boundary vertex ``x`` (network index) and radius ``r``."""
    p = int(field_.geom.bpos[x])
    if p < 0:
        raise ValueError("theta is evaluated at boundary vertices")
    return float(field_.theta_at(p, float(r)))


def besov_seminorm(u, field_: ThetaField, squared: bool = False) -> float:
    """Besov seminorm of boundary data ``u`` (boundary order)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (field_.nb,):
        raise DimensionMismatch("boundary function does not match the boundary")
    K = field_.besov_kernel()
    du = u[:, None] - u[None, :]
    s = float(np.sum(K * du * du))
    return s if squared else float(np.sqrt(s))


def besov_squared_batch(U: np.ndarray, field_: ThetaField) -> np.ndarray:
    """Squared seminorms of the columns of ``U``."""
    K = field_.besov_kernel()
    U = np.asarray(U, dtype=float)
    w = K.sum(axis=0) + K.sum(axis=1)
    return np.einsum("ik,ik->k", U, w[:, None] * U) - 2 * np.einsum("ik,ik->k", U, K @ U)


def vd_report(sigma, geom: BoundaryGeometry, threshold: float | None = None) -> Report:
    """Worst ``sigma(B(x, 2r)) / sigma(B(x, r))`` per radius of the grid."""
    sigma = np.asarray(sigma, dtype=float)
    tf = ThetaField(ScaleFunction(1.0), sigma, np.ones(geom.n), geom)
    records = []
    for r in geom.radius_grid:
        worst, where = 0.0, 0
        for p in range(len(sigma)):
            a, b = tf.sigma_ball(p, 2 * r), tf.sigma_ball(p, r)
            if a / b > worst:
                worst, where, rec = a / b, p, (a, b)
        records.append(Record(f"b{where}", float(r), *rec))
    th = {} if threshold is None else {"max": threshold}
    return Report("volume-doubling", records, th, extra={"C_VD": max(r.ratio for r in records)})


def _admissible_radii(field_: ThetaField, min_radius: float = 0.0) -> np.ndarray:
    diam = field_.geom.diam_boundary
    grid = field_.radius_grid
    keep = (grid < diam * (1 - 1e-12)) & (grid >= min_radius * (1 - 1e-12))
    return np.sort(grid[keep])


def ls_report(field_: ThetaField, exponent_window=None, min_radius: float = 0.0) -> Report:
    """Lower-scaling check of Theta with a pooled log-log exponent fit.

    Radii run over ``[min_radius, diam)``; passing twice the finest grid
    radius drops the one-cell scale, where Theta is not yet self-similar.
    Records every pair r < R at every boundary point as
    ``Theta(x, R) / Theta(x, r)`` against ``(R / r)**beta``; the constant is
    the smallest record ratio.
    """
    radii = _admissible_radii(field_, min_radius)
    if len(radii) < 3:
        raise InsufficientScales("need at least three admissible radii")
    TH = np.array([field_.theta_at(p, radii) for p in range(field_.nb)])
    fit = exponent_fit(np.tile(radii, field_.nb), TH.ravel())
    records = []
    for p in range(field_.nb):
        for i in range(len(radii)):
            for j in range(i + 1, len(radii)):
                records.append(Record(f"b{p}", float(radii[j] / radii[i]), float(TH[p, j] / TH[p, i]),
                                      float((radii[j] / radii[i]) ** fit.exponent)))
    th = {} if exponent_window is None else {"exponent": tuple(exponent_window)}
    return Report("lower-scaling", records, th, fit=fit,
                  extra={"constant": min(r.ratio for r in records)})


def comparability_report(tf: TraceForm, u_samples, field_: ThetaField,
                         transient: bool = False, max_ratio: float | None = None) -> Report:
    """Per-sample ``E_trace(u) / ||u||^2`` with the Besov seminorm, plus the
    L^2(sigma) norm in the transient case."""
    U = np.asarray(u_samples, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    records = []
    for k in range(U.shape[1]):
        u = U[:, k]
        b = besov_seminorm(u, field_, squared=True)
        if transient:
            b += float(np.dot(field_.sigma, u * u))
        if not b > 0:
            raise DegenerateSample(f"sample {k} has zero norm")
        records.append(Record(f"u{k}", 0.0, trace_energy(tf, u), b))
    th = {} if max_ratio is None else {"max_ratio": max_ratio}
    return Report("comparability", records, th)


def l2_restriction_report(net: ResistanceNetwork, sigma, f_samples,
                          max_value: float | None = None) -> Report:
    """``||f|_bd||^2_{L2(sigma)} / (energy(f) + ||f||^2_{L2(m0)})`` per sample."""
    sigma = np.asarray(sigma, dtype=float)
    F = np.asarray(f_samples, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    bidx = net.boundary_idx
    records = []
    for k in range(F.shape[1]):
        f = F[:, k]
        num = float(np.dot(sigma, f[bidx] ** 2))
        den = energy(net, f) + float(np.dot(net.m0, f * f))
        if not den > 0:
            raise DegenerateSample(f"sample {k} has zero energy and mass")
        records.append(Record(f"f{k}", 0.0, num, den))
    th = {} if max_value is None else {"max": max_value}
    return Report("l2-restriction", records, th)
