"""Two-sided estimate checks on the boundary trace and on the network around it.

Every report records one ratio per admissible (location, scale) sample; the
binding requirement downstream is that the summary statistics do not trend
with refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .besov import ScaleFunction, ThetaField
from .errors import (
    EigenFailure,
    NoAdmissibleScales,
    NoWitness,
    SingularBallSystem,
    WindowEmpty,
    ZeroMass,
)
from .geometry import BALL_RTOL, BoundaryGeometry
from .network import ResistanceNetwork
from .potential import (
    DEFAULT_SOLVER,
    SolverConfig,
    capacity,
    factor_for,
    harmonic_measure,
    laplacian_cached,
)
from .report import Record, Report, exponent_fit
from .trace import TraceForm, trace_energy

__all__ = [
    "hm_doubling_report", "cap_doubling_report", "cap_density_report", "green_hm_report",
    "jump_kernel_report", "killing_report", "exit_time_report", "HeatKernel", "heat_kernel",
    "hk_report", "exponent_fit", "effective_resistance",
]

# Admissible-scale ranges for the doubling and density checks
DOUBLING_DIAM_FRACTION = 0.25
DENSITY_DIAM_FRACTION = 1.0 / 3.0
WITNESS_DEPTH = 0.5


def _inside(d, r):
    return d <= r * (1 + BALL_RTOL)


def _boundary_mask(net, positions) -> np.ndarray:
    m = np.zeros(net.n, dtype=bool)
    m[net.boundary_idx[positions]] = True
    return m


def hm_doubling_report(net: ResistanceNetwork, geom: BoundaryGeometry, x0_set=None,
                       config: SolverConfig = DEFAULT_SOLVER) -> Report:
    """``omega_x0(B(x, 2r)) / omega_x0(B(x, r))`` over boundary x and grid radii
    with ``r < d(x, x0) / 4`` and ``r <= diam / 4``."""
    if x0_set is None:
        raise ValueError("need at least one pole")
    diam = geom.diam_boundary
    records = []
    for x0 in np.atleast_1d(x0_set):
        w = harmonic_measure(net, int(x0), config)
        dx0 = geom.dist_from(int(x0))
        for p, x in enumerate(geom.boundary):
            rb = geom.rho_b[p]
            for r in geom.radius_grid:
                if not (r < dx0[x] / 4 and r <= DOUBLING_DIAM_FRACTION * diam):
                    continue
                a, b = w[_inside(rb, 2 * r)].sum(), w[_inside(rb, r)].sum()
                records.append(Record(f"{net.ids[x]}@{net.ids[int(x0)]}", float(r), a, b))
    if not records:
        raise NoAdmissibleScales("no radius satisfies r < d(x, x0)/4")
    return Report("hm-doubling", records)


def cap_doubling_report(net: ResistanceNetwork, geom: BoundaryGeometry,
                        config: SolverConfig = DEFAULT_SOLVER) -> Report:
    """``Cap(B(x,2r) & bd, B(x,4r)) / Cap(B(x,r) & bd, B(x,4r))``."""
    diam = geom.diam_boundary
    records = []
    for p, x in enumerate(geom.boundary):
        row, rb = geom.dist_from(x), geom.rho_b[p]
        for r in geom.radius_grid:
            if r > DOUBLING_DIAM_FRACTION * diam:
                continue
            O2 = _inside(row, 4 * r)
            if O2.all() and not net.has_ghost:
                continue
            big = capacity(net, _boundary_mask(net, _inside(rb, 2 * r)), O2, config)
            small = capacity(net, _boundary_mask(net, _inside(rb, r)), O2, config)
            records.append(Record(net.ids[x], float(r), big, small))
    if not records:
        raise NoAdmissibleScales("no admissible radius for capacity doubling")
    return Report("cap-doubling", records)


def cap_density_report(net: ResistanceNetwork, geom: BoundaryGeometry, psi: ScaleFunction,
                       config: SolverConfig = DEFAULT_SOLVER) -> Report:
    """``Cap(B(x,r) & bd, B(x,2r)) * Psi(r) / m0(B(x,r))`` for ``r < diam / 3``."""
    diam = geom.diam_boundary
    records = []
    for p, x in enumerate(geom.boundary):
        row, rb = geom.dist_from(x), geom.rho_b[p]
        for r in geom.radius_grid:
            if not r < DENSITY_DIAM_FRACTION * diam:
                continue
            O2 = _inside(row, 2 * r)
            mass = float(net.m0[_inside(row, r)].sum())
            if (O2.all() and not net.has_ghost) or mass <= 0:
                continue
            cap = capacity(net, _boundary_mask(net, _inside(rb, r)), O2, config)
            records.append(Record(net.ids[x], float(r), cap * float(psi(r)), mass))
    if not records:
        raise NoAdmissibleScales("no radius below diam/3")
    return Report("cap-density", records)


def _witness(geom: BoundaryGeometry, row: np.ndarray, r: float) -> int:
    """Interior vertex in B(x, r) whose boundary distance is closest to r/2
    (and at least r/4)."""
    target = WITNESS_DEPTH * r
    interior = np.ones(geom.n, dtype=bool)
    interior[geom.boundary] = False
    cand = np.flatnonzero(interior & _inside(row, r) & (geom.d_D >= target / 2))
    if len(cand) == 0:
        raise NoWitness(f"no witness at depth {target}")
    key = np.lexsort((cand, row[cand], np.abs(geom.d_D[cand] - target)))
    return int(cand[key[0]])


def green_hm_report(net: ResistanceNetwork, geom: BoundaryGeometry, psi: ScaleFunction,
                    x0: int, config: SolverConfig = DEFAULT_SOLVER) -> Report:
    """``omega_x0(B(x,r)) Psi(r) / (g_D(x0, y) m0(B(x,r)))`` with a witness y
    at depth about r/2 inside B(x, r) and the pole outside B(x, 4r)."""
    interior = ~net.boundary
    iidx = np.flatnonzero(interior)
    e = np.zeros(len(iidx))
    e[np.searchsorted(iidx, x0)] = 1.0
    g_int = factor_for(net, interior, config).solve(e)
    green = np.zeros(net.n)
    green[iidx] = g_int
    w = np.maximum(-(laplacian_cached(net)[net.boundary_idx][:, iidx] @ g_int), 0.0)
    dx0 = geom.dist_from(x0)
    records, skipped = [], 0
    for p, x in enumerate(geom.boundary):
        row, rb = geom.dist_from(x), geom.rho_b[p]
        for r in geom.radius_grid:
            if not dx0[x] > 4 * r:
                continue
            try:
                y = _witness(geom, row, r)
            except NoWitness:
                skipped += 1
                continue
            mass = float(net.m0[_inside(row, r)].sum())
            records.append(Record(f"{net.ids[x]}|{net.ids[y]}", float(r),
                                  float(w[_inside(rb, r)].sum() * psi(r)), green[y] * mass))
    if not records:
        raise NoAdmissibleScales("no admissible (x, r) with a witness")
    return Report("green-hm", records, extra={"skipped_no_witness": skipped})


def jump_kernel_report(tf: TraceForm, omega, field_: ThetaField,
                       fit_window=None, pair_mask=None) -> Report:
    """``R(x, y) = J_xy omega(B(x, d)) Theta(x, d) / (omega_x omega_y)`` over
    ordered pairs, with ``J = c_hat / 2``; also fits ``c_hat`` against the
    boundary distance over unordered pairs in ``fit_window`` (and ``pair_mask``)."""
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega > 0)):
        raise ZeroMass("omega must be strictly positive")
    SB, TH = field_.pair_tables()
    R = tf.J * SB * TH / np.outer(omega, omega)
    rho = field_.geom.rho_b
    records = []
    n = tf.n
    for i in range(n):
        for j in range(n):
            if i != j:
                records.append(Record(f"{tf.ids[i]}->{tf.ids[j]}", float(rho[i, j]),
                                      float(R[i, j]), 1.0))
    fit = None
    iu = np.triu_indices(n, 1)
    keep = tf.c_hat[iu] > 0
    if fit_window is not None:
        lo, hi = fit_window
        keep &= (rho[iu] >= lo * (1 - BALL_RTOL)) & (rho[iu] <= hi * (1 + BALL_RTOL))
    if pair_mask is not None:
        keep &= np.asarray(pair_mask)[iu]
    if keep.sum() >= 3 and len(np.unique(rho[iu][keep])) >= 3:
        fit = exponent_fit(rho[iu][keep], tf.c_hat[iu][keep])
    return Report("jump-kernel", records, fit=fit,
                  extra={"fit_window": None if fit_window is None else list(fit_window)})


def killing_report(tf: TraceForm, omega, tol: float = 1e-10) -> Report:
    """Ghost-free: asserts ``max kappa <= tol * max diag``. With killing:
    ``kappa_x omega(bd) / (omega_x sum kappa)`` per boundary point."""
    omega = np.asarray(omega, dtype=float)
    raw = tf.raw if tf.raw is not None else tf.matrix
    scale = float(np.max(np.diag(raw)))
    conservative = not tf.meta.get("ghost", bool(np.any(tf.kappa > 0)))
    total = tf.capacity
    identity_gap = abs(total - trace_energy(tf, np.ones(tf.n)))
    extra = {"sum_kappa": total, "identity_gap": identity_gap,
             "max_row_sum": float(np.max(np.abs(raw.sum(axis=1)))), "diag_scale": scale}
    if conservative:
        rec = [Record("max-row-sum", 0.0, extra["max_row_sum"], scale)]
        return Report("killing", rec, {"max": tol}, extra=extra)
    if np.any(~(omega > 0)):
        raise ZeroMass("omega must be strictly positive")
    mass = float(omega.sum())
    records = [Record(tf.ids[i], 0.0, float(tf.kappa[i] * mass), float(omega[i] * total))
               for i in range(tf.n)]
    return Report("killing", records, extra=extra)


def exit_ball_times(tf: TraceForm, omega, p: int, balls) -> list[float]:
    """Mean exit times from the given boundary-position sets, started at p."""
    A = tf.matrix
    out = []
    for B in balls:
        sub = A[np.ix_(B, B)]
        try:
            u = sla.solve(sub, omega[B], assume_a="pos")
        except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
            raise SingularBallSystem(str(exc)) from exc
        out.append(float(u[np.searchsorted(B, p)]))
    return out


def exit_time_report(tf: TraceForm, omega, field_: ThetaField) -> Report:
    """``E_x[tau_B(x,r)] / Theta(x, r)``; the exit time solves
    ``Lt|_B u = omega|_B`` with u = 0 off B."""
    omega = np.asarray(omega, dtype=float)
    records = []
    for p in range(tf.n):
        balls, radii = [], []
        for r in field_.radius_grid:
            B = np.flatnonzero(_inside(field_.geom.rho_b[p], r))
            if len(B) < 2 or len(B) == tf.n:
                continue
            balls.append(B)
            radii.append(float(r))
        for r, t in zip(radii, exit_ball_times(tf, omega, p, balls)):
            records.append(Record(tf.ids[p], r, t, float(field_.theta_at(p, r))))
    if not records:
        raise NoAdmissibleScales("no ball with at least two points and a nonempty complement")
    return Report("exit-time", records)


@dataclass(eq=False)
class HeatKernel:
    """Spectral form of the trace semigroup with speed measure omega."""

    lam: np.ndarray
    phi: np.ndarray
    omega: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        P = (self.phi * np.exp(-self.lam * t)) @ self.phi.T
        return 0.5 * (P + P.T)

    def diagonal(self, t: float) -> np.ndarray:
        return (self.phi ** 2) @ np.exp(-self.lam * t)

    def mass(self, t: float) -> np.ndarray:
        """``sum_y p(t, x, y) omega_y`` per x."""
        return self(t) @ self.omega


def heat_kernel(tf: TraceForm, omega) -> HeatKernel:
    """Generalized eigendecomposition ``Lt phi = lam D_omega phi``; the bottom
    eigenvalue of a conservative form is set to exactly zero."""
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega > 0)):
        raise ZeroMass("omega must be strictly positive")
    if tf.n > 512:
        raise EigenFailure("boundary too large for a dense eigendecomposition")
    try:
        lam, phi = sla.eigh(tf.matrix, np.diag(omega))
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise EigenFailure(str(exc)) from exc
    lam = np.maximum(lam, 0.0)
    if not np.any(tf.kappa > 0):
        # constants span the kernel of a conservative form
        lam[0] = 0.0
    return HeatKernel(lam, phi, omega)


def theta_inverse(field_: ThetaField, p: int, t: float) -> float:
    """Smallest grid radius where the running maximum of Theta(x, .) reaches t."""
    radii = np.sort(field_.radius_grid)
    env = np.maximum.accumulate(field_.theta_at(p, radii))
    k = int(np.searchsorted(env, t, side="left"))
    return float(radii[min(k, len(radii) - 1)])


def hk_window(field_: ThetaField) -> tuple[float, float]:
    """Median over boundary points of ``[Theta(x, 2 r_min), Theta(x, diam/4)]``."""
    rmin = float(np.min(field_.radius_grid))
    T = np.array([field_.theta_at(p, [2 * rmin, field_.geom.diam_boundary / 4])
                  for p in range(field_.nb)])
    lo, hi = float(np.median(T[:, 0])), float(np.median(T[:, 1]))
    if not hi > lo:
        raise WindowEmpty("time window is empty")
    return lo, hi


def hk_report(tf: TraceForm, omega, field_: ThetaField,
              t_grid=None, n_t: int = 12) -> Report:
    """``p(t, x, y)`` against
    ``1/omega(B(x, Theta^-1(x, t))) ^ t/(omega(B(x, d)) Theta(x, d))`` and
    the on-diagonal log-log slope of the geometric mean of ``p(t, x, x)``."""
    omega = np.asarray(omega, dtype=float)
    hk = heat_kernel(tf, omega)
    if t_grid is None:
        lo, hi = hk_window(field_)
        t_grid = np.geomspace(lo, hi, n_t)
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) == 0:
        raise WindowEmpty("no times given")
    SB, TH = field_.pair_tables()
    off = TH * SB
    records, diag = [], []
    for t in t_grid:
        P = hk(t)
        diag.append(np.exp(np.mean(np.log(np.diag(P)))))
        near = np.array([1.0 / field_.sigma_ball(p, theta_inverse(field_, p, t))
                         for p in range(tf.n)])
        est = np.where(np.eye(tf.n, dtype=bool), near[:, None],
                       np.minimum(near[:, None], t / np.where(off > 0, off, np.inf)))
        for i in range(tf.n):
            for j in range(tf.n):
                records.append(Record(f"{tf.ids[i]}~{tf.ids[j]}", float(t),
                                      float(P[i, j]), float(est[i, j])))
    fit = exponent_fit(t_grid, np.array(diag))
    extra = {"t_grid": t_grid.tolist(), "diag_geomean": [float(v) for v in diag],
             "bottom_eigenvalue": float(hk.lam[0])}
    if tf.capacity > 0:
        alpha = tf.capacity / float(omega.sum())
        extra["decay_rate_over_alpha"] = float(hk.lam[0] / alpha)
    return Report("heat-kernel", records, fit=fit, extra=extra)


def effective_resistance(tf: TraceForm, i: int, j: int) -> float:
    """Resistance between boundary points i and j of a conservative trace:
    ground j and solve for the potential at i under unit injection."""
    keep = np.arange(tf.n) != j
    A = tf.matrix[np.ix_(keep, keep)]
    e = np.zeros(tf.n - 1)
    e[i - (i > j)] = 1.0
    v = sla.solve(A, e, assume_a="pos")
    return float(v[i - (i > j)])
