"""Schur (Kron) reduction of a network onto its boundary.

The trace matrix ``Lt = L_BB - L_BI L_II^{-1} L_IB`` is stored together with
its Beurling-Deny parts: unordered-pair jump conductances ``c_hat = -Lt``
off the diagonal and killing weights ``kappa = Lt @ 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, NegativeOffDiagonal, SolverFailure, ZeroMass
from .network import ResistanceNetwork, energy
from .potential import (
    DEFAULT_SOLVER,
    SolverConfig,
    factor_for,
    harmonic_extension,
    laplacian_cached,
)

CLAMP_RTOL = 1e-13
IDENTITY_RTOL = 1e-10
IDENTITY_SAMPLES = 10


@dataclass(eq=False)
class TraceForm:
    """Boundary Dirichlet form.

    Attributes
    ----------
    ids : boundary vertex ids
    c_hat : (nB, nB) symmetric jump conductances with zero diagonal
    kappa : (nB,) killing weights
    measure : reference boundary measure, or None
    raw : the unclamped Schur complement, when computed from a network
    meta : provenance
    """

    ids: tuple[str, ...]
    c_hat: np.ndarray
    kappa: np.ndarray
    measure: np.ndarray | None = None
    raw: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def J(self) -> np.ndarray:
        """Ordered-pair jump density: each unordered pair carries ``c_hat / 2`` twice."""
        return self.c_hat / 2.0

    @property
    def matrix(self) -> np.ndarray:
        """Trace matrix rebuilt from the stored parts."""
        return np.diag(self.c_hat.sum(axis=1) + self.kappa) - self.c_hat

    def jumps(self):
        """Unordered pairs ``(i, j, c)`` with positive conductance, ``i < j``."""
        i, j = np.triu_indices(self.n, 1)
        keep = self.c_hat[i, j] > 0
        return list(zip(i[keep].tolist(), j[keep].tolist(), self.c_hat[i, j][keep].tolist()))

    @property
    def capacity(self) -> float:
        """Energy of the constant 1, the total killing mass."""
        return float(self.kappa.sum())


def trace_energy(tf: TraceForm, u, v=None) -> float:
    """``sum_pairs c_hat (u_x - u_y)**2 + sum kappa u**2``; bilinear when ``v`` is given."""
    u = np.asarray(u, dtype=float)
    if u.shape != (tf.n,):
        raise DimensionMismatch(f"boundary function has shape {u.shape}, trace has {tf.n} points")
    v = u if v is None else np.asarray(v, dtype=float)
    if v.shape != (tf.n,):
        raise DimensionMismatch(f"boundary function has shape {v.shape}, trace has {tf.n} points")
    du = u[:, None] - u[None, :]
    dv = v[:, None] - v[None, :]
    return float(0.5 * np.sum(tf.c_hat * du * dv) + np.dot(tf.kappa * u, v))


def schur_complement(L: sp.spmatrix, keep: np.ndarray, solve) -> np.ndarray:
    """Dense ``L_KK - L_KF solve(L_FK)`` for the boolean mask ``keep``."""
    L = sp.csr_matrix(L)
    k, f = np.flatnonzero(keep), np.flatnonzero(~keep)
    Lkk = L[k][:, k].toarray()
    if len(f) == 0:
        return Lkk
    Lfk = L[f][:, k].toarray()
    X = solve(Lfk)
    S = Lkk - L[k][:, f] @ X
    return 0.5 * (S + S.T)


def _split(raw: np.ndarray):
    """Clamp roundoff and split a trace matrix into (c_hat, kappa)."""
    diag = np.abs(np.diag(raw))
    scale = np.maximum(diag[:, None], diag[None, :])
    off = raw.copy()
    np.fill_diagonal(off, 0.0)
    tiny = np.abs(off) < CLAMP_RTOL * scale
    if np.any((off > 0) & ~tiny):
        i, j = np.argwhere((off > 0) & ~tiny)[0]
        raise NegativeOffDiagonal(f"trace entry ({i}, {j}) is positive: {off[i, j]:.3e}")
    c_hat = np.where(tiny, 0.0, -off)
    kappa = raw.sum(axis=1)
    if np.any(kappa < -1e-10 * diag):
        raise NegativeOffDiagonal("negative killing weight beyond roundoff")
    kappa = np.where(np.abs(kappa) <= 1e-10 * diag, 0.0, kappa)
    return c_hat, kappa


def schur_trace(net: ResistanceNetwork, measure=None,
                config: SolverConfig = DEFAULT_SOLVER, check: bool = True) -> TraceForm:
    """Trace of the network energy on its boundary.

    With ``check``, ``trace_energy(u) == energy(net, H u)`` is asserted on
    random boundary data (fixed seed) to relative accuracy 1e-10.
    """
    interior = ~net.boundary
    fac = factor_for(net, interior, config)
    raw = schur_complement(laplacian_cached(net), net.boundary, fac.solve)
    c_hat, kappa = _split(raw)
    ids = tuple(net.ids[i] for i in net.boundary_idx)
    tf = TraceForm(ids, c_hat, kappa,
                   measure=None if measure is None else np.asarray(measure, dtype=float),
                   raw=raw, meta={"n_vertices": net.n, "n_edges": net.n_edges,
                                  "ghost": net.has_ghost, "solver": config.method,
                                  "rtol": config.rtol})
    if check:
        rng = np.random.default_rng(0)
        U = rng.standard_normal((len(ids), IDENTITY_SAMPLES))
        H = harmonic_extension(net, U, config)
        for k in range(IDENTITY_SAMPLES):
            a, b = trace_energy(tf, U[:, k]), energy(net, H[:, k])
            if abs(a - b) > IDENTITY_RTOL * max(abs(b), 1e-300):
                raise SolverFailure(f"trace identity violated: {a!r} vs {b!r}")
    return tf


def star_closed_form(c) -> TraceForm:
    """Star trace ``c_hat_ij = c_i c_j / sum(c)``, no killing."""
    c = np.asarray(c, dtype=float)
    C = np.outer(c, c) / c.sum()
    np.fill_diagonal(C, 0.0)
    ids = tuple(f"x{i + 1}" for i in range(len(c)))
    return TraceForm(ids, C, np.zeros(len(c)), meta={"source": "closed-form star"})


def _relative_deviation(A: np.ndarray, B: np.ndarray) -> float:
    floor = np.finfo(float).eps * max(np.abs(A).max(), np.abs(B).max())
    den = np.maximum(np.maximum(np.abs(A), np.abs(B)), floor)
    return float(np.max(np.abs(A - B) / den))


def tower_check(net: ResistanceNetwork, mid_boundary,
                config: SolverConfig = DEFAULT_SOLVER) -> float:
    """Max entrywise relative gap between the direct trace and the trace
    taken through an intermediate vertex set containing the boundary."""
    mid = np.asarray(mid_boundary)
    if mid.dtype != bool:
        m = np.zeros(net.n, dtype=bool)
        m[mid.astype(int)] = True
        mid = m
    if np.any(net.boundary & ~mid):
        raise ValueError("the intermediate set must contain the boundary")
    L = laplacian_cached(net)
    direct = schur_complement(L, net.boundary, factor_for(net, ~net.boundary, config).solve)
    staged = schur_complement(L, mid, factor_for(net, ~mid, config).solve)
    inner = net.boundary[mid]
    two_step = schur_complement(staged, inner, lambda B: np.linalg.solve(
        staged[np.ix_(~inner, ~inner)], B))
    return _relative_deviation(direct, two_step)


def generator_matrix(tf: TraceForm, omega=None) -> np.ndarray:
    """``D_omega^{-1} Lt``: off-diagonal ``-A_xy`` is the jump rate x -> y."""
    omega = tf.measure if omega is None else np.asarray(omega, dtype=float)
    if omega is None:
        raise ZeroMass("no reference measure given")
    if omega.shape != (tf.n,):
        raise DimensionMismatch("reference measure does not match the boundary")
    if np.any(~(omega > 0)):
        raise ZeroMass("reference measure must be strictly positive")
    return tf.matrix / omega[:, None]
