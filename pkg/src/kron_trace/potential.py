"""Exact discrete potential theory on a resistance network.

Every quantity here is the solution of a Dirichlet problem for the network
Laplacian: a set of vertices is clamped to given values and the rest is
harmonic. Vertex sets are accepted as index arrays or boolean masks.
"""

from __future__ import annotations

import os
import threading
import weakref
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from .errors import (
    BadSet,
    DimensionMismatch,
    NotInterior,
    SingularRestriction,
    SolverFailure,
    ZeroCapacity,
)
from .network import ResistanceNetwork, energy, laplacian

DIRECT_MAX_UNKNOWNS = 20000
# factorizations kept per network, most recently used first
FACTOR_CACHE_SIZE = 8


@dataclass(frozen=True)
class SolverConfig:
    """``method`` is ``"auto"``, ``"direct"`` or ``"cg"``; ``auto`` factorizes
    up to 20000 unknowns and uses Jacobi-preconditioned CG above."""

    method: str = "auto"
    rtol: float = 1e-12
    maxiter: int | None = None

    def __post_init__(self):
        if self.method not in ("auto", "direct", "cg"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if not 0 < self.rtol <= 1e-6:
            raise ValueError("solver tolerance must lie in (0, 1e-6]")


DEFAULT_SOLVER = SolverConfig()


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("KRON_TRACE_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


class Factor:
    """Solver for one symmetric positive definite matrix.

    Immutable once built; ``solve`` may be called from several threads.
    """

    def __init__(self, A: sp.spmatrix, config: SolverConfig = DEFAULT_SOLVER):
        self.A = sp.csc_matrix(A)
        self.config = config
        n = self.A.shape[0]
        self.method = config.method
        if self.method == "auto":
            self.method = "direct" if n <= DIRECT_MAX_UNKNOWNS else "cg"
        if self.method == "direct":
            try:
                self._lu = spla.splu(self.A)
            except RuntimeError as exc:
                raise SolverFailure(f"factorization failed: {exc}") from exc
        else:
            d = self.A.diagonal()
            self._jacobi = spla.LinearOperator((n, n), matvec=lambda x: x / d, dtype=float)

    def _cg(self, b: np.ndarray) -> np.ndarray:
        x, info = spla.cg(self.A, b, rtol=self.config.rtol, atol=0.0, M=self._jacobi,
                          maxiter=self.config.maxiter or 10 * self.A.shape[0])
        if info != 0:
            raise SolverFailure(f"conjugate gradient did not converge (info={info})")
        return x

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self.method == "direct":
            x = self._lu.solve(b)
        elif b.ndim == 1:
            x = self._cg(b)
        else:
            with ThreadPoolExecutor(max_workers=thread_count()) as pool:
                cols = list(pool.map(self._cg, b.T))
            x = np.column_stack(cols) if cols else np.zeros_like(b)
        r = self.A @ x - b
        scale = np.linalg.norm(b, axis=0)
        bad = np.linalg.norm(r, axis=0) > self.config.rtol * np.maximum(scale, 1e-300) * 10
        if np.any(bad & (scale > 0)):
            raise SolverFailure("residual above tolerance")
        return x


_cache: "weakref.WeakKeyDictionary[ResistanceNetwork, dict]" = weakref.WeakKeyDictionary()
_lock = threading.RLock()


def _net_cache(net: ResistanceNetwork) -> dict:
    with _lock:
        c = _cache.get(net)
        if c is None:
            c = {"L": laplacian(net).tocsr(), "factors": OrderedDict()}
            _cache[net] = c
        return c


def laplacian_cached(net: ResistanceNetwork) -> sp.csr_matrix:
    return _net_cache(net)["L"]


def _mask(net: ResistanceNetwork, S) -> np.ndarray:
    S = np.asarray(S)
    if S.dtype == bool:
        if S.shape != (net.n,):
            raise DimensionMismatch("vertex mask has the wrong length")
        return S.copy()
    m = np.zeros(net.n, dtype=bool)
    m[S.astype(int)] = True
    return m


def factor_for(net: ResistanceNetwork, free: np.ndarray,
               config: SolverConfig = DEFAULT_SOLVER) -> Factor:
    """Cached factorization of the Laplacian restricted to the ``free`` mask."""
    cache = _net_cache(net)
    factors = cache["factors"]
    key = (free.tobytes(), config)
    with _lock:
        f = factors.get(key)
        if f is not None:
            factors.move_to_end(key)
            return f
    L = cache["L"]
    idx = np.flatnonzero(free)
    Lff = L[idx][:, idx]
    _check_nonsingular(net, free, Lff)
    f = Factor(Lff, config)
    with _lock:
        factors[key] = f
        while len(factors) > FACTOR_CACHE_SIZE:
            factors.popitem(last=False)
    return f


def _check_nonsingular(net, free, Lff):
    """Every component of the free set must touch a clamped vertex or the ghost."""
    n_comp, labels = connected_components(Lff, directed=False)
    L = laplacian_cached(net)
    idx = np.flatnonzero(free)
    # row sums of the restricted block are positive exactly where there is leakage
    leak = np.asarray(Lff.sum(axis=1)).ravel() > 1e-14 * np.abs(L.diagonal()[idx]).max()
    grounded = np.zeros(n_comp, dtype=bool)
    grounded[labels[leak]] = True
    if not grounded.all():
        raise SingularRestriction("a component of the free set touches no clamped vertex")


def solve_dirichlet(net: ResistanceNetwork, fixed, values,
                    config: SolverConfig = DEFAULT_SOLVER) -> np.ndarray:
    """Vertex function equal to ``values`` on ``fixed`` and harmonic elsewhere.

    ``values`` is a full-length vector (entries off ``fixed`` are ignored) or a
    matrix with one column per right-hand side.
    """
    fixed = _mask(net, fixed)
    free = ~fixed
    values = np.asarray(values, dtype=float)
    out = np.array(values, dtype=float, copy=True)
    if values.ndim == 1:
        out[free] = 0.0
    else:
        out[free, :] = 0.0
    if not free.any():
        return out
    L = laplacian_cached(net)
    rhs = -(L[np.flatnonzero(free)][:, np.flatnonzero(fixed)] @ out[fixed])
    out[free] = factor_for(net, free, config).solve(rhs)
    return out


def _boundary_vector(net, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    nb = int(net.boundary.sum())
    if u.shape[0] == net.n:
        return u[net.boundary]
    if u.shape[0] != nb:
        raise DimensionMismatch(f"boundary data has length {u.shape[0]}, boundary has {nb} vertices")
    if not np.all(np.isfinite(u)):
        raise ValueError("boundary data must be finite")
    return u


def harmonic_extension(net: ResistanceNetwork, u_boundary,
                       config: SolverConfig = DEFAULT_SOLVER) -> np.ndarray:
    """Energy-minimizing extension of boundary data (boundary order, or a full vector)."""
    ub = _boundary_vector(net, u_boundary)
    full = np.zeros((net.n,) + ub.shape[1:])
    full[net.boundary] = ub
    return solve_dirichlet(net, net.boundary, full, config)


def harmonic_measure(net: ResistanceNetwork, x0: int,
                     config: SolverConfig = DEFAULT_SOLVER) -> np.ndarray:
    """Hitting distribution of the boundary from interior vertex ``x0``.

    Uses symmetry: the row of ``-L_II^{-1} L_IB`` at ``x0`` is ``-L_BI g`` with
    ``g = L_II^{-1} e_{x0}``.
    """
    if net.boundary[x0]:
        raise NotInterior(f"vertex {net.ids[x0]!r} is on the boundary")
    interior = ~net.boundary
    iidx = np.flatnonzero(interior)
    e = np.zeros(len(iidx))
    e[np.searchsorted(iidx, x0)] = 1.0
    g = factor_for(net, interior, config).solve(e)
    L = laplacian_cached(net)
    w = -(L[net.boundary_idx][:, iidx] @ g)
    return np.maximum(w, 0.0)


def _interior_set(net, K, name="K") -> np.ndarray:
    K = _mask(net, K)
    if not K.any():
        raise BadSet(f"{name} is empty")
    if np.any(K & net.boundary):
        raise BadSet(f"{name} must not meet the boundary")
    return K


def equilibrium_potential(net: ResistanceNetwork, K,
                          config: SolverConfig = DEFAULT_SOLVER) -> np.ndarray:
    """Condenser potential: 1 on K, 0 on the boundary (and ghost), harmonic elsewhere."""
    K = _interior_set(net, K)
    vals = K.astype(float)
    return solve_dirichlet(net, K | net.boundary, vals, config)


def capacity(net: ResistanceNetwork, O1, O2, config: SolverConfig = DEFAULT_SOLVER) -> float:
    """Minimal energy of f with f = 1 on O1 and f = 0 off O2."""
    O1, O2 = _mask(net, O1), _mask(net, O2)
    if not O1.any():
        raise BadSet("O1 is empty")
    if np.any(O1 & ~O2):
        raise BadSet("O1 must be contained in O2")
    if O2.all() and not net.has_ghost:
        raise BadSet("complement of O2 is empty")
    f = solve_dirichlet(net, O1 | ~O2, O1.astype(float), config)
    return energy(net, f)


def green_matrix(net: ResistanceNetwork, U, config: SolverConfig = DEFAULT_SOLVER):
    """Inverse of the Laplacian restricted to U, with the index array of U."""
    U = _mask(net, U)
    if np.any(U & net.boundary):
        raise BadSet("U must avoid the boundary")
    if U.all():
        raise SingularRestriction("U has no complement")
    idx = np.flatnonzero(U)
    G = factor_for(net, U, config).solve(np.eye(len(idx)))
    return 0.5 * (G + G.T), idx


def green_function(net: ResistanceNetwork, U, x: int, y: int,
                   config: SolverConfig = DEFAULT_SOLVER) -> float:
    """Green function of U: the (x, y) entry of the inverse restricted Laplacian."""
    U = _mask(net, U)
    if np.any(U & net.boundary):
        raise BadSet("U must avoid the boundary")
    if not (U[x] and U[y]):
        raise BadSet("x and y must lie in U")
    if U.all():
        raise SingularRestriction("U has no complement")
    idx = np.flatnonzero(U)
    e = np.zeros(len(idx))
    e[np.searchsorted(idx, y)] = 1.0
    g = factor_for(net, U, config).solve(e)
    return float(g[np.searchsorted(idx, x)])


def sweep(net: ResistanceNetwork, h, K, config: SolverConfig = DEFAULT_SOLVER) -> np.ndarray:
    """h on the boundary, 0 on K, harmonic elsewhere (boundary reached before K)."""
    hb = _boundary_vector(net, h)
    K = _mask(net, K)
    if np.any(K & net.boundary):
        raise BadSet("K must not meet the boundary")
    vals = np.zeros(net.n)
    vals[net.boundary] = hb
    return solve_dirichlet(net, K | net.boundary, vals, config)


def c_functional(net: ResistanceNetwork, h, K, config: SolverConfig = DEFAULT_SOLVER) -> float:
    """``-E(H^K h, e_K) / E(e_K, e_K)``."""
    e = equilibrium_potential(net, K, config)
    cap = energy(net, e)
    if not cap > 0:
        raise ZeroCapacity("condenser potential has zero energy")
    return -energy(net, sweep(net, h, K, config), e) / cap


def equilibrium_boundary_measure(net: ResistanceNetwork, K,
                                 config: SolverConfig = DEFAULT_SOLVER) -> np.ndarray:
    """Boundary measure ``z -> c(delta_z, K)``, in boundary order.

    ``H^K delta_z`` vanishes on K, equals ``delta_z`` on the boundary and
    ``L e_K`` vanishes elsewhere, so ``E(H^K delta_z, e_K) = (L e_K)(z)``.
    """
    e = equilibrium_potential(net, K, config)
    cap = energy(net, e)
    if not cap > 0:
        raise ZeroCapacity("condenser potential has zero energy")
    flux = laplacian_cached(net) @ e
    return np.maximum(-flux[net.boundary] / cap, 0.0)
