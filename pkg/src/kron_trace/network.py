"""Finite resistance networks and their energy form.

A network is an undirected graph with positive edge conductances. Each vertex
carries a boundary flag and a measure ``m0`` that vanishes on the boundary.
An optional ghost vertex models absorption: it is held at value zero, so it
never appears as a vertex and only contributes per-vertex conductances
``ghost_c`` that add to the diagonal of the Laplacian.

The energy is ``sum_edges c_uv (f_u - f_v)**2 + sum_u ghost_c[u] f_u**2``,
without a factor 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    BoundaryMeasureError,
    DimensionMismatch,
    DisconnectedGraph,
    DuplicateEdge,
    EmptyInterior,
    NetworkError,
    NonpositiveConductance,
    SelfLoop,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ResistanceNetwork:
    """Immutable weighted graph carrying the energy form.

    Build instances with :func:`build_network`; the constructor does no
    validation.
    """

    ids: tuple[str, ...]
    edge_u: np.ndarray
    edge_v: np.ndarray
    cond: np.ndarray
    m0: np.ndarray
    boundary: np.ndarray
    ghost_c: np.ndarray
    coords: np.ndarray | None = None
    index: dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.cond)

    @property
    def has_ghost(self) -> bool:
        return bool(np.any(self.ghost_c > 0))

    @property
    def boundary_idx(self) -> np.ndarray:
        return np.flatnonzero(self.boundary)

    @property
    def interior_idx(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    def idx(self, vid) -> int:
        return self.index[str(vid)]

    def indices(self, vids: Iterable) -> np.ndarray:
        return np.array([self.index[str(v)] for v in vids], dtype=int)

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric conductance matrix (no ghost)."""
        n = self.n
        a = sp.coo_matrix(
            (np.concatenate([self.cond, self.cond]),
             (np.concatenate([self.edge_u, self.edge_v]),
              np.concatenate([self.edge_v, self.edge_u]))),
            shape=(n, n),
        )
        return a.tocsr()


def _invariant_violations(n, eu, ev, cond, m0, boundary, ghost_c):
    problems: list[tuple[type, str]] = []
    if np.any(eu == ev):
        problems.append((SelfLoop, f"{int(np.sum(eu == ev))} self-loop(s)"))
    bad = ~(cond > 0) | ~np.isfinite(cond)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        problems.append((NonpositiveConductance,
                         f"edge ({eu[k]}, {ev[k]}) has conductance {cond[k]!r}"))
    lo, hi = np.minimum(eu, ev), np.maximum(eu, ev)
    keys = lo.astype(np.int64) * n + hi
    if len(np.unique(keys)) != len(keys):
        problems.append((DuplicateEdge, "duplicate edge(s)"))
    if np.any(ghost_c < 0) or not np.all(np.isfinite(ghost_c)):
        problems.append((NonpositiveConductance, "negative ghost conductance"))
    if np.any(m0 < 0) or not np.all(np.isfinite(m0)):
        problems.append((BoundaryMeasureError, "negative or non-finite m0"))
    if np.any(m0[boundary] != 0):
        problems.append((BoundaryMeasureError, "boundary vertices must carry m0 = 0"))
    if np.any(ghost_c[boundary] > 0):
        problems.append((NetworkError, "ghost edges may only attach to interior vertices"))
    interior = ~boundary
    if not np.any(interior) or not np.sum(m0[interior]) > 0:
        problems.append((EmptyInterior, "interior has no vertices or zero m0 mass"))
    if n > 0:
        a = sp.coo_matrix((np.ones(len(eu)), (eu, ev)), shape=(n, n))
        ncomp, _ = connected_components(a, directed=False)
        if ncomp != 1:
            problems.append((DisconnectedGraph, f"graph has {ncomp} connected components"))
    return problems


def build_network(
    vertices: Sequence,
    edges: Iterable[tuple],
    measures: Sequence[float] | Mapping,
    boundary_flags: Sequence[bool] | Mapping,
    ghost: Mapping | None = None,
    coords: Sequence | None = None,
    strict: bool = True,
) -> ResistanceNetwork:
    """Validate inputs and return an immutable :class:`ResistanceNetwork`.

    Parameters
    ----------
    vertices : sequence of ids
        External vertex ids; their order fixes the dense index.
    edges : iterable of ``(u, v, c)``
    measures, boundary_flags : per-vertex sequences, or mappings id -> value
    ghost : mapping id -> conductance to the absorbing ghost, optional
    coords : per-vertex coordinates, optional (kept for export only)
    strict : bool
        When False, invariant checks are deferred to :func:`validate`.
    """
    ids = tuple(str(v) for v in vertices)
    index = {v: i for i, v in enumerate(ids)}
    if len(index) != len(ids):
        raise DuplicateEdge("duplicate vertex ids")
    n = len(ids)

    def per_vertex(values, dtype):
        if isinstance(values, Mapping):
            out = np.zeros(n, dtype=dtype)
            for k, val in values.items():
                out[index[str(k)]] = val
            return out
        out = np.asarray(values, dtype=dtype)
        if out.shape != (n,):
            raise DimensionMismatch(f"expected {n} per-vertex values, got {out.shape}")
        return out

    m0 = per_vertex(measures, float)
    boundary = per_vertex(boundary_flags, bool)
    edge_list = list(edges)
    try:
        eu = np.array([index[str(e[0])] for e in edge_list], dtype=int)
        ev = np.array([index[str(e[1])] for e in edge_list], dtype=int)
    except KeyError as exc:
        raise NetworkError(f"edge references unknown vertex {exc.args[0]!r}") from None
    cond = np.array([float(e[2]) for e in edge_list], dtype=float)
    ghost_c = np.zeros(n)
    if ghost:
        for k, c in ghost.items():
            if strict and not float(c) > 0:
                raise NonpositiveConductance(f"ghost edge at {k!r} has conductance {c!r}")
            ghost_c[index[str(k)]] += float(c)

    problems = _invariant_violations(n, eu, ev, cond, m0, boundary, ghost_c) if strict else []
    if problems:
        cls, msg = problems[0]
        raise cls(msg)

    xy = None if coords is None else _frozen(np.asarray(coords, dtype=float))
    return ResistanceNetwork(
        ids=ids,
        edge_u=_frozen(eu),
        edge_v=_frozen(ev),
        cond=_frozen(cond),
        m0=_frozen(m0),
        boundary=_frozen(boundary),
        ghost_c=_frozen(ghost_c),
        coords=xy,
        index=index,
    )


def _as_values(net: ResistanceNetwork, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (net.n,):
        raise DimensionMismatch(f"vertex function has shape {f.shape}, network has {net.n} vertices")
    return f


def energy(net: ResistanceNetwork, f, g=None) -> float:
    """Network energy, or the bilinear form when ``g`` is given."""
    f = _as_values(net, f)
    g = f if g is None else _as_values(net, g)
    df = f[net.edge_u] - f[net.edge_v]
    dg = g[net.edge_u] - g[net.edge_v]
    return float(np.dot(net.cond * df, dg) + np.dot(net.ghost_c * f, g))


def laplacian(net: ResistanceNetwork) -> sp.csr_matrix:
    """Sparse symmetric matrix with ``f @ L @ g == energy(net, f, g)``."""
    a = net.adjacency()
    deg = np.asarray(a.sum(axis=1)).ravel() + net.ghost_c
    return (sp.diags(deg) - a).tocsr()


@dataclass(frozen=True)
class Diagnostics:
    n_vertices: int
    n_edges: int
    boundary_count: int
    interior_count: int
    connected: bool
    degree_min: int
    degree_max: int
    degree_mean: float
    m0_total: float
    ghost_total: float


def validate(net) -> Diagnostics:
    """Structural diagnostics for a network or a network JSON document.

    Raises the first invariant violation found; the message lists all of them.
    """
    if not isinstance(net, ResistanceNetwork):
        from .io import network_from_dict  # local import: io depends on this module

        net = network_from_dict(net, strict=False)
    problems = _invariant_violations(net.n, net.edge_u, net.edge_v, net.cond,
                                     net.m0, net.boundary, net.ghost_c)
    if problems:
        raise problems[0][0]("; ".join(msg for _, msg in problems))
    deg = np.bincount(np.concatenate([net.edge_u, net.edge_v]), minlength=net.n)
    return Diagnostics(
        n_vertices=net.n,
        n_edges=net.n_edges,
        boundary_count=int(net.boundary.sum()),
        interior_count=int((~net.boundary).sum()),
        connected=True,
        degree_min=int(deg.min()),
        degree_max=int(deg.max()),
        degree_mean=float(deg.mean()),
        m0_total=float(net.m0.sum()),
        ghost_total=float(net.ghost_c.sum()),
    )
