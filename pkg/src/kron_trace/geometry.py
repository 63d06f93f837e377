"""Metric data attached to a generated domain.

Distances between boundary vertices come from ``rho_b`` (which a generator
may fill with a closed-form metric); every other distance is the graph
shortest path with a fixed edge length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .network import ResistanceNetwork

# closed balls: accept d <= r up to this relative slack
BALL_RTOL = 1e-9


def length_graph(net: ResistanceNetwork, edge_length: float) -> sp.csr_matrix:
    n = net.n
    w = np.full(net.n_edges, float(edge_length))
    g = sp.coo_matrix((np.concatenate([w, w]),
                       (np.concatenate([net.edge_u, net.edge_v]),
                        np.concatenate([net.edge_v, net.edge_u]))), shape=(n, n))
    return g.tocsr()


@dataclass(eq=False)
class BoundaryGeometry:
    """Distances, boundary-distance field and ball queries.

    Attributes
    ----------
    boundary : vertex indices of the boundary, in network order
    rho_b : (nB, nB) boundary metric
    dist_b : (nB, n) graph distance from each boundary vertex to every vertex
    d_D : (n,) distance to the boundary (0 on the boundary)
    radius_grid : admissible radii for scale-dependent reports
    """

    graph: sp.csr_matrix
    edge_length: float
    boundary: np.ndarray
    rho_b: np.ndarray
    dist_b: np.ndarray
    d_D: np.ndarray
    radius_grid: np.ndarray
    labels: dict[int, str] = field(default_factory=dict)
    _rows: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.graph.shape[0]

    @property
    def diam_boundary(self) -> float:
        return float(self.rho_b.max())

    @property
    def bpos(self) -> np.ndarray:
        """Map vertex index -> boundary position (-1 for interior vertices)."""
        out = np.full(self.n, -1, dtype=int)
        out[self.boundary] = np.arange(len(self.boundary))
        return out

    def dist_rows(self, vertices) -> np.ndarray:
        """Graph distances from each of ``vertices`` to all vertices."""
        vertices = np.atleast_1d(np.asarray(vertices, dtype=int))
        missing = [v for v in vertices if int(v) not in self._rows]
        if missing:
            rows = dijkstra(self.graph, directed=False, indices=np.array(missing))
            for v, row in zip(missing, np.atleast_2d(rows)):
                self._rows[int(v)] = row
        return np.array([self._rows[int(v)] for v in vertices])

    def dist_from(self, x: int) -> np.ndarray:
        """Distances from vertex ``x`` to all vertices; boundary entries use rho_b
        when ``x`` is itself a boundary vertex."""
        pos = self.bpos[x]
        if pos >= 0:
            row = self.dist_b[pos].copy()
            row[self.boundary] = self.rho_b[pos]
            return row
        return self.dist_rows([x])[0]

    def ball(self, x: int, r: float, where: str = "all") -> np.ndarray:
        """Vertex indices of the closed ball B(x, r) restricted to ``where``
        (``"all"``, ``"boundary"`` or ``"interior"``)."""
        d = self.dist_from(x)
        inside = d <= r * (1 + BALL_RTOL)
        if where == "boundary":
            inside &= self._bmask()
        elif where == "interior":
            inside &= ~self._bmask()
        return np.flatnonzero(inside)

    def _bmask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[self.boundary] = True
        return m


def build_geometry(net: ResistanceNetwork, edge_length: float = 1.0,
                   rho_b: np.ndarray | None = None,
                   radius_grid=None, labels: dict | None = None) -> BoundaryGeometry:
    """Geometry from graph distances; ``rho_b`` overrides the boundary metric."""
    graph = length_graph(net, edge_length)
    bidx = net.boundary_idx
    dist_b = np.atleast_2d(dijkstra(graph, directed=False, indices=bidx))
    if rho_b is None:
        rho_b = dist_b[:, bidx]
    d_D = dist_b.min(axis=0)
    d_D[bidx] = 0.0
    if radius_grid is None:
        diam = float(np.max(rho_b))
        radius_grid = np.arange(1, int(np.floor(diam / 2 / edge_length)) + 1) * edge_length
    return BoundaryGeometry(graph=graph, edge_length=float(edge_length), boundary=bidx,
                            rho_b=np.asarray(rho_b, dtype=float), dist_b=dist_b, d_D=d_D,
                            radius_grid=np.asarray(radius_grid, dtype=float),
                            labels=dict(labels or {}))
