"""Deterministic builders for the example domains.

Each generator returns a :class:`GeneratedDomain` bundling the network with
its geometry; ``sigma`` is the uniform reference measure on the boundary,
aligned with ``net.boundary_idx``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimensions, LevelOutOfRange, NonpositiveConductance
from .geometry import BoundaryGeometry, build_geometry
from .network import ResistanceNetwork, build_network

SG_MAX_LEVEL = 8


@dataclass(eq=False)
class GeneratedDomain:
    net: ResistanceNetwork
    geom: BoundaryGeometry
    sigma: np.ndarray
    label: str
    level: int | None = None
    params: dict = field(default_factory=dict)
    # vertex permutation realizing a reflection symmetry, when known
    mirror: np.ndarray | None = None
    # deep interior vertex used as the pole of the reference harmonic measure
    pole: int | None = None
    # per boundary point, distance to the nearest artificial reflecting wall
    wall_distance: np.ndarray | None = None

    @property
    def boundary(self) -> np.ndarray:
        return self.net.boundary_idx


def gen_star(c) -> GeneratedDomain:
    """Star with center ``o`` and leaves ``x1..xn``; edge (o, x_i) has conductance c_i."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or len(c) < 2:
        raise ValueError("a star needs at least two leaves")
    if np.any(~(c > 0)):
        raise NonpositiveConductance("star conductances must be positive")
    n = len(c)
    ids = ["o"] + [f"x{i + 1}" for i in range(n)]
    edges = [("o", f"x{i + 1}", c[i]) for i in range(n)]
    net = build_network(ids, edges, [1.0] + [0.0] * n, [False] + [True] * n)
    geom = build_geometry(net, 1.0, radius_grid=[1.0, 2.0])
    return GeneratedDomain(net, geom, np.full(n, 1.0 / n), "star",
                           params={"c": c.tolist()}, pole=0)


def gen_path(n_edges: int, c=None) -> GeneratedDomain:
    """Chain 0..n with boundary {0, n}."""
    if n_edges < 2:
        raise BadDimensions("a path needs at least two edges")
    c = np.ones(n_edges) if c is None else np.asarray(c, dtype=float)
    if len(c) != n_edges:
        raise BadDimensions("need one conductance per edge")
    ids = [str(i) for i in range(n_edges + 1)]
    edges = [(str(i), str(i + 1), c[i]) for i in range(n_edges)]
    bnd = [i in (0, n_edges) for i in range(n_edges + 1)]
    m0 = [0.0 if b else 1.0 for b in bnd]
    net = build_network(ids, edges, m0, bnd, coords=[[i] for i in range(n_edges + 1)])
    geom = build_geometry(net, 1.0)
    return GeneratedDomain(net, geom, np.full(2, 0.5), "path",
                           params={"n_edges": n_edges, "c": c.tolist()},
                           pole=n_edges // 2)


# ---------------------------------------------------------------------------
# slit Sierpinski gasket


def _sg_cells(level: int):
    """Level-``level`` cells as (word, (apex, left, right)) in integer
    coordinates (i, j): position i*e1 + j*e2 in units of 2**-level."""
    N = 2 ** level
    cells = [("", ((0, N), (0, 0), (N, 0)))]
    for _ in range(level):
        nxt = []
        for w, (a, b, c) in cells:
            ab = ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)
            ac = ((a[0] + c[0]) // 2, (a[1] + c[1]) // 2)
            bc = ((b[0] + c[0]) // 2, (b[1] + c[1]) // 2)
            nxt.append((w + "0", (a, ab, ac)))
            nxt.append((w + "1", (ab, b, bc)))
            nxt.append((w + "2", (ac, bc, c)))
        cells = nxt
    return cells


def word_distance(words: list[str]) -> np.ndarray:
    """Pairwise ``(3/2) 2**-k`` metric on boundary words over {1, 2}.

    ``k`` is one less than the first index at which the infinite words
    ``w + w[-1]*inf`` differ; words of a common length differ at the latest
    in their last letter, so comparing the finite words suffices.
    """
    W = np.array([[int(ch) for ch in w] for w in words])
    diff = W[:, None, :] != W[None, :, :]
    first = np.argmax(diff, axis=2)  # 0-based index of first difference
    rho = 1.5 * 2.0 ** (-first.astype(float))
    rho[~diff.any(axis=2)] = 0.0
    return rho


def gen_sg_slit(level: int) -> GeneratedDomain:
    """Level-``level`` slit gasket: bottom edges removed, bottom vertices split."""
    if not 1 <= level <= SG_MAX_LEVEL:
        raise LevelOutOfRange(f"level must be in [1, {SG_MAX_LEVEL}], got {level}")
    n = level
    N = 2 ** n
    cells = _sg_cells(n)
    c = (5.0 / 3.0) ** n

    cell_count: dict[tuple, int] = {}
    for _, corners in cells:
        for p in corners:
            cell_count[p] = cell_count.get(p, 0) + 1
    interior_pts = sorted((p for p in cell_count if p[1] > 0), key=lambda p: (p[1], p[0]))

    def key(p):
        return f"{p[0]},{p[1]}"

    edge_list, bwords, bx = [], [], []
    for w, (a, b, cc) in cells:
        if b[1] > 0:
            edge_list += [(key(a), key(b), c), (key(a), key(cc), c), (key(b), key(cc), c)]
            continue
        # bottom cell: drop the bottom edge, attach each corner copy to the apex
        for s, corner in (("1", b), ("2", cc)):
            bwords.append(w + s)
            bx.append(corner[0] / N)
            edge_list.append((key(a), f"b:{w}{s}", c))

    order = np.argsort(bwords)
    bwords = [bwords[k] for k in order]
    bx = [bx[k] for k in order]
    ids = [key(p) for p in interior_pts] + [f"b:{w}" for w in bwords]
    m0 = [cell_count[p] * 3.0 ** (-n) for p in interior_pts] + [0.0] * len(bwords)
    coords = [[(i + j / 2) / N, j * np.sqrt(3) / 2 / N] for i, j in interior_pts]
    coords += [[x, 0.0] for x in bx]
    flags = [False] * len(interior_pts) + [True] * len(bwords)
    net = build_network(ids, edge_list, m0, flags, coords=coords)

    h = 2.0 ** (-n)
    rho = word_distance(bwords)
    grid = 1.5 * 2.0 ** (-np.arange(1, n + 1, dtype=float))
    labels = {int(v): w for v, w in zip(net.boundary_idx, bwords)}
    geom = build_geometry(net, h, rho_b=rho, radius_grid=grid, labels=labels)

    flip = str.maketrans("12", "21")
    mirror = np.empty(net.n, dtype=int)
    for k, (i, j) in enumerate(interior_pts):
        mirror[k] = net.idx(f"{N - i - j},{j}")
    for w in bwords:
        mirror[net.idx(f"b:{w}")] = net.idx(f"b:{w.translate(flip)}")
    sigma = np.full(len(bwords), 2.0 ** (-(n + 1)))
    return GeneratedDomain(net, geom, sigma, "sg-slit", level=n,
                           params={"level": n}, mirror=mirror,
                           pole=net.idx(f"0,{N}"))


# ---------------------------------------------------------------------------
# lattice domains


def gen_half_strip(W: int, H: int, far_mode: str = "reflecting") -> GeneratedDomain:
    """Lattice {0..W} x {0..H} with boundary row y = 0.

    ``far_mode="absorbing"`` connects the top row to the ghost with unit
    conductances; sides (and the top, when reflecting) are free boundaries.
    """
    if W < 8 or H < W / 2:
        raise BadDimensions(f"need W >= 8 and H >= W/2, got W={W}, H={H}")
    if far_mode not in ("reflecting", "absorbing"):
        raise ValueError(f"unknown far_mode {far_mode!r}")
    pts = [(x, y) for y in range(H + 1) for x in range(W + 1)]
    ids = [f"{x},{y}" for x, y in pts]
    edges = []
    for x, y in pts:
        if x < W:
            edges.append((f"{x},{y}", f"{x + 1},{y}", 1.0))
        if y < H:
            edges.append((f"{x},{y}", f"{x},{y + 1}", 1.0))
    flags = [y == 0 for _, y in pts]
    m0 = [0.0 if b else 1.0 for b in flags]
    ghost = {f"{x},{H}": 1.0 for x in range(W + 1)} if far_mode == "absorbing" else None
    net = build_network(ids, edges, m0, flags, ghost=ghost, coords=pts)
    geom = build_geometry(net, 1.0)
    sigma = np.ones(W + 1)
    return GeneratedDomain(net, geom, sigma, "half-strip",
                           params={"W": W, "H": H, "far_mode": far_mode},
                           mirror=net.indices(f"{W - x},{y}" for x, y in pts),
                           pole=net.idx(f"{W // 2},{H}"),
                           wall_distance=np.minimum(np.arange(W + 1), W - np.arange(W + 1)).astype(float))


def gen_grid_slit(W: int, slit_len: int) -> GeneratedDomain:
    """Square lattice {0..W}^2 with a horizontal slit of ``slit_len`` edges
    centred in the square; slit vertices strictly inside are split into
    upper and lower copies and the outer square is a free boundary."""
    if not 0 < slit_len < W / 2:
        raise BadDimensions(f"need 0 < slit_len < W/2, got slit_len={slit_len}, W={W}")
    y0 = W // 2
    x0 = (W - slit_len) // 2
    x1 = x0 + slit_len
    inner = set(range(x0 + 1, x1))

    def vid(x, y, side=""):
        return f"{x},{y}{side}"

    ids, flags, coords = [], [], []
    for y in range(W + 1):
        for x in range(W + 1):
            if y == y0 and x in inner:
                for side, dy in (("+", 1e-3), ("-", -1e-3)):
                    ids.append(vid(x, y, side))
                    flags.append(True)
                    coords.append((x, y + dy))
            else:
                ids.append(vid(x, y))
                flags.append(y == y0 and x0 <= x <= x1)
                coords.append((x, y))

    def name(x, y, toward):
        if y == y0 and x in inner:
            return vid(x, y, "+" if toward > y0 else "-")
        return vid(x, y)

    edges = []
    for y in range(W + 1):
        for x in range(W + 1):
            if x < W and not (y == y0 and x0 <= x < x1):
                edges.append((name(x, y, y), name(x + 1, y, y), 1.0))
            if y < W:
                edges.append((name(x, y, y + 1), name(x, y + 1, y), 1.0))
    m0 = [0.0 if b else 1.0 for b in flags]
    net = build_network(ids, edges, m0, flags, coords=coords)
    geom = build_geometry(net, 1.0)
    nb = len(net.boundary_idx)
    return GeneratedDomain(net, geom, np.ones(nb), "grid-slit",
                           params={"W": W, "slit_len": slit_len},
                           pole=net.idx(vid(W // 2, W)))


# ---------------------------------------------------------------------------
# stress cases: estimates are expected to degrade with size


def gen_comb(n: int, base: float = 4.0) -> GeneratedDomain:
    """Spine s0..s{n-1} with a boundary tooth t_i at each spine vertex; spine
    edge (s_i, s_{i+1}) and tooth edge (s_i, t_i) have conductance base**i.
    The pole is the far (weak) end s0."""
    if n < 4:
        raise BadDimensions("a comb needs at least four teeth")
    ids = [f"s{i}" for i in range(n)] + [f"t{i}" for i in range(n)]
    edges = [(f"s{i}", f"s{i + 1}", base ** i) for i in range(n - 1)]
    edges += [(f"s{i}", f"t{i}", base ** i) for i in range(n)]
    flags = [False] * n + [True] * n
    m0 = [1.0] * n + [0.0] * n
    net = build_network(ids, edges, m0, flags)
    geom = build_geometry(net, 1.0)
    return GeneratedDomain(net, geom, np.ones(n), "comb", params={"n": n, "base": base},
                           pole=net.idx("s0"))


def gen_attenuated_strip(W: int) -> GeneratedDomain:
    """Reflecting half-strip of height W whose edges incident to the boundary
    row carry conductance 3**-depth with depth = log2(W) - 2."""
    d = gen_half_strip(W, W)
    depth = np.log2(W) - 2
    net = d.net
    cond = np.array(net.cond, dtype=float)
    touch = net.boundary[net.edge_u] | net.boundary[net.edge_v]
    cond[touch] *= 3.0 ** (-depth)
    edges = [(net.ids[u], net.ids[v], c) for u, v, c in zip(net.edge_u, net.edge_v, cond)]
    net2 = build_network(net.ids, edges, net.m0, net.boundary, coords=net.coords)
    return GeneratedDomain(net2, d.geom, d.sigma, "attenuated-strip",
                           params={"W": W, "depth": float(depth)}, mirror=d.mirror,
                           pole=d.pole, wall_distance=d.wall_distance)


GENERATORS = {
    "star": gen_star,
    "path": gen_path,
    "sg-slit": gen_sg_slit,
    "half-strip": gen_half_strip,
    "grid-slit": gen_grid_slit,
}
