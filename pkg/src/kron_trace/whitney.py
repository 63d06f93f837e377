"""Whitney covers and the patch-average extension built on their tents.

Centers are interior vertices at distance at least ``floor`` from the
boundary; vertices closer than that form a thin layer that receives the
average of the nearest center's patch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .besov import ThetaField, besov_seminorm
from .errors import (
    DegenerateSample,
    DimensionMismatch,
    EmptyPatch,
    ResolutionTooCoarse,
    UncoveredVertex,
)
from .geometry import BALL_RTOL, BoundaryGeometry
from .network import ResistanceNetwork, energy
from .report import Record, Report

FLOOR_EDGES = 4


@dataclass(eq=False)
class WhitneyCover:
    """Greedy epsilon-Whitney cover.

    Attributes
    ----------
    centers : vertex indices, in admission order (descending d_D)
    radii : ``eps / (1 + eps) * d_D`` per center
    dist : (n_centers, n) graph distances from each center
    patches : boundary positions of ``B(x_i, 2 d_D(x_i))`` per center
    covered : mask of interior vertices with ``d_D >= floor``
    """

    geom: BoundaryGeometry
    eps: float
    floor: float
    centers: np.ndarray
    radii: np.ndarray
    dist: np.ndarray
    patches: list[np.ndarray]
    covered: np.ndarray

    def __len__(self) -> int:
        return len(self.centers)


def build_cover(geom: BoundaryGeometry, eps: float = 0.125,
                floor: float | None = None) -> WhitneyCover:
    """Admit interior vertices in descending d_D order while the balls
    ``B(x, r(x))`` stay pairwise disjoint (``d(x_i, x_j) > r_i + r_j``)."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    floor = FLOOR_EDGES * geom.edge_length if floor is None else float(floor)
    interior = np.ones(geom.n, dtype=bool)
    interior[geom.boundary] = False
    covered = interior & (geom.d_D >= floor * (1 - BALL_RTOL))
    cand = np.flatnonzero(covered)
    if len(cand) == 0:
        raise ResolutionTooCoarse(f"no interior vertex has d_D >= {floor}")
    cand = cand[np.argsort(-geom.d_D[cand], kind="stable")]
    k = eps / (1 + eps)
    centers, radii, rows = [], [], []
    for x in cand:
        r = k * geom.d_D[x]
        if rows:
            D = np.array([row[x] for row in rows])
            if np.any(D <= (r + np.array(radii)) * (1 + BALL_RTOL)):
                continue
        centers.append(int(x))
        radii.append(r)
        rows.append(geom.dist_rows([x])[0])
    dist = np.array(rows)
    patches = []
    for i, x in enumerate(centers):
        F = np.flatnonzero(dist[i, geom.boundary] <= 2 * geom.d_D[x] * (1 + BALL_RTOL))
        if len(F) == 0:
            raise EmptyPatch(f"patch of center {x} is empty")
        patches.append(F)
    return WhitneyCover(geom, float(eps), floor, np.array(centers), np.array(radii),
                        dist, patches, covered)


def cover_violations(cover: WhitneyCover) -> list[str]:
    """Exhaustive check of the cover rules; returns the names of broken ones."""
    g, out = cover.geom, []
    k = cover.eps / (1 + cover.eps)
    if not np.allclose(cover.radii, k * g.d_D[cover.centers], rtol=1e-12):
        out.append("radius rule")
    D = cover.dist[:, cover.centers]
    S = cover.radii[:, None] + cover.radii[None, :]
    off = ~np.eye(len(cover), dtype=bool)
    if np.any(D[off] <= S[off] * (1 + BALL_RTOL)):
        out.append("disjointness")
    reach = cover.dist <= (2 * (1 + cover.eps) * cover.radii)[:, None] * (1 + BALL_RTOL)
    if np.any(cover.covered & ~reach.any(axis=0)):
        out.append("covering")
    return out


def cover_stats(cover: WhitneyCover, lam: float = 2.0) -> Report:
    """Overlap counts of the dilated balls ``B(x_i, lam r_i)`` and the radius
    ratio of intersecting pairs against the sandwich
    ``(1+e-e*lam)/(1+e+e*lam) <= r_j/r_i <= (1+e+e*lam)/(1+e-e*lam)``."""
    e = cover.eps
    if not 0 < lam < (1 + e) / e:
        raise ValueError("lam must lie in (0, (1+eps)/eps)")
    D = cover.dist[:, cover.centers]
    meet = D <= lam * (cover.radii[:, None] + cover.radii[None, :]) * (1 + BALL_RTOL)
    counts = meet.sum(axis=1)
    bound = (1 + e + e * lam) / (1 + e - e * lam)
    ratio = np.where(meet, cover.radii[None, :] / cover.radii[:, None], 1.0)
    records = [Record(f"c{int(x)}", float(cover.radii[i]), float(ratio[i].max()), bound)
               for i, x in enumerate(cover.centers)]
    return Report("whitney-overlap", records, {"max": 1.0 + 1e-12},
                  extra={"max_overlap": int(counts.max()), "max_radius_ratio": float(ratio.max()),
                         "sandwich": bound, "lam": lam})


@dataclass(eq=False)
class PartitionOfUnity:
    """``psi[i]`` normalized tents on covered vertices; ``hat`` the raw tents."""

    hat: np.ndarray
    psi: np.ndarray
    tent_energy: np.ndarray
    budget: np.ndarray


def partition_of_unity(net: ResistanceNetwork, cover: WhitneyCover,
                       psi_fn=None) -> PartitionOfUnity:
    """Tents ``clamp(2 - d(x, x_i) / (2 (1+eps) r_i), 0, 1)`` normalized on the
    covered region; records ``energy(hat_i)`` against ``m0(B(x_i, r_i)) / Psi(r_i)``."""
    scale = 2 * (1 + cover.eps) * cover.radii
    hat = np.clip(2.0 - cover.dist / scale[:, None], 0.0, 1.0)
    hat[:, net.boundary] = 0.0
    total = hat.sum(axis=0)
    if np.any(cover.covered & (total <= 0)):
        v = int(np.flatnonzero(cover.covered & (total <= 0))[0])
        raise UncoveredVertex(f"vertex {net.ids[v]!r} is not covered")
    psi = np.zeros_like(hat)
    cov = cover.covered
    psi[:, cov] = hat[:, cov] / total[cov]
    tent_energy = np.array([energy(net, h) for h in hat])
    budget = np.full(len(cover), np.nan)
    if psi_fn is not None:
        mass = np.array([net.m0[cover.dist[i] <= cover.radii[i] * (1 + BALL_RTOL)].sum()
                         for i in range(len(cover))])
        budget = mass / psi_fn(cover.radii)
    return PartitionOfUnity(hat, psi, tent_energy, budget)


def patch_averages(u, cover: WhitneyCover, sigma) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    out = np.empty(len(cover) if u.ndim == 1 else (len(cover), u.shape[1]))
    for i, F in enumerate(cover.patches):
        m = sigma[F].sum()
        if not m > 0:
            raise EmptyPatch(f"patch {i} has zero sigma mass")
        out[i] = sigma[F] @ u[F] / m
    return out


def extend(u, cover: WhitneyCover, pou: PartitionOfUnity, sigma) -> np.ndarray:
    """Patch-average extension of boundary data ``u`` (boundary order).

    Columns of a 2-d ``u`` are extended independently.
    """
    u = np.asarray(u, dtype=float)
    g = cover.geom
    if u.shape[0] != len(g.boundary):
        raise DimensionMismatch("boundary data does not match the boundary")
    avg = patch_averages(u, cover, sigma)
    f = pou.psi.T @ avg
    layer = np.ones(g.n, dtype=bool)
    layer[g.boundary] = False
    layer &= ~cover.covered
    if layer.any():
        nearest = np.argmin(cover.dist[:, layer], axis=0)
        f[layer] = avg[nearest]
    f[g.boundary] = u
    return f


def extension_report(net: ResistanceNetwork, cover: WhitneyCover, pou: PartitionOfUnity,
                     sigma, field_: ThetaField, u_samples) -> Report:
    """``energy(E u) / ||u||^2`` per sample."""
    U = np.asarray(u_samples, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    F = extend(U, cover, pou, sigma)
    records = []
    for k in range(U.shape[1]):
        b = besov_seminorm(U[:, k], field_, squared=True)
        if not b > 0:
            raise DegenerateSample(f"sample {k} is constant")
        records.append(Record(f"u{k}", 0.0, energy(net, F[:, k]), b))
    return Report("extension", records)


def restriction_report(net: ResistanceNetwork, field_: ThetaField, f_samples) -> Report:
    """``||f|_bd||^2 / energy(f)`` per sample."""
    Fs = np.asarray(f_samples, dtype=float)
    if Fs.ndim == 1:
        Fs = Fs[:, None]
    records = []
    for k in range(Fs.shape[1]):
        f = Fs[:, k]
        e = energy(net, f)
        if not e > 0:
            raise DegenerateSample(f"sample {k} has zero energy")
        records.append(Record(f"f{k}", 0.0,
                              besov_seminorm(f[net.boundary_idx], field_, squared=True), e))
    return Report("restriction", records)
