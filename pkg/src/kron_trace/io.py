"""JSON and CSV serialization.

Floats are written with 17 significant digits so that reading back gives
bit-identical values; files are written atomically (temp file + rename).
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .geometry import BoundaryGeometry, build_geometry
from .network import ResistanceNetwork, build_network
from .report import Report
from .trace import TraceForm
from .whitney import WhitneyCover


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    pad = "\n" + " " * (indent * (_level + 1))
    end = "\n" + " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + dumps(v, indent, _level + 1) for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[" + pad + ("," + pad).join(dumps(v, indent, _level + 1) for v in seq) + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return write_atomic(path, dumps(obj) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _check_keys(obj, required: set, optional: set, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    keys = set(obj)
    missing = required - keys
    unknown = keys - required - optional
    if missing:
        raise SchemaError(f"{where}: missing field(s) {sorted(missing)}")
    if unknown:
        raise SchemaError(f"{where}: unknown field(s) {sorted(unknown)}")


# ---------------------------------------------------------------------------
# networks


def network_to_dict(net: ResistanceNetwork) -> dict:
    verts = []
    for i, vid in enumerate(net.ids):
        v = {"id": vid, "m0": float(net.m0[i]), "boundary": bool(net.boundary[i])}
        if net.coords is not None:
            v["coord"] = [float(c) for c in np.atleast_1d(net.coords[i])]
        verts.append(v)
    edges = [{"u": net.ids[u], "v": net.ids[v], "c": float(c)}
             for u, v, c in zip(net.edge_u, net.edge_v, net.cond)]
    doc = {"vertices": verts, "edges": edges}
    if net.has_ghost:
        doc["ghost_edges"] = [{"u": net.ids[i], "c": float(net.ghost_c[i])}
                              for i in np.flatnonzero(net.ghost_c > 0)]
    return doc


def network_from_dict(doc, strict: bool = True) -> ResistanceNetwork:
    """Parse the network schema; unknown fields raise :class:`SchemaError`."""
    _check_keys(doc, {"vertices", "edges"}, {"ghost_edges"}, "network")
    ids, m0, flags, coords = [], [], [], []
    for k, v in enumerate(doc["vertices"]):
        _check_keys(v, {"id", "m0", "boundary"}, {"coord"}, f"vertices[{k}]")
        if not isinstance(v["boundary"], bool):
            raise SchemaError(f"vertices[{k}].boundary must be a boolean")
        ids.append(str(v["id"]))
        m0.append(float(v["m0"]))
        flags.append(v["boundary"])
        coords.append(v.get("coord"))
    edges = []
    for k, e in enumerate(doc["edges"]):
        _check_keys(e, {"u", "v", "c"}, set(), f"edges[{k}]")
        edges.append((str(e["u"]), str(e["v"]), float(e["c"])))
    ghost = {}
    for k, g in enumerate(doc.get("ghost_edges", [])):
        _check_keys(g, {"u", "c"}, set(), f"ghost_edges[{k}]")
        ghost[str(g["u"])] = ghost.get(str(g["u"]), 0.0) + float(g["c"])
    have = [c is not None for c in coords]
    xy = coords if all(have) and coords else None
    return build_network(ids, edges, m0, flags, ghost=ghost or None, coords=xy, strict=strict)


# ---------------------------------------------------------------------------
# geometry sidecar


def geometry_to_dict(net: ResistanceNetwork, geom: BoundaryGeometry, sigma=None) -> dict:
    """Geometry sidecar; the stored grid and ``sigma`` let a domain reload
    without its generator."""
    doc = {
        "rho_boundary": [[float(x) for x in row] for row in geom.rho_b],
        "d_D": {net.ids[i]: float(geom.d_D[i]) for i in range(net.n)},
        "labels": {net.ids[i]: w for i, w in sorted(geom.labels.items())},
        "edge_length": geom.edge_length,
        "radius_grid": [float(r) for r in geom.radius_grid],
    }
    if sigma is not None:
        bids = [net.ids[i] for i in net.boundary_idx]
        doc["sigma"] = {b: float(s) for b, s in zip(bids, sigma)}
    return doc


def geometry_from_dict(net: ResistanceNetwork, doc):
    """Returns ``(geometry, sigma or None)``."""
    _check_keys(doc, {"rho_boundary", "d_D", "labels"},
                {"edge_length", "radius_grid", "sigma"}, "geometry")
    rho = np.asarray(doc["rho_boundary"], dtype=float)
    nb = len(net.boundary_idx)
    if rho.shape != (nb, nb):
        raise SchemaError("rho_boundary does not match the boundary size")
    labels = {net.idx(k): str(w) for k, w in doc["labels"].items()}
    geom = build_geometry(net, float(doc.get("edge_length", 1.0)), rho_b=rho,
                          radius_grid=doc.get("radius_grid"), labels=labels)
    sigma = None
    if "sigma" in doc:
        sigma = np.array([float(doc["sigma"][net.ids[i]]) for i in net.boundary_idx])
    return geom, sigma


# ---------------------------------------------------------------------------
# traces, covers, reports


def trace_to_dict(tf: TraceForm) -> dict:
    return {
        "boundary": list(tf.ids),
        "jumps": [{"x": tf.ids[i], "y": tf.ids[j], "c": c} for i, j, c in tf.jumps()],
        "kappa": {b: float(k) for b, k in zip(tf.ids, tf.kappa)},
        "measure": {} if tf.measure is None else
        {b: float(m) for b, m in zip(tf.ids, tf.measure)},
    }


def trace_from_dict(doc) -> TraceForm:
    _check_keys(doc, {"boundary", "jumps", "kappa", "measure"}, set(), "trace")
    ids = tuple(str(b) for b in doc["boundary"])
    pos = {b: i for i, b in enumerate(ids)}
    C = np.zeros((len(ids), len(ids)))
    for k, j in enumerate(doc["jumps"]):
        _check_keys(j, {"x", "y", "c"}, set(), f"jumps[{k}]")
        a, b = pos[str(j["x"])], pos[str(j["y"])]
        C[a, b] = C[b, a] = float(j["c"])
    kappa = np.array([float(doc["kappa"][b]) for b in ids])
    measure = None
    if doc["measure"]:
        measure = np.array([float(doc["measure"][b]) for b in ids])
    return TraceForm(ids, C, kappa, measure=measure)


def cover_to_dict(net: ResistanceNetwork, cover: WhitneyCover) -> dict:
    bids = [net.ids[i] for i in net.boundary_idx]
    return {
        "epsilon": cover.eps,
        "centers": [{"id": net.ids[int(x)], "r": float(r), "patch": [bids[p] for p in F]}
                    for x, r, F in zip(cover.centers, cover.radii, cover.patches)],
        "floor": cover.floor,
    }


def report_to_dict(rep: Report) -> dict:
    doc = {
        "name": rep.name,
        "samples": [{"location": r.location, "scale": r.scale, "lhs": r.lhs, "rhs": r.rhs,
                     "ratio": r.ratio} for r in rep.records],
        "min": rep.min,
        "max": rep.max,
        "ratio": rep.spread,
        "fit": None if rep.fit is None else {"exponent": rep.fit.exponent,
                                             "constant": rep.fit.constant},
        "pass": rep.passed,
    }
    if rep.thresholds:
        doc["thresholds"] = rep.thresholds
    return doc


def report_to_csv(rep: Report) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    w.writerow(["name", "location", "scale", "lhs", "rhs", "ratio"])
    for r in rep.records:
        w.writerow([rep.name, r.location, _num(r.scale), _num(r.lhs), _num(r.rhs), _num(r.ratio)])
    return buf.getvalue()
