"""Inverse design: match a voxelized target against a database of reachable
configurations and return ranked designs with reconfiguration plans.

The error score follows the published form Errf = |T - D_ij| / (|T| +
max_ij |D_ij|) with the Frobenius norm, computed after optimal column
assignment (targets are generally unordered) and, by default, after
translating both shapes to a common centroid-floor anchor. Size mismatch
is handled by padding the smaller set with sentinel columns at a far
point. The exact-position criterion is evaluated in the absolute frame.
"""

from __future__ import annotations

import json
import math
import os
import uuid
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (DegenerateMesh, EmptyDatabase, EmptyTarget, StaleResult,
                     UnknownKey)
from .model import DesignSpec, build_structure, design_to_dict, design_from_dict
from .shapespace import build_transition_graph

DB_SCHEMA = "metamorph-db/1"


@dataclass(frozen=True)
class TargetShape:
    voxels: frozenset

    def __post_init__(self):
        if not self.voxels:
            raise EmptyTarget("target has no voxels")

    @property
    def matrix(self):
        return np.array(sorted(self.voxels), float)


@dataclass
class DatabaseRow:
    design_id: str
    design: DesignSpec
    node_key: str
    centers: np.ndarray
    path_from_root: list     # list of (driven hinge ids, target degrees)
    partial: bool = False


@dataclass
class ShapeDatabase:
    rows: list
    generation: str = field(default_factory=lambda: uuid.uuid4().hex)

    def __post_init__(self):
        seen = set()
        for r in self.rows:
            k = (r.design_id, r.node_key)
            if k in seen:
                raise ValueError(f"duplicate database entry {k}")
            seen.add(k)


@dataclass
class MatchResult:
    design_id: str
    node_key: str
    errf: float
    exact_position: bool
    plan: list
    generation: str


def snap_center(p):
    """Round each coordinate to the nearest odd integer (ties toward +inf)."""
    return tuple(int(2 * round((float(v) - 1) / 2.0) + 1) for v in p)


def voxelize_target(source, resolution=2.0):
    """Build a TargetShape from a voxel list or a triangle mesh.

    Voxel lists pass through after odd-integer snapping. Meshes (list of
    triangles or an OBJ path) are voxelized at cube resolution 2 by
    center-containment parity ray casting, then snapped.
    """
    if isinstance(source, (list, tuple, set, frozenset)) and source \
            and not _is_triangles(source):
        return TargetShape(frozenset(snap_center(p) for p in source))
    tris = _load_triangles(source)
    if not tris:
        raise DegenerateMesh("mesh has no triangles")
    pts = np.array([p for tri in tris for p in tri], float)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    if np.any(hi - lo <= 0):
        raise DegenerateMesh("mesh bounding box is degenerate")
    vox = set()
    xs = np.arange(2 * math.floor(lo[0] / 2) + 1, hi[0] + 1, resolution)
    ys = np.arange(2 * math.floor(lo[1] / 2) + 1, hi[1] + 1, resolution)
    zs = np.arange(2 * math.floor(lo[2] / 2) + 1, hi[2] + 1, resolution)
    for x in xs:
        for y in ys:
            for z in zs:
                if _point_in_mesh(np.array([x, y, z]), tris):
                    vox.add(snap_center((x, y, z)))
    if not vox:
        raise EmptyTarget("mesh voxelization produced no cells")
    return TargetShape(frozenset(vox))


def _is_triangles(source):
    try:
        first = next(iter(source))
        return (len(first) == 3 and hasattr(first[0], "__len__")
                and len(first[0]) == 3)
    except (TypeError, StopIteration):
        return False


def _load_triangles(source):
    if isinstance(source, (list, tuple)) and _is_triangles(source):
        return [tuple(np.asarray(p, float) for p in tri) for tri in source]
    verts, tris = [], []
    with open(source, encoding="utf-8") as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append(np.array([float(v) for v in parts[1:4]]))
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                for k in range(1, len(idx) - 1):
                    tris.append((verts[idx[0]], verts[idx[k]], verts[idx[k + 1]]))
    return tris


def _point_in_mesh(p, tris, direction=None):
    """Parity ray cast (watertight mesh assumed); the ray is slightly
    tilted so face diagonals and edges are not hit exactly."""
    if direction is None:
        direction = np.array([1.0, 3.1e-4, 7.7e-5])
        direction = direction / np.linalg.norm(direction)
    hits = 0
    for a, b, c in tris:
        e1, e2 = b - a, c - a
        h = np.cross(direction, e2)
        det = e1 @ h
        if abs(det) < 1e-12:
            continue
        inv = 1.0 / det
        s = p - a
        u = inv * (s @ h)
        if u < -1e-9 or u > 1 + 1e-9:
            continue
        q = np.cross(s, e1)
        v = inv * (direction @ q)
        if v < -1e-9 or u + v > 1 + 1e-9:
            continue
        t = inv * (e2 @ q)
        if t > 1e-9:
            hits += 1
    return hits % 2 == 1


# ---------------------------------------------------------------------------
# database
# ---------------------------------------------------------------------------

def build_database(designs, limits=None, collision=True, graphs=None):
    """Transition graph per design; every node stored with its root path.

    `graphs` may supply prebuilt TransitionGraphs (one per design) to
    avoid rebuilding.
    """
    rows = []
    for di, design in enumerate(designs):
        design_id = f"design-{di:04d}"
        if graphs is not None:
            graph = graphs[di]
        else:
            structure = build_structure(design)
            graph = build_transition_graph(structure, limits=limits,
                                           collision=collision)
        g = graph.graph()
        for key, node in sorted(graph.nodes.items()):
            try:
                keys = nx.shortest_path(g, graph.root_key, key)
            except (nx.NetworkXNoPath, nx.NodeNotFound):
                continue
            plan = []
            for a, b in zip(keys, keys[1:]):
                e = graph.edges[g.edges[a, b]["index"]]
                dest = graph.nodes[b].fold_state
                plan.append((list(e.driven),
                             [math.degrees(dest.gamma[h]) for h in e.driven],
                             [round(math.degrees(v), 9) for v in dest.gamma]))
            rows.append(DatabaseRow(design_id, design, key,
                                    node.centers.copy(), plan, graph.truncated))
    return ShapeDatabase(rows)


def _aligned_cost(target_m, entry_m, align):
    """Optimal column-assignment Frobenius distance between two center
    sets. Unequal counts follow the zero-padding rule: unmatched columns
    contribute their own norm, which keeps the error within the
    |T| + max|D| normalization bound."""
    a = target_m.copy()
    b = entry_m.copy()
    if align:
        for m in (a, b):
            anchor = m.mean(axis=0)
            anchor[2] = m[:, 2].min() - 1.0   # centroid-floor anchor
            m -= anchor
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    ri, ci = linear_sum_assignment(d2)
    total = float(d2[ri, ci].sum())
    if len(a) > len(ri):
        unmatched = np.setdiff1d(np.arange(len(a)), ri)
        total += float((a[unmatched] ** 2).sum())
    if len(b) > len(ci):
        unmatched = np.setdiff1d(np.arange(len(b)), ci)
        total += float((b[unmatched] ** 2).sum())
    return math.sqrt(total), (ri, ci)


def match_shape(db: ShapeDatabase, target: TargetShape, top_k=5, align=True):
    """Rank database entries by Errf ascending (ties by design id, node key)."""
    if not db.rows:
        raise EmptyDatabase("database has no rows")
    t = target.matrix
    tnorm = float(np.sqrt((t ** 2).sum()))
    dmax = max(float(np.sqrt((r.centers ** 2).sum())) for r in db.rows)
    denom = tnorm + dmax
    results = []
    for r in db.rows:
        num, _ = _aligned_cost(t, np.asarray(r.centers, float), align)
        errf = num / denom if denom > 0 else 0.0
        exact_num, (ri, ci) = _aligned_cost(t, np.asarray(r.centers, float), False)
        exact = bool(len(t) == len(r.centers) and exact_num <= 1e-9)
        results.append(MatchResult(r.design_id, r.node_key, errf, exact,
                                   list(r.path_from_root), db.generation))
    results.sort(key=lambda m: (m.errf, m.design_id, m.node_key))
    return results[:top_k]


def plan_reconfiguration(db: ShapeDatabase, result: MatchResult):
    """The stored root path for a match; raises StaleResult if the database
    was rebuilt since the match was computed."""
    if result.generation != db.generation:
        raise StaleResult("database was rebuilt after this match")
    for r in db.rows:
        if r.design_id == result.design_id and r.node_key == result.node_key:
            return list(r.path_from_root)
    raise UnknownKey("match no longer present in the database")


# ---------------------------------------------------------------------------
# persistence (schema metamorph-db/1)
# ---------------------------------------------------------------------------

def save_database(db: ShapeDatabase, directory):
    os.makedirs(directory, exist_ok=True)
    designs = {}
    index = {"schema": DB_SCHEMA, "generation": db.generation, "rows": []}
    for r in db.rows:
        if r.design_id not in designs:
            designs[r.design_id] = r.design
            with open(os.path.join(directory, f"{r.design_id}.json"), "w",
                      encoding="utf-8") as f:
                json.dump(design_to_dict(r.design), f)
        index["rows"].append({
            "design_id": r.design_id,
            "node_key": r.node_key,
            "centers": np.asarray(np.round(r.centers), int).tolist(),
            "plan": [[list(d), list(t), list(s)] for d, t, s in r.path_from_root],
            "partial": r.partial,
        })
    with open(os.path.join(directory, "index.json"), "w", encoding="utf-8") as f:
        json.dump(index, f)


def load_database(directory):
    with open(os.path.join(directory, "index.json"), encoding="utf-8") as f:
        index = json.load(f)
    if index.get("schema") != DB_SCHEMA:
        raise ValueError(f"unsupported database schema {index.get('schema')!r}")
    designs = {}
    rows = []
    for entry in index["rows"]:
        did = entry["design_id"]
        if did not in designs:
            with open(os.path.join(directory, f"{did}.json"), encoding="utf-8") as f:
                designs[did] = design_from_dict(json.load(f))
        rows.append(DatabaseRow(
            did, designs[did], entry["node_key"],
            np.array(entry["centers"], float),
            [(list(d), list(t), list(s)) for d, t, s in entry["plan"]],
            entry.get("partial", False)))
    return ShapeDatabase(rows, generation=index["generation"])
