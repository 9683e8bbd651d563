"""Discrete configuration space: canonical shape keys, collision
(frustration) checking, lattice move enumeration, transition graphs and
graph metrics.

Nodes are 90-degree lattice configurations identified by a canonical key
(ordered centers + orientations, translation-normalized; the 24 lattice
rotations quotient is opt-in). Edges are validated kinematic continuations
between adjacent lattice states.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
import networkx as nx

from .errors import (CollisionOnPath, LimitExceeded, NotLattice, NoConvergence,
                     DrivenOverconstrained, WrongEndpoint, Unreachable, UnknownKey)
from .kinematics import (FoldState, continue_path, dof_analysis,
                         forward_placement, residual_vector)

GRAPH_SCHEMA = "metamorph-graph/1"
HALF_PI = math.pi / 2

# box shrink for the separating-axis test: contact allowed, interpenetration
# rejected; hinged pairs get a mechanical clearance (they cannot truly
# interpenetrate except by full pass-through, which the coarser shrink
# still catches)
COLLISION_EPS = 1e-6
HINGE_CLEARANCE = 1e-2


@dataclass
class ShapeMatrix:
    """Ordered body centers + orientations of all cubes identifying a
    configuration in the fixed global frame."""

    centers: np.ndarray
    orientations: np.ndarray
    lattice: bool

    def int_centers(self):
        if not self.lattice:
            raise NotLattice("shape is not at a 90-degree lattice state")
        return np.asarray(np.round(self.centers), int)

    def voxels(self):
        return {tuple(v) for v in self.int_centers()}


@dataclass
class ConfigNode:
    canonical_key: str
    fold_state: FoldState
    dof_at_node: int
    is_bifurcation: bool
    has_isl: bool
    centers: np.ndarray
    depth: int = 0


@dataclass
class GraphEdge:
    key_a: str
    key_b: str
    driven: tuple            # hinge ids driven a -> b
    targets: tuple           # driven target angles (radians) at b
    active_hinges: tuple
    path_dof: int


@dataclass
class TransitionGraph:
    structure: object
    root_key: str
    nodes: dict = field(default_factory=dict)   # key -> ConfigNode
    edges: list = field(default_factory=list)
    loops: list = field(default_factory=list)
    truncated: bool = False

    def graph(self):
        g = nx.Graph()
        for k in self.nodes:
            g.add_node(k)
        for i, e in enumerate(self.edges):
            g.add_edge(e.key_a, e.key_b, index=i)
        return g

    def edge_between(self, a, b):
        for e in self.edges:
            if {e.key_a, e.key_b} == {a, b}:
                return e
        return None


# ---------------------------------------------------------------------------
# canonical keys
# ---------------------------------------------------------------------------

def _rotation_group():
    """The 24 proper axis-aligned lattice rotations."""
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            M = np.zeros((3, 3))
            for i, p in enumerate(perm):
                M[i, p] = signs[i]
            if round(np.linalg.det(M)) == 1:
                mats.append(M.astype(int))
    return mats

_ROT24 = _rotation_group()


def _encode(centers, orients):
    ints = np.asarray(np.round(centers), int)
    ints = ints - ints.min(axis=0)          # translation quotient
    o = np.asarray(np.round(orients), int).reshape(len(ints), 9)
    return json.dumps(np.concatenate([ints, o], axis=1).tolist(),
                      separators=(",", ":"))


def canonicalize(shape: ShapeMatrix, rotations=False):
    """Deterministic, idempotent key; invariant under integer translation
    and (optionally) the 24 lattice rotations."""
    if not shape.lattice:
        raise NotLattice("canonical keys are defined on lattice states")
    if not rotations:
        return _encode(shape.centers, shape.orientations)
    best = None
    for M in _ROT24:
        c = shape.centers @ M.T
        o = np.einsum("ij,njk->nik", M, shape.orientations)
        enc = _encode(c, o)
        if best is None or enc < best:
            best = enc
    return best


# ---------------------------------------------------------------------------
# collision
# ---------------------------------------------------------------------------

def _sat_overlap_batch(c1, R1, c2, R2, eps):
    """Vectorized separating-axis test; returns a bool overlap mask."""
    m = len(c1)
    h = (1.0 - eps)[:, None]
    d = c2 - c1
    face_axes = np.concatenate([R1.transpose(0, 2, 1), R2.transpose(0, 2, 1)], axis=1)
    a_cols = R1.transpose(0, 2, 1)[:, :, None, :]          # (m,3,1,3)
    b_cols = R2.transpose(0, 2, 1)[:, None, :, :]          # (m,1,3,3)
    cross = np.cross(np.broadcast_to(a_cols, (m, 3, 3, 3)),
                     np.broadcast_to(b_cols, (m, 3, 3, 3))).reshape(m, 9, 3)
    norms = np.linalg.norm(cross, axis=2, keepdims=True)
    good = norms[..., 0] > 1e-9
    cross = np.where(norms > 1e-9, cross / np.maximum(norms, 1e-30), 0.0)
    axes = np.concatenate([face_axes, cross], axis=1)      # (m,15,3)
    valid = np.concatenate([np.ones((m, 6), bool), good], axis=1)
    ra = h * np.abs(np.einsum("maj,mjk->mak", axes, R1)).sum(axis=2)
    rb = h * np.abs(np.einsum("maj,mjk->mak", axes, R2)).sum(axis=2)
    proj = np.abs(np.einsum("maj,mj->ma", axes, d))
    separated = np.any(valid & (proj > ra + rb + 0.0), axis=1)
    return ~separated


def check_collision(shape, hinged_pairs=frozenset(), structure=None):
    """Violating cube-id pairs (empty list = frustration-free).

    Accepts a ShapeMatrix or, together with `structure`, a KinePath (every
    path state is checked and violations carry their step index). Lattice
    states: violation iff two centers coincide. Continuous states:
    oriented-box separating-axis test with an epsilon shrink; face/edge
    contact is allowed, hinged pairs get the mechanical clearance.
    """
    if hasattr(shape, "states"):
        if structure is None:
            raise ValueError("checking a KinePath requires the structure")
        return check_path_collision(structure, shape)
    n = len(shape.centers)
    violations = []
    if shape.lattice:
        seen = {}
        for i, v in enumerate(shape.int_centers()):
            key = tuple(v)
            if key in seen:
                violations.append((seen[key], i + 1))
            else:
                seen[key] = i + 1
        return violations
    diff = shape.centers[None, :, :] - shape.centers[:, None, :]
    dist2 = (diff ** 2).sum(axis=2)
    ii, jj = np.nonzero(np.triu(dist2 <= (2 * math.sqrt(3)) ** 2, k=1))
    if len(ii) == 0:
        return violations
    eps = np.array([HINGE_CLEARANCE if frozenset((i + 1, j + 1)) in hinged_pairs
                    else COLLISION_EPS for i, j in zip(ii, jj)])
    mask = _sat_overlap_batch(shape.centers[ii], shape.orientations[ii],
                              shape.centers[jj], shape.orientations[jj], eps)
    for i, j in zip(ii[mask], jj[mask]):
        violations.append((int(i) + 1, int(j) + 1))
    return violations


def check_path_collision(structure, path):
    """Violations along a KinePath, with the step index of each."""
    pairs = structure.clearance_pairs()
    out = []
    for step, state in enumerate(path.states):
        shape = forward_placement(structure, state)
        bad = check_collision(shape, pairs)
        if bad:
            out.append((step, bad))
    return out


def _collision_hook(structure):
    pairs = structure.clearance_pairs()

    def hook(state, step_index):
        shape = forward_placement(structure, state,
                                  tol=max(1e-6, 100 * 1e-9))
        return check_collision(shape, pairs)
    return hook


# ---------------------------------------------------------------------------
# internal structural loops (ISLs)
# ---------------------------------------------------------------------------

def detect_isl(shape: ShapeMatrix):
    """Count internal structural loops of a lattice shape: independent
    tunnels (first Betti number of the solid union of closed cubes) plus
    enclosed cavities, both obtained from flood fills and the Euler
    characteristic of the cubical complex."""
    vox = shape.voxels()
    if not vox:
        return 0
    verts, edges, faces = set(), set(), set()
    for (x, y, z) in vox:
        corners = [(x + dx, y + dy, z + dz)
                   for dx in (-1, 1) for dy in (-1, 1) for dz in (-1, 1)]
        verts.update(corners)
        for axis in range(3):
            for da in (-1, 1):
                for db in (-1, 1):
                    lo = [x, y, z]
                    lo[axis] -= 1
                    hi = list(lo)
                    hi[axis] += 2
                    off = [0, 0, 0]
                    a_ax, b_ax = [k for k in range(3) if k != axis]
                    lo2 = list(lo)
                    hi2 = list(hi)
                    lo2[a_ax] += da
                    hi2[a_ax] += da
                    lo2[b_ax] += db
                    hi2[b_ax] += db
                    edges.add((tuple(lo2), tuple(hi2)))
        for axis in range(3):
            for side in (-1, 1):
                f = [x, y, z]
                f[axis] += side
                faces.add((tuple(f), axis))
    chi = len(verts) - len(edges) + len(faces) - len(vox)

    # b0: connected components of the solid (vertex contact connects)
    remaining = set(vox)
    b0 = 0
    while remaining:
        b0 += 1
        stack = [remaining.pop()]
        while stack:
            cx, cy, cz = stack.pop()
            for dx in (-2, 0, 2):
                for dy in (-2, 0, 2):
                    for dz in (-2, 0, 2):
                        nb = (cx + dx, cy + dy, cz + dz)
                        if nb in remaining:
                            remaining.discard(nb)
                            stack.append(nb)

    # b2: cavities = empty 6-connected regions unreachable from outside
    arr = np.array(sorted(vox))
    lo = arr.min(axis=0) - 2
    hi = arr.max(axis=0) + 2
    dims = ((hi - lo) // 2 + 1).astype(int)
    occ = np.zeros(dims, bool)
    for v in vox:
        occ[tuple(((np.array(v) - lo) // 2).astype(int))] = True
    outside = np.zeros(dims, bool)
    stack = [(0, 0, 0)]
    outside[0, 0, 0] = True
    while stack:
        i, j, k = stack.pop()
        for di, dj, dk in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                           (0, 0, 1), (0, 0, -1)):
            ni, nj, nk = i + di, j + dj, k + dk
            if (0 <= ni < dims[0] and 0 <= nj < dims[1] and 0 <= nk < dims[2]
                    and not occ[ni, nj, nk] and not outside[ni, nj, nk]):
                outside[ni, nj, nk] = True
                stack.append((ni, nj, nk))
    enclosed = ~occ & ~outside
    b2 = 0
    seen = np.zeros(dims, bool)
    for idx in zip(*np.nonzero(enclosed)):
        if seen[idx]:
            continue
        b2 += 1
        stack = [idx]
        seen[idx] = True
        while stack:
            i, j, k = stack.pop()
            for di, dj, dk in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                               (0, 0, 1), (0, 0, -1)):
                ni, nj, nk = i + di, j + dj, k + dk
                if (0 <= ni < dims[0] and 0 <= nj < dims[1] and 0 <= nk < dims[2]
                        and enclosed[ni, nj, nk] and not seen[ni, nj, nk]):
                    seen[ni, nj, nk] = True
                    stack.append((ni, nj, nk))

    b1 = b0 + b2 - chi
    return max(b1, 0) + b2


# ---------------------------------------------------------------------------
# lattice move enumeration
# ---------------------------------------------------------------------------

LATTICE_VALS = (0.0, HALF_PI, math.pi, 3 * HALF_PI)


class _LoopTables:
    """Per-structure cache: valid lattice angle tuples of each level-1 ring."""

    def __init__(self, structure):
        self.structure = structure
        self.ring_hinges = []
        self.valid = []
        for steps, level in zip(structure.loops, structure.loop_levels):
            if level != 1:
                continue
            ids = [hid for hid, _ in steps]
            self.ring_hinges.append(ids)
            self.valid.append(self._enumerate_ring(structure, steps))
        self.other_hinges = sorted(
            set(range(structure.n_hinges))
            - {h for ids in self.ring_hinges for h in ids})

    @staticmethod
    def _enumerate_ring(structure, steps):
        from .kinematics import _compiled, _inv_rigid
        c = _compiled(structure)
        m = len(steps)
        combos = np.array(list(itertools.product(range(4), repeat=m)), int)
        T = np.tile(np.eye(4), (len(combos), 1, 1))
        for k, (hid, sign) in enumerate(steps):
            mats = np.stack([c.hmat(hid, v) if sign > 0 else _inv_rigid(c.hmat(hid, v))
                             for v in LATTICE_VALS])
            T = T @ mats[combos[:, k]]
        err = np.abs(T - np.eye(4)).reshape(len(combos), -1).max(axis=1)
        good = combos[err < 1e-9]
        return {tuple(LATTICE_VALS[d] for d in row) for row in good}


_TABLES = {}


def _loop_tables(structure):
    t = _TABLES.get(id(structure))
    if t is None or t.structure is not structure:
        t = _LoopTables(structure)
        _TABLES[id(structure)] = t
    return t


def _ring_neighbors(valid, current, max_step=HALF_PI):
    """Valid ring tuples reachable with per-hinge |delta| <= max_step."""
    out = []
    for t in valid:
        deltas = [abs(a - b) for a, b in zip(t, current)]
        if max(deltas) <= max_step + 1e-9 and any(d > 1e-9 for d in deltas):
            out.append(t)
    return out


@dataclass
class Move:
    targets: dict          # hinge id -> target angle (radians)
    changed: tuple
    klass: int = 3         # 0 common-target, 1 ring group, 2 crease, 3 single

    def key(self):
        return tuple(sorted((h, round(v, 9)) for h, v in self.targets.items()))


def candidate_moves(structure, state):
    """Deterministic list of candidate lattice targets from a lattice state.

    Covers, in priority order: common-target moves (every ring that can
    reach a shared target tuple moves there together), same-tuple ring
    group moves, level-2+ crease folds with rings held, and single-ring
    branch moves. The level-2 loop couples blocks, so the coordinated
    classes are the physically primary reconfigurations and are tried
    first when a candidate cap is in force.
    """
    if not state.is_lattice():
        raise NotLattice("move enumeration starts from lattice states")
    tables = _loop_tables(structure)
    g = state.gamma
    cands = {}

    def add(targets, klass):
        changed = tuple(h for h, v in targets.items() if abs(v - g[h]) > 1e-9)
        if not changed:
            return
        mv = Move({h: targets[h] for h in changed}, changed, klass)
        old = cands.get(mv.key())
        if old is None or klass < old.klass:
            cands[mv.key()] = mv

    # per-ring states and neighbor sets
    ring_states = []
    ring_nbrs = []
    for ids, valid in zip(tables.ring_hinges, tables.valid):
        cur = tuple(g[h] for h in ids)
        ring_states.append(cur)
        ring_nbrs.append(_ring_neighbors(valid, cur))

    # common-target moves: all rings that can reach tuple t move to t
    union_targets = sorted(set(itertools.chain.from_iterable(ring_nbrs)))
    for t in union_targets:
        targets = {}
        movers = 0
        for ids, cur, nbrs in zip(tables.ring_hinges, ring_states, ring_nbrs):
            if t in nbrs and t != cur:
                targets.update({h: v for h, v in zip(ids, t)})
                movers += 1
        if movers >= 2:
            add(targets, 0)

    # same-tuple group moves
    groups = {}
    for ri, cur in enumerate(ring_states):
        groups.setdefault(cur, []).append(ri)
    for cur, members in groups.items():
        if len(members) < 2:
            continue
        shared = set(ring_nbrs[members[0]])
        for ri in members[1:]:
            shared &= set(ring_nbrs[ri])
        for size in range(2, len(members) + 1):
            for subset in itertools.combinations(members, size):
                for t in sorted(shared):
                    targets = {}
                    for ri in subset:
                        ids = tables.ring_hinges[ri]
                        targets.update({h: v for h, v in zip(ids, t)})
                    add(targets, 1)

    # level-2+ hinge combos, rings held
    others = tables.other_hinges
    if others:
        opts = []
        for h in others:
            vals = {g[h]}
            for dv in (-HALF_PI, HALF_PI):
                vals.add((g[h] + dv) % (2 * math.pi))
            opts.append(sorted(vals))
        for combo in itertools.product(*opts):
            t = {h: v for h, v in zip(others, combo) if abs(v - g[h]) > 1e-9}
            if t:
                add(t, 2)

    # single-ring moves
    for ids, nbrs in zip(tables.ring_hinges, ring_nbrs):
        for t in nbrs:
            add({h: v for h, v in zip(ids, t)}, 3)

    # grand coordinated moves first within the coupled classes: with a
    # candidate cap in force the primary reconfigurations survive
    moves = sorted(cands.values(),
                   key=lambda m: (m.klass,
                                  -len(m.changed) if m.klass <= 1 else len(m.changed),
                                  sum(abs(m.targets[h] - g[h]) for h in m.changed),
                                  m.key()))
    # closure + collision prefilter on the target lattice state
    out = []
    for mv in moves:
        target_state = state.replace(mv.targets)
        res = residual_vector(structure, target_state)
        if res.size and np.max(np.abs(res)) > 1e-9:
            continue
        try:
            shape = forward_placement(structure, target_state)
        except Exception:
            continue
        if check_collision(shape):
            continue
        out.append(mv)
    return out


def _driver_sequences(structure, state, mv):
    """Deterministic escalation of driven-hinge subsets for validation:
    per-loop representatives first, then growing prefixes of the changed
    set, then everything."""
    tables = _loop_tables(structure)
    per_loop = []
    for ids in tables.ring_hinges:
        ch = [h for h in ids if h in mv.targets]
        if ch:
            per_loop.append(ch[0])
    for h in tables.other_hinges:
        if h in mv.targets:
            per_loop.append(h)
    allc = sorted(mv.targets)
    seqs = []
    for k in range(1, len(per_loop) + 1):
        seqs.append(per_loop[:k])
    for k in (1, 2, 3):
        if k <= len(allc):
            seqs.append(allc[:k])
    seqs.append(allc)
    out = []
    for s in seqs:
        if s not in out:
            out.append(s)
    return out


def validate_move(structure, state, mv, collision=True, step=np.deg2rad(2.0)):
    """Track the continuation to the move's target; returns a KinePath or
    raises the first blocking error encountered."""
    target = state.replace(mv.targets)
    hook = _collision_hook(structure) if collision else None
    last = None
    for drivers in _driver_sequences(structure, state, mv):
        try:
            path = continue_path(structure, state,
                                 {h: mv.targets[h] for h in drivers},
                                 to=target, collision_check=hook, step=step)
            return path
        except CollisionOnPath:
            raise
        except (NoConvergence, DrivenOverconstrained, WrongEndpoint) as exc:
            last = exc
    raise last if last is not None else NoConvergence("no driver set tracked the move")


def enumerate_moves(structure, state, collision=True, max_candidates=None):
    """Validated moves (with KinePaths) from a lattice state, deterministic
    order; each move's reverse is also kinematically valid (reversibility)."""
    moves = candidate_moves(structure, state)
    if max_candidates is not None:
        moves = moves[:max_candidates]
    out = []
    for mv in moves:
        try:
            path = validate_move(structure, state, mv, collision=collision)
        except (CollisionOnPath, NoConvergence, DrivenOverconstrained, WrongEndpoint):
            continue
        out.append((mv, path))
    return out


# ---------------------------------------------------------------------------
# transition graph
# ---------------------------------------------------------------------------

def build_transition_graph(structure, limits=None, collision=True,
                           rotations=False, raise_on_limit=False, seeds=()):
    """Breadth-first closure of enumerate_moves from the flat state,
    deduplicated by canonical key and bounded by limits
    {max_nodes, max_depth, max_candidates}.

    `seeds` (FoldStates) warm-start the node set for deep corridors; they
    are nodes the breadth-first closure would reach given unbounded
    limits, admitted up front so bounded builds retain them. Their edges
    are still discovered only through validated moves.
    """
    limits = dict(limits or {})
    max_nodes = limits.get("max_nodes", 64)
    max_depth = limits.get("max_depth", 3)
    max_candidates = limits.get("max_candidates")

    flat = FoldState.flat(structure)
    shape0 = forward_placement(structure, flat)
    root_key = canonicalize(shape0, rotations)
    graph = TransitionGraph(structure, root_key)
    graph.nodes[root_key] = _make_node(structure, flat, shape0, root_key, 0)
    frontier = [(root_key, flat)]
    for s in seeds:
        shape = forward_placement(structure, s)
        if check_collision(shape):
            continue
        key = canonicalize(shape, rotations)
        if key not in graph.nodes:
            graph.nodes[key] = _make_node(structure, s, shape, key, 0)
            frontier.append((key, s))
    frontier.sort(key=lambda kv: kv[0])
    depth = 0
    seen_edges = set()
    truncated = False
    while frontier and depth < max_depth:
        depth += 1
        nxt = []
        for key, state in frontier:
            cands = candidate_moves(structure, state)
            if max_candidates is not None:
                cands = cands[:max_candidates]
            for mv in cands:
                end_guess = state.replace(mv.targets)
                shape = forward_placement(structure, end_guess)
                k2 = canonicalize(shape, rotations)
                ekey = frozenset((key, k2))
                if k2 == key or ekey in seen_edges:
                    continue
                if k2 not in graph.nodes and len(graph.nodes) >= max_nodes:
                    truncated = True
                    continue
                try:
                    path = validate_move(structure, state, mv, collision=collision)
                except (CollisionOnPath, NoConvergence, DrivenOverconstrained,
                        WrongEndpoint):
                    continue
                end = path.end
                if k2 not in graph.nodes:
                    graph.nodes[k2] = _make_node(structure, end, shape, k2, depth)
                    nxt.append((k2, end))
                seen_edges.add(ekey)
                graph.edges.append(GraphEdge(
                    key, k2, path.driven_hinges,
                    tuple(float(end.gamma[h]) for h in path.driven_hinges),
                    tuple(sorted(path.active_hinges)), path.path_dof))
        frontier = sorted(nxt, key=lambda kv: kv[0])
    graph.truncated = truncated or bool(frontier)
    g = graph.graph()
    graph.loops = [sorted(c) for c in nx.cycle_basis(g)]
    _annotate_bifurcations(graph)
    if raise_on_limit and graph.truncated:
        raise LimitExceeded("graph limits reached", partial=graph)
    return graph


def _make_node(structure, state, shape, key, depth):
    report = dof_analysis(structure, state)
    return ConfigNode(key, state, report.null_dim, False,
                      detect_isl(shape) > 0, shape.centers.copy(), depth)


def _annotate_bifurcations(graph):
    incident = {}
    for e in graph.edges:
        for k in (e.key_a, e.key_b):
            incident.setdefault(k, []).append(e.path_dof)
    for key, node in graph.nodes.items():
        dofs = incident.get(key, [])
        node.is_bifurcation = bool(dofs) and node.dof_at_node > max(dofs)


def graph_metrics(graph: TransitionGraph, path_length_bound=6):
    """Node/bifurcation/path counts and DOF histogram. path_count counts
    simple paths from the root up to the stated length bound."""
    g = graph.graph()
    path_count = 0
    if graph.root_key in g:
        for other in g.nodes:
            if other == graph.root_key:
                continue
            for _ in nx.all_simple_paths(g, graph.root_key, other,
                                         cutoff=path_length_bound):
                path_count += 1
    hist = {}
    for node in graph.nodes.values():
        hist[node.dof_at_node] = hist.get(node.dof_at_node, 0) + 1
    return {
        "node_count": len(graph.nodes),
        "bifurcation_count": sum(1 for n in graph.nodes.values() if n.is_bifurcation),
        "path_count": path_count,
        "path_length_bound": path_length_bound,
        "dof_histogram": hist,
        "isl_count": sum(1 for n in graph.nodes.values() if n.has_isl),
    }


def find_path(graph: TransitionGraph, from_key, to_key, objective="fewest_steps"):
    """Optimal edge sequence between two node keys."""
    if from_key not in graph.nodes or to_key not in graph.nodes:
        raise UnknownKey("unknown node key")
    if from_key == to_key:
        return []
    g = graph.graph()
    if objective == "fewest_steps":
        weight = None
    elif objective == "fewest_active_dof":
        weight = "w"
        for a, b, data in g.edges(data=True):
            data["w"] = 1 + graph.edges[data["index"]].path_dof
    else:
        raise ValueError(f"unknown objective {objective!r}")
    try:
        nodes = nx.shortest_path(g, from_key, to_key, weight=weight)
    except nx.NetworkXNoPath:
        raise Unreachable(f"no path between the requested nodes")
    out = []
    for a, b in zip(nodes, nodes[1:]):
        out.append(graph.edges[g.edges[a, b]["index"]])
    return out


# ---------------------------------------------------------------------------
# graph file and mesh export
# ---------------------------------------------------------------------------

def graph_to_dict(graph: TransitionGraph):
    return {
        "schema": GRAPH_SCHEMA,
        "root": graph.root_key,
        "truncated": graph.truncated,
        "nodes": [
            {"key": n.canonical_key,
             "centers": np.asarray(np.round(n.centers), int).tolist(),
             "gamma_deg": [round(v, 6) for v in n.fold_state.degrees()],
             "dof": n.dof_at_node,
             "bifurcation": n.is_bifurcation,
             "isl": n.has_isl,
             "depth": n.depth}
            for n in graph.nodes.values()
        ],
        "edges": [
            {"a": e.key_a, "b": e.key_b,
             "driven": list(e.driven),
             "targets_deg": [round(math.degrees(t), 6) for t in e.targets],
             "active": list(e.active_hinges),
             "path_dof": e.path_dof}
            for e in graph.edges
        ],
        "loops": graph.loops,
    }


def save_graph(graph, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(graph_to_dict(graph), f)


def export_mesh_obj(shape: ShapeMatrix, path_or_buf):
    """Wavefront OBJ: one axis-aligned (or oriented) box per cube."""
    lines = ["# metamorph mesh export"]
    nv = 0
    for c, R in zip(shape.centers, shape.orientations):
        corners = []
        for dx, dy, dz in itertools.product((-1, 1), repeat=3):
            corners.append(c + R @ np.array([dx, dy, dz], float))
        for v in corners:
            lines.append(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}")
        quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1),
                 (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
        for q in quads:
            a, b, cc, d = (nv + k + 1 for k in q)
            lines.append(f"f {a} {b} {cc}")
            lines.append(f"f {a} {cc} {d}")
        nv += 8
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", encoding="utf-8") as f:
            f.write(text)
    return text
