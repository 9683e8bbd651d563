"""Hierarchical design language: cubes, hinges, motifs, flips.

A design is a list of motif loop sizes per level plus one edge code per
hinge. Level-1 structures are two-row serpentine blocks of n cubes closed
into an nR ring (open chain for n=2). A level-2 4R motif arranges four
level-1 blocks in the quadrants of a plate and joins them with four
level-2 hinges on the central crease lines. A trailing 2R motif joins two
copies of the level below side by side with a single hinge.

Cube edge length is 2 lattice units, so flat body centers sit on
odd-integer coordinates (except the degenerate one-cube axis, pinned at 0
by the bottom-center anchoring convention).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BadIndex, DanglingHinge, DesignError, NonAdjacent, OpenLoop, SelfColliding

Z_AXIS = np.array([0.0, 0.0, 1.0])

# edge codes on an interface face, in the face frame (n = unit a->b,
# tlat = z x n): 0 bottom (-z), 1 top (+z), 2 lateral-left (-tlat),
# 3 lateral-right (+tlat)
EDGE_BOTTOM, EDGE_TOP, EDGE_LAT_LEFT, EDGE_LAT_RIGHT = 0, 1, 2, 3
SURFACE_TAG = {EDGE_BOTTOM: "B", EDGE_TOP: "T", EDGE_LAT_LEFT: "B", EDGE_LAT_RIGHT: "T"}
FLIP_CODE = {0: 1, 1: 0, 2: 3, 3: 2}

LOOP_SIZES = (2, 4, 6, 8)
DESIGN_SCHEMA = "metamorph-design/1"


@dataclass(frozen=True)
class DesignSpec:
    """Combinatorial description of a hierarchical structure."""

    motifs: tuple
    hinge_placements: tuple
    link_flips: tuple = ()
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "motifs", tuple(int(m) for m in self.motifs))
        object.__setattr__(self, "hinge_placements", tuple(int(c) for c in self.hinge_placements))
        object.__setattr__(self, "link_flips", tuple(bool(f) for f in self.link_flips))
        object.__setattr__(self, "labels", tuple(self.labels))

    def validate(self):
        if not self.motifs:
            raise DesignError("motif list is empty")
        for lvl, m in enumerate(self.motifs):
            if m == 1 and lvl == 0 and len(self.motifs) == 1:
                continue  # degenerate single cube
            if m not in LOOP_SIZES:
                raise DesignError(f"loop size {m} at level {lvl + 1} not in {LOOP_SIZES}")
        if len(self.motifs) > 1 and any(m == 1 for m in self.motifs):
            raise DesignError("single-cube motif only allowed as a lone level")
        for lvl, m in enumerate(self.motifs[1:], start=2):
            if lvl > 2 and m != 2:
                raise DesignError("levels above 2 must use the 2R motif")
            if lvl == 2 and m != 4 and m != 2:
                raise DesignError("level-2 motif must be 4R or 2R")
        want = hinge_count(self.motifs)
        if len(self.hinge_placements) != want:
            raise DesignError(
                f"expected {want} hinge placements, got {len(self.hinge_placements)}")
        if any(c not in (0, 1, 2, 3) for c in self.hinge_placements):
            raise DesignError("edge codes must be in 0..3")
        if len(self.link_flips) != link_count(self.motifs):
            raise DesignError(
                f"expected {link_count(self.motifs)} flip flags, got {len(self.link_flips)}")
        if self.labels and len(self.labels) != want:
            raise DesignError("labels, when given, must cover every hinge")
        return self


def cube_count(motifs):
    n = motifs[0]
    for m in motifs[1:]:
        n *= m
    return n


def hinge_count(motifs):
    """Total hinges: per level-1 loop its ring size (1 for a 2R chain),
    4 per level-2 4R loop instance, 1 per 2R joint instance above."""
    if motifs[0] == 1:
        return 0
    level1_loops = cube_count(motifs) // motifs[0]
    per_loop = motifs[0] if motifs[0] >= 4 else 1
    total = level1_loops * per_loop
    for lvl in range(1, len(motifs)):
        m = motifs[lvl]
        mult = 1
        for m2 in motifs[lvl + 1:]:
            mult *= m2 if m2 == 4 else 2
        total += mult * (4 if m == 4 else 1)
    return total


def link_count(motifs):
    """Flippable lower-level links = number of level-1 blocks."""
    return cube_count(motifs) // motifs[0] if motifs[0] > 1 else 0


@dataclass(frozen=True)
class CubeElement:
    id: int
    home_center: tuple

    @property
    def home_orientation(self):
        return np.eye(3)


@dataclass(frozen=True)
class HingeSpec:
    id: int
    cube_a: int
    cube_b: int
    level: int
    edge_code: int
    surface_tag: str
    axis_dir: tuple          # unit vector along the hinge line
    axis_anchor: tuple       # midpoint of the hinge edge
    link_length: float = 0.0  # distance to the next hinge axis in its loop


@dataclass
class Structure:
    """Validated instantiation of a DesignSpec with reference geometry."""

    design: DesignSpec
    cubes: list
    hinges: list
    loops: list              # list of [(hinge_id, +1|-1)] oriented cycles
    loop_levels: list        # level of each loop (1 or 2)
    level_index: dict        # cube id -> (level-1 loop index, position in ring)
    anchor_id: int

    _homes: np.ndarray = field(default=None, repr=False)
    _adj: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._homes = np.array([c.home_center for c in self.cubes])
        self._adj = {}
        for h in self.hinges:
            self._adj.setdefault(h.cube_a, []).append((h.cube_b, h.id))
            self._adj.setdefault(h.cube_b, []).append((h.cube_a, h.id))

    @property
    def n_cubes(self):
        return len(self.cubes)

    @property
    def n_hinges(self):
        return len(self.hinges)

    def home(self, cube_id):
        return self._homes[cube_id - 1]

    def hinged_pairs(self):
        return {frozenset((h.cube_a, h.cube_b)) for h in self.hinges}

    def clearance_pairs(self):
        """Hinged pairs plus face-adjacent pairs whose shared face has an
        edge on some hinge's axis line: a physical fold line spans its whole
        interface, so every pair along it gets the hinge clearance."""
        pairs = self.hinged_pairs()
        axis_lines = []
        for h in self.hinges:
            u = np.array(h.axis_dir)
            p = np.array(h.axis_anchor)
            axis_lines.append((p, u))
        n = self.n_cubes
        for a in range(1, n + 1):
            for b in range(a + 1, n + 1):
                if frozenset((a, b)) in pairs:
                    continue
                d = self._homes[b - 1] - self._homes[a - 1]
                if sorted(np.abs(d)) != [0.0, 0.0, 2.0]:
                    continue
                mid = (self._homes[a - 1] + self._homes[b - 1]) / 2
                nrm = d / 2
                z = np.array([0.0, 0.0, 1.0])
                tlat = np.cross(z, nrm)
                for t in (z, -z, tlat, -tlat):
                    if not np.any(t):
                        continue
                    anchor = mid + t
                    edge_dir = np.cross(nrm, t)
                    edge_dir = edge_dir / np.linalg.norm(edge_dir)
                    for p, u in axis_lines:
                        if abs(abs(edge_dir @ u) - 1.0) > 1e-9:
                            continue
                        off = anchor - p
                        if np.linalg.norm(off - (off @ u) * u) < 1e-9:
                            pairs.add(frozenset((a, b)))
                            break
                    else:
                        continue
                    break
        return pairs

    def spanning_tree(self):
        """Deterministic BFS tree from the anchor: list of (parent, child, hinge_id)."""
        seen = {self.anchor_id}
        order = []
        frontier = [self.anchor_id]
        while frontier:
            nxt = []
            for c in frontier:
                for other, hid in sorted(self._adj.get(c, [])):
                    if other not in seen:
                        seen.add(other)
                        order.append((c, other, hid))
                        nxt.append(other)
            frontier = nxt
        return order


# ---------------------------------------------------------------------------
# reference layouts
# ---------------------------------------------------------------------------

def _axis_centers(count):
    """Odd-integer centers for `count` cubes along one axis; even counts are
    symmetric about 0, odd counts lean negative, a single cube sits at 0."""
    if count == 1:
        return [0]
    if count % 2 == 0:
        return [2 * i + 1 - count for i in range(count)]
    return [2 * i - count for i in range(count)]


def _serpentine(xs, ys):
    """Column-major serpentine over an x-by-y grid of cube centers."""
    cells = []
    for ci, x in enumerate(xs):
        col = ys if ci % 2 == 0 else ys[::-1]
        for y in col:
            cells.append((x, y))
    return cells


def _plate_layout(nx, ny):
    """Centers (id order) for an nx-by-ny plate, serpentine-numbered."""
    return _serpentine(_axis_centers(nx), _axis_centers(ny))


def _block_layout(n):
    """Standalone level-1 block: ids walk the bottom row +x then the top
    row back, so the id sequence is the perimeter ring."""
    xs = _axis_centers(n // 2)
    ys = _axis_centers(2)
    return [(x, ys[0]) for x in xs] + [(x, ys[1]) for x in reversed(xs)]


def _block_ring_level1(n):
    """Ring order (list of 0-based cell indices) of a standalone n-cube block
    laid out (n//2) x 2: serpentine ids walk the perimeter already."""
    return list(range(n))


def _quadrant_rings(n):
    """Ring orders (1-based global ids) for the four quadrant blocks of an
    <nR,4R> plate, in block order B1 (x<0,y<0), B2 (x>0,y<0),
    B3 (x>0,y>0), B4 (x<0,y>0). Each ring starts at the block's outermost
    corner and walks the outer row toward the center line."""
    w = n // 2                      # columns per half-plate
    nx = n                          # plate is n columns by 4 rows
    cells = _plate_layout(nx, 4)
    at = {c: i + 1 for i, c in enumerate(cells)}
    xs = _axis_centers(nx)
    left, right = xs[:w], xs[w:]

    def ring(cols, y_out, y_in):
        bottom = [at[(x, y_out)] for x in cols]
        top = [at[(x, y_in)] for x in reversed(cols)]
        return bottom + top

    b1 = ring(left, -3, -1)                    # outer corner x most negative
    b2 = ring(list(reversed(right)), -3, -1)   # mirrored: starts at x most positive
    b3 = ring(list(reversed(right)), 3, 1)
    b4 = ring(left, 3, 1)
    return [b1, b2, b3, b4], at


def _level2_hinges(n, at):
    """Level-2 hinge cube pairs on the central creases, at centerline
    distance 3, ordered around the block cycle B1->B4->B3->B2->B1 with the
    source block's cube first. Codes alternate B,T,B,T."""
    pairs = [
        ((-3, -1), (-3, 1), EDGE_BOTTOM),   # B1 -> B4, crease y=0 left
        ((-1, 3), (1, 3), EDGE_TOP),        # B4 -> B3, crease x=0 north
        ((3, 1), (3, -1), EDGE_BOTTOM),     # B3 -> B2, crease y=0 right
        ((1, -3), (-1, -3), EDGE_TOP),      # B2 -> B1, crease x=0 south
    ]
    return [(at[a], at[b], code) for a, b, code in pairs]


def hinge_frame(home_a, home_b, code):
    """Hinge line (anchor point, unit direction) and fold axis for an edge
    code on the interface face between two reference-adjacent cubes."""
    ca = np.asarray(home_a, float)
    cb = np.asarray(home_b, float)
    n = (cb - ca) / 2.0
    tlat = np.cross(Z_AXIS, n)
    t = {EDGE_BOTTOM: -Z_AXIS, EDGE_TOP: Z_AXIS,
         EDGE_LAT_LEFT: -tlat, EDGE_LAT_RIGHT: tlat}[code]
    anchor = (ca + cb) / 2.0 + t
    axis = np.cross(n, t)
    return anchor, axis / np.linalg.norm(axis)


def _line_distance(p1, u1, p2, u2):
    """Distance between two lines (point, unit direction)."""
    cr = np.cross(u1, u2)
    nc = np.linalg.norm(cr)
    if nc < 1e-12:
        d = p2 - p1
        return float(np.linalg.norm(d - np.dot(d, u1) * u1))
    return float(abs(np.dot(p2 - p1, cr / nc)))


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

def build_structure(design: DesignSpec) -> Structure:
    """Instantiate and validate a Structure from a DesignSpec."""
    design.validate()
    motifs = design.motifs
    n1 = motifs[0]

    if n1 == 1:
        cubes = [CubeElement(1, (0, 0, 1))]
        return Structure(design, cubes, [], [], [], {1: (0, 0)}, 1)

    if len(motifs) == 1:
        centers = [(x, y, 1) for x, y in _block_layout(n1)]
        rings = [[i + 1 for i in _block_ring_level1(n1)]]
        lvl2 = []
    elif motifs[1] == 4:
        centers = [(x, y, 1) for x, y in _plate_layout(motifs[0], 4)]
        ring_ids, at = _quadrant_rings(motifs[0])
        rings = ring_ids
        lvl2 = _level2_hinges(motifs[0], at)
    else:  # <n,2R>: two level-1 blocks side by side along x
        base = [(x, y, 1) for x, y in _block_layout(n1)]
        half = n1 // 2
        centers = ([(x - half, y, z) for x, y, z in base]
                   + [(x + half, y, z) for x, y, z in base])
        rings = [[i + 1 for i in range(n1)], [n1 + i + 1 for i in range(n1)]]
        lvl2 = [_chain_joint(centers, rings)]
    if len(motifs) > 2:
        centers, rings, lvl2 = _extend_2r(motifs, centers, rings, lvl2)

    cube_pos = {i + 1: np.array(c, float) for i, c in enumerate(centers)}

    # flips rewrite the edge codes of each block's internal hinges
    codes = list(design.hinge_placements)
    idx = 0
    ring_slices = []
    for ring in rings:
        m = len(ring) if len(ring) >= 4 else 1
        ring_slices.append((idx, m))
        idx += m
    for li, flipped in enumerate(design.link_flips or [False] * len(rings)):
        if flipped and li < len(ring_slices):
            s, m = ring_slices[li]
            for k in range(s, s + m):
                codes[k] = FLIP_CODE[codes[k]]

    hinges = []
    loops = []
    loop_levels = []
    level_index = {}
    hid = 0
    for li, ring in enumerate(rings):
        for pos, cid in enumerate(ring):
            level_index[cid] = (li, pos)
        m = len(ring)
        ring_h = []
        count = m if m >= 4 else 1
        for k in range(count):
            a, b = ring[k], ring[(k + 1) % m]
            code = codes[hid]
            _check_pair(cube_pos, a, b)
            anchor, axis = hinge_frame(cube_pos[a], cube_pos[b], code)
            tag = design.labels[hid] if design.labels else SURFACE_TAG[code]
            hinges.append(HingeSpec(hid, a, b, 1, code, tag,
                                    tuple(axis), tuple(anchor)))
            ring_h.append((hid, +1))
            hid += 1
        if m >= 4:
            loops.append(ring_h)
            loop_levels.append(1)

    n_l2_cycles = len(lvl2) // 4 if len(motifs) > 1 and motifs[1] == 4 else 0
    for k, (a, b, _default) in enumerate(lvl2):
        code = codes[hid]
        level = 2 if k < 4 * n_l2_cycles else len(motifs)
        _check_pair(cube_pos, a, b)
        anchor, axis = hinge_frame(cube_pos[a], cube_pos[b], code)
        tag = design.labels[hid] if design.labels else SURFACE_TAG[code]
        hinges.append(HingeSpec(hid, a, b, level, code, tag, tuple(axis), tuple(anchor)))
        hid += 1

    l2_hinges = [h for h in hinges if h.level == 2]
    for q in range(n_l2_cycles):
        quad = l2_hinges[4 * q:4 * q + 4]
        loops.append(_level2_cycle(rings, hinges, quad))
        loop_levels.append(2)

    # link length d: distance to the next hinge axis in the same loop
    by_id = {h.id: h for h in hinges}
    sized = {}
    for steps in loops:
        ids = [hid_ for hid_, _ in steps]
        for i, hid_ in enumerate(ids):
            nxt = by_id[ids[(i + 1) % len(ids)]]
            cur = by_id[hid_]
            sized[hid_] = _line_distance(np.array(cur.axis_anchor), np.array(cur.axis_dir),
                                         np.array(nxt.axis_anchor), np.array(nxt.axis_dir))
    hinges = [HingeSpec(h.id, h.cube_a, h.cube_b, h.level, h.edge_code, h.surface_tag,
                        h.axis_dir, h.axis_anchor, sized.get(h.id, 0.0))
              for h in hinges]

    pts = {tuple(int(round(v)) for v in c) for c in cube_pos.values()}
    if len(pts) != len(cube_pos):
        raise SelfColliding("flat reference state has overlapping cubes")

    cubes = [CubeElement(i + 1, tuple(int(round(v)) for v in centers[i]))
             for i in range(len(centers))]
    anchor = min(cube_pos, key=lambda c: (float(np.linalg.norm(cube_pos[c])), c))
    st = Structure(design, cubes, hinges, loops, loop_levels, level_index, anchor)

    from .kinematics import loop_residual, FoldState  # deferred: avoids cycle
    res = loop_residual(st, FoldState.flat(st))
    worst = max((float(np.max(np.abs(r))) for r in res), default=0.0)
    if worst > 1e-9:
        raise OpenLoop(f"flat-state loop closure failed (residual {worst:.2e})")
    return st


def _check_pair(cube_pos, a, b):
    if a not in cube_pos or b not in cube_pos:
        raise DanglingHinge(f"hinge references missing cube ({a},{b})")
    d = np.abs(cube_pos[a] - cube_pos[b])
    if not (sorted(d) == [0.0, 0.0, 2.0]):
        raise NonAdjacent(f"cubes {a} and {b} share no face in the reference layout")


def _chain_joint(centers, rings):
    """2R joint between the two nearest facing cubes of adjacent blocks."""
    left = {i + 1: np.array(centers[i]) for i in range(len(centers) // 2)}
    right = {i + 1: np.array(centers[i]) for i in range(len(centers) // 2, len(centers))}
    best = None
    for a, ca in left.items():
        for b, cb in right.items():
            d = np.abs(ca - cb)
            if sorted(d) == [0.0, 0.0, 2.0]:
                score = (abs(ca[1] + cb[1]), a)
                if best is None or score < best[0]:
                    best = (score, a, b)
    if best is None:
        raise NonAdjacent("2R blocks do not touch")
    return best[1], best[2], EDGE_TOP


def _extend_2r(motifs, centers, rings, lvl2):
    """Stack trailing 2R levels: duplicate the unit so far side by side
    along x and add one joint per 2R level between the facing cube pair."""
    for m in motifs[2:]:
        if m != 2:
            raise DesignError("levels above 2 must use the 2R motif")
        xs = [c[0] for c in centers]
        half = (max(xs) - min(xs)) // 2 + 1
        n = len(centers)
        left = [(x - half, y, z) for x, y, z in centers]
        right = [(x + half, y, z) for x, y, z in centers]
        centers = left + right
        rings = rings + [[cid + n for cid in ring] for ring in rings]
        lvl2 = lvl2 + [(a + n, b + n, code) for a, b, code in lvl2]
        # facing pair: rightmost column of the left copy meets leftmost of
        # the right copy; join nearest-to-centerline pair at a top edge
        pos = {i + 1: np.array(c, float) for i, c in enumerate(centers)}
        xmax_left = max(pos[i][0] for i in range(1, n + 1))
        cands = []
        for a in range(1, n + 1):
            if pos[a][0] != xmax_left:
                continue
            for b in range(n + 1, 2 * n + 1):
                d = np.abs(pos[a] - pos[b])
                if sorted(d) == [0.0, 0.0, 2.0]:
                    cands.append((abs(pos[a][1]), a, b))
        if not cands:
            raise NonAdjacent("2R copies do not touch")
        _, a, b = min(cands)
        lvl2 = lvl2 + [(a, b, EDGE_TOP)]
    return centers, rings, lvl2


def _level2_cycle(rings, hinges, l2):
    """Oriented 12-hinge cycle through four level-2 hinges and the shortest
    in-ring arcs between each block's entry and exit cubes."""
    ring_of = {}
    for li, ring in enumerate(rings):
        for cid in ring:
            ring_of[cid] = li
    by_pair = {}
    for h in hinges:
        if h.level == 1:
            by_pair[(h.cube_a, h.cube_b)] = (h.id, +1)
            by_pair[(h.cube_b, h.cube_a)] = (h.id, -1)
    steps = []
    for k, h in enumerate(l2):
        steps.append((h.id, +1))
        entry = h.cube_b
        nxt = l2[(k + 1) % len(l2)]
        exit_ = nxt.cube_a
        ring = rings[ring_of[entry]]
        i, j = ring.index(entry), ring.index(exit_)
        m = len(ring)
        fwd = [(ring[(i + s) % m], ring[(i + s + 1) % m]) for s in range((j - i) % m)]
        bwd = [(ring[(i - s) % m], ring[(i - s - 1) % m]) for s in range((i - j) % m)]
        arc = fwd if len(fwd) <= len(bwd) else bwd
        for a, b in arc:
            steps.append(by_pair[(a, b)])
    return steps


# ---------------------------------------------------------------------------
# operations on designs
# ---------------------------------------------------------------------------

def flip_link(design: DesignSpec, link_index: int) -> DesignSpec:
    """Toggle the upside-down flag of a lower-level link."""
    n = link_count(design.motifs)
    if not (0 <= link_index < n):
        raise BadIndex(f"link index {link_index} out of range 0..{n - 1}")
    flips = list(design.link_flips or [False] * n)
    flips[link_index] = not flips[link_index]
    return DesignSpec(design.motifs, design.hinge_placements, tuple(flips), design.labels)


def enumerate_designs(base_motifs, vary=("placements",), symmetry_dedupe=False,
                      base_placements=None, base_flips=None):
    """Lazily enumerate DesignSpecs over edge codes and/or flips.

    Without dedupe the count is 4^h * 2^f for h varied hinges and f
    flippable links; ordering is deterministic (placements major).
    """
    motifs = tuple(base_motifs)
    h = hinge_count(motifs)
    f = link_count(motifs)
    base_placements = tuple(base_placements) if base_placements else (EDGE_TOP,) * h
    base_flips = tuple(base_flips) if base_flips else (False,) * f
    placements_iter = (itertools.product(range(4), repeat=h)
                       if "placements" in vary else [base_placements])
    seen = set()
    for codes in placements_iter:
        flips_iter = (itertools.product((False, True), repeat=f)
                      if "flips" in vary else [base_flips])
        for flips in flips_iter:
            d = DesignSpec(motifs, tuple(codes), tuple(flips))
            if symmetry_dedupe:
                key = canonical_design_key(d)
                if key in seen:
                    continue
                seen.add(key)
            yield d


def design_symmetries(design: DesignSpec):
    """Hinge permutations + code remaps induced by the flat layout's
    axis-aligned symmetries (mirrors in x, y, z and compositions)."""
    st = build_structure(design)
    homes = {c.id: np.array(c.home_center, float) for c in st.cubes}
    descr = {}
    for h in st.hinges:
        a = np.array(homes[h.cube_a])
        b = np.array(homes[h.cube_b])
        anchor = np.array(h.axis_anchor)
        descr[h.id] = (a, b, anchor)
    pts = {tuple(v) for v in homes.values()}
    out = []
    for sx, sy, sz in itertools.product((1, -1), repeat=3):
        M = np.diag([sx, sy, sz])
        off = np.array([0.0, 0.0, (1 - sz)])  # keep slab z in [0,2]
        img = {tuple(M @ v + off) for v in pts}
        if img != pts:
            continue
        perm = {}
        ok = True
        for hid, (a, b, anchor) in descr.items():
            ia, ib, ian = M @ a + off, M @ b + off, M @ anchor + off
            match = None
            for hid2, (a2, b2, an2) in descr.items():
                if (np.allclose(ian, an2)
                        and ((np.allclose(ia, a2) and np.allclose(ib, b2))
                             or (np.allclose(ia, b2) and np.allclose(ib, a2)))):
                    match = hid2
                    break
            if match is None:
                ok = False
                break
            perm[hid] = match
        if ok:
            out.append((M, off, perm))
    return out


def canonical_design_key(design: DesignSpec):
    """Deterministic key equal across layout-symmetric placements/flips.

    Encodes each hinge by its transformed edge geometry (anchor + axis up
    to sign), minimized lexicographically over the layout's mirror group.
    """
    st = build_structure(design)
    homes = {c.id: np.array(c.home_center, float) for c in st.cubes}
    edges = []
    for h in st.hinges:
        a = homes[h.cube_a]
        b = homes[h.cube_b]
        edges.append((np.array(h.axis_anchor), np.array(h.axis_dir), (a + b) / 2))
    pts = {tuple(v) for v in homes.values()}
    best = None
    for sx, sy, sz in itertools.product((1, -1), repeat=3):
        M = np.diag([sx, sy, sz])
        off = np.array([0.0, 0.0, float(1 - sz)])
        if {tuple(M @ np.array(p) + off) for p in pts} != pts:
            continue
        enc = []
        for anchor, axis, mid in edges:
            ia = M @ anchor + off
            ax = M @ axis
            if tuple(ax) < tuple(-ax):
                ax = -ax
            im = M @ mid + off
            enc.append(tuple(np.round(np.concatenate([im, ia, ax]), 6)))
        enc = tuple(sorted(enc))
        if best is None or enc < best:
            best = enc
    return best


def reference_shape(structure: Structure):
    """Flat ShapeMatrix: home centers in the fixed global frame."""
    from .shapespace import ShapeMatrix
    centers = np.array([c.home_center for c in structure.cubes], float)
    orients = np.tile(np.eye(3), (structure.n_cubes, 1, 1))
    return ShapeMatrix(centers=centers, orientations=orients, lattice=True)


# ---------------------------------------------------------------------------
# design file I/O (schema metamorph-design/1)
# ---------------------------------------------------------------------------

def design_to_dict(design: DesignSpec):
    st = build_structure(design)
    return {
        "schema": DESIGN_SCHEMA,
        "motifs": list(design.motifs),
        "hinges": [
            {"cubes": [h.cube_a, h.cube_b], "level": h.level,
             "edge_code": design.hinge_placements[h.id], "surface": h.surface_tag}
            for h in st.hinges
        ],
        "flips": [bool(f) for f in (design.link_flips or [])],
    }


def design_from_dict(doc):
    if doc.get("schema") != DESIGN_SCHEMA:
        raise DesignError(f"unsupported design schema {doc.get('schema')!r}")
    codes = tuple(int(h["edge_code"]) for h in doc["hinges"])
    d = DesignSpec(tuple(doc["motifs"]), codes, tuple(doc.get("flips", [])))
    d.validate()
    n = cube_count(d.motifs)
    for entry in doc["hinges"]:
        for cid in entry["cubes"]:
            if not (1 <= int(cid) <= n):
                raise DanglingHinge(
                    f"hinge references cube {cid} in a {n}-cube design")
    built = build_structure(d)
    for h, entry in zip(built.hinges, doc["hinges"]):
        if [h.cube_a, h.cube_b] != list(entry["cubes"]):
            raise NonAdjacent(
                f"hinge {h.id} cube pair {entry['cubes']} does not match the "
                f"motif construction ({[h.cube_a, h.cube_b]})")
    return d


def save_design(design: DesignSpec, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(design_to_dict(design), f, indent=2)


def load_design(path):
    with open(path, encoding="utf-8") as f:
        return design_from_dict(json.load(f))
