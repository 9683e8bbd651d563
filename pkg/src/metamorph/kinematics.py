"""Continuous rigid-body kinematics: hinge transforms, loop closure,
Jacobian/DOF analysis, damped least-squares closure solving and
predictor-corrector path continuation.

Angles are radians internally; every external surface (serialization, CLI,
protocol) speaks degrees. The flat state is gamma = pi everywhere; folding
toward a hinge's edge side decreases gamma.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (DrivenOverconstrained, NoConvergence, NotOnManifold,
                     WrongEndpoint, BadIndex, CollisionOnPath)

TWO_PI = 2.0 * math.pi


def default_tolerance():
    """Closure tolerance: METAMORPH_TOL env overrides the 1e-9 default."""
    try:
        return float(os.environ.get("METAMORPH_TOL", "") or 1e-9)
    except ValueError:
        return 1e-9


@dataclass(frozen=True)
class FoldState:
    """Opening angles, one per hinge, radians in [0, 2*pi)."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.mod(np.asarray(self.gamma, float), TWO_PI)
        g[g >= TWO_PI] = 0.0   # np.mod of a tiny negative lands on 2*pi
        if not np.all(np.isfinite(g)):
            raise ValueError("fold angles must be finite")
        object.__setattr__(self, "gamma", g)
        self.gamma.setflags(write=False)

    @classmethod
    def flat(cls, structure):
        return cls(np.full(structure.n_hinges, math.pi))

    @classmethod
    def from_degrees(cls, degrees):
        return cls(np.deg2rad(np.asarray(degrees, float)))

    def degrees(self):
        return np.rad2deg(self.gamma)

    def replace(self, assignment):
        """New state with hinge->angle (radians) overrides."""
        g = self.gamma.copy()
        for hid, val in assignment.items():
            g[hid] = val
        return FoldState(g)

    def is_lattice(self, tol=1e-6):
        q = self.gamma / (math.pi / 2)
        return bool(np.all(np.abs(q - np.round(q)) < tol))

    def snapped(self):
        """Nearest 90-degree lattice state."""
        q = np.round(self.gamma / (math.pi / 2))
        return FoldState(q * (math.pi / 2))

    def key(self):
        return tuple(np.round(self.degrees(), 6))


@dataclass
class KinematicsReport:
    residuals: list
    jacobian: np.ndarray
    singular_values: np.ndarray
    null_dim: int
    null_basis: np.ndarray


@dataclass
class KinePath:
    """Tracked continuation between two states."""

    states: list                 # FoldState, start..end inclusive
    active_hinges: frozenset     # hinges whose angles differ between endpoints
    driven_hinges: tuple         # hinges driven by the schedule
    path_dof: int                # max interior nullity restricted to active

    @property
    def start(self):
        return self.states[0]

    @property
    def end(self):
        return self.states[-1]


# ---------------------------------------------------------------------------
# compiled per-structure kinematics
# ---------------------------------------------------------------------------

class _Compiled:
    """Cached hinge frames and oriented loops for a Structure."""

    def __init__(self, structure):
        self.structure = structure
        n = structure.n_hinges
        self.anchors = np.array([h.axis_anchor for h in structure.hinges], float)
        axes = np.array([h.axis_dir for h in structure.hinges], float)
        self.K = np.zeros((n, 3, 3))
        for i, u in enumerate(axes):
            self.K[i] = [[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]]
        self.loops = structure.loops
        self.tree = structure.spanning_tree()
        self.homes = np.array([c.home_center for c in structure.cubes], float)
        self.hinge_ab = [(h.cube_a, h.cube_b) for h in structure.hinges]

    def hmat(self, i, gamma):
        th = math.pi - gamma
        K = self.K[i]
        R = np.eye(3) + math.sin(th) * K + (1 - math.cos(th)) * (K @ K)
        T = np.eye(4)
        T[:3, :3] = R
        T[:3, 3] = self.anchors[i] - R @ self.anchors[i]
        return T

    def dhmat(self, i, gamma):
        th = math.pi - gamma
        K = self.K[i]
        dR = -(math.cos(th) * K + math.sin(th) * (K @ K))
        T = np.zeros((4, 4))
        T[:3, :3] = dR
        T[:3, 3] = -dR @ self.anchors[i]
        return T

    def hmats(self, gamma):
        """Batched hinge transforms for a full angle vector."""
        if len(gamma) == 0:
            return np.zeros((0, 4, 4))
        th = math.pi - np.asarray(gamma)
        s = np.sin(th)[:, None, None]
        cc = (1 - np.cos(th))[:, None, None]
        KK = self.K @ self.K
        R = np.eye(3)[None] + s * self.K + cc * KK
        T = np.zeros((len(th), 4, 4))
        T[:, :3, :3] = R
        T[:, :3, 3] = self.anchors - np.einsum("nij,nj->ni", R, self.anchors)
        T[:, 3, 3] = 1.0
        return T

    def dhmats(self, gamma):
        if len(gamma) == 0:
            return np.zeros((0, 4, 4))
        th = math.pi - np.asarray(gamma)
        c = np.cos(th)[:, None, None]
        s = np.sin(th)[:, None, None]
        KK = self.K @ self.K
        dR = -(c * self.K + s * KK)
        T = np.zeros((len(th), 4, 4))
        T[:, :3, :3] = dR
        T[:, :3, 3] = -np.einsum("nij,nj->ni", dR, self.anchors)
        return T


_COMPILED = {}


def _compiled(structure):
    key = id(structure)
    c = _COMPILED.get(key)
    if c is None or c.structure is not structure:
        c = _Compiled(structure)
        _COMPILED[key] = c
    return c


def _inv_rigid(T):
    Ti = np.eye(4)
    R = T[:3, :3]
    Ti[:3, :3] = R.T
    Ti[:3, 3] = -R.T @ T[:3, 3]
    return Ti


def hinge_transform(d, gamma):
    """Canonical hinge-frame step: rotation by (pi - gamma) about the local
    z axis composed with the inter-axis offset d along local x."""
    th = math.pi - gamma
    c, s = math.cos(th), math.sin(th)
    T = np.array([[c, -s, 0.0, d],
                  [s, c, 0.0, 0.0],
                  [0.0, 0.0, 1.0, 0.0],
                  [0.0, 0.0, 0.0, 1.0]])
    return T


def hinge_frame_steps(structure, state, loop_index=0):
    """The per-hinge frame-to-frame transforms of one loop; their ordered
    product is that loop's closure transform."""
    c = _compiled(structure)
    g = state.gamma
    steps = []
    for idx, sign in c.loops[loop_index]:
        H = c.hmat(idx, g[idx])
        steps.append(H if sign > 0 else _inv_rigid(H))
    return steps


def loop_residual(structure, state):
    """Per-loop 6-vector: rotation-log components and translation of the
    composed loop transform; all zeros iff every loop closes."""
    c = _compiled(structure)
    Hs = c.hmats(state.gamma)
    out = []
    for steps in c.loops:
        T = np.eye(4)
        for idx, sign in steps:
            H = Hs[idx]
            T = T @ (H if sign > 0 else _inv_rigid(H))
        R, t = T[:3, :3], T[:3, 3]
        out.append(np.array([(R[2, 1] - R[1, 2]) / 2, (R[0, 2] - R[2, 0]) / 2,
                             (R[1, 0] - R[0, 1]) / 2, t[0], t[1], t[2]]))
    return out


def residual_vector(structure, state):
    res = loop_residual(structure, state)
    return np.concatenate(res) if res else np.zeros(0)


def closure_jacobian(structure, state):
    """Analytic d(residual)/d(gamma), product-rule through each loop."""
    c = _compiled(structure)
    g = state.gamma
    n = structure.n_hinges
    Hs = c.hmats(g)
    dHs = c.dhmats(g)
    J = np.zeros((6 * len(c.loops), n))
    for ci, steps in enumerate(c.loops):
        mats = []
        for idx, sign in steps:
            H = Hs[idx]
            mats.append(H if sign > 0 else _inv_rigid(H))
        m = len(mats)
        pre = [np.eye(4)]
        for M in mats:
            pre.append(pre[-1] @ M)
        suf = [np.eye(4)] * (m + 1)
        for k in range(m - 1, -1, -1):
            suf[k] = mats[k] @ suf[k + 1]
        for k, (idx, sign) in enumerate(steps):
            dH = dHs[idx]
            if sign > 0:
                dM = dH
            else:
                Hi = mats[k]
                dM = -Hi @ dH @ Hi
            dT = pre[k] @ dM @ suf[k + 1]
            dR, dt = dT[:3, :3], dT[:3, 3]
            J[6 * ci:6 * ci + 6, idx] += [
                (dR[2, 1] - dR[1, 2]) / 2, (dR[0, 2] - dR[2, 0]) / 2,
                (dR[1, 0] - dR[0, 1]) / 2, dt[0], dt[1], dt[2]]
    return J


def dof_analysis(structure, state, tol=None, rel_sv_tol=1e-8):
    """Singular-value analysis of the closure Jacobian at an on-manifold state."""
    tol = tol if tol is not None else max(default_tolerance(), 1e-9) * 100
    res = loop_residual(structure, state)
    worst = max((float(np.max(np.abs(r))) for r in res), default=0.0)
    if worst > tol:
        raise NotOnManifold(f"residual {worst:.2e} exceeds {tol:.2e}")
    J = closure_jacobian(structure, state)
    if J.size == 0:
        return KinematicsReport(res, J, np.zeros(0), structure.n_hinges,
                                np.eye(structure.n_hinges))
    U, s, Vt = np.linalg.svd(J)
    if s.size and s[0] > 1e-12:
        rank = int(np.sum(s > rel_sv_tol * s[0]))
    else:
        rank = 0
    null_dim = structure.n_hinges - rank
    return KinematicsReport(res, J, s, null_dim, Vt[rank:].T)


def detect_bifurcation(structure, state, baseline_dof, **kw):
    report = dof_analysis(structure, state, **kw)
    extra = report.null_dim - baseline_dof
    return {"is_bifurcation": extra > 0, "extra_dof": max(extra, 0),
            "null_dim": report.null_dim}


def restricted_nullity(structure, state, hinge_ids, rel_sv_tol=1e-8):
    """Nullity of the closure Jacobian restricted to the given hinge columns."""
    cols = sorted(hinge_ids)
    if not cols:
        return 0
    J = closure_jacobian(structure, state)[:, cols]
    s = np.linalg.svd(J, compute_uv=False)
    if s.size == 0 or s[0] < 1e-12:
        return len(cols)
    return int(np.sum(s < rel_sv_tol * s[0])) + max(0, len(cols) - s.size)


# ---------------------------------------------------------------------------
# closure solving and continuation
# ---------------------------------------------------------------------------

def solve_closure(structure, driven, seed, tol=None, max_iter=200):
    """Damped least-squares on the free angles with the driven set pinned.

    driven: hinge id -> angle (radians). Returns the continuation-nearest
    closed state; raises NoConvergence / DrivenOverconstrained.
    """
    tol = tol if tol is not None else default_tolerance()
    g = seed.gamma.copy()
    for hid, val in driven.items():
        if not (0 <= hid < structure.n_hinges):
            raise BadIndex(f"hinge {hid} out of range")
        g[hid] = val
    free = np.array([i for i in range(structure.n_hinges) if i not in driven], int)
    state = FoldState(g)
    r = residual_vector(structure, state)
    if r.size == 0:
        return state
    lam = 1e-3
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            return state
        J = closure_jacobian(structure, state)[:, free]
        A = J.T @ J + lam * np.eye(free.size)
        dx = np.linalg.solve(A, -J.T @ r)
        g2 = state.gamma.copy()
        g2[free] = g2[free] + dx
        cand = FoldState(g2)
        r2 = residual_vector(structure, cand)
        if np.linalg.norm(r2) < np.linalg.norm(r):
            state, r = cand, r2
            lam = max(lam / 10.0, 1e-9)
        else:
            lam *= 10.0
            if lam > 1e8:
                break
    if np.max(np.abs(r)) < 1e-9:
        return state
    J = closure_jacobian(structure, state)[:, free]
    grad = J.T @ r
    if np.linalg.norm(grad) < 1e-8 * max(np.linalg.norm(r), 1e-12):
        raise DrivenOverconstrained(
            f"driven set admits no closed solution (residual {np.max(np.abs(r)):.2e})")
    raise NoConvergence(f"closure stagnated at residual {np.max(np.abs(r)):.2e}")


def _null_basis(structure, state, rel_sv_tol=1e-8):
    J = closure_jacobian(structure, state)
    if J.size == 0:
        return np.eye(structure.n_hinges)
    U, s, Vt = np.linalg.svd(J)
    rank = int(np.sum(s > rel_sv_tol * s[0])) if s.size and s[0] > 1e-12 else 0
    return Vt[rank:]


def continue_path(structure, start, drive_schedule, to=None, step=np.deg2rad(2.0),
                  min_step=np.deg2rad(0.125), collision_check=None,
                  snap=np.deg2rad(2.0), tol=None, record=True):
    """Drive hinges along piecewise-linear schedules, re-solving closure.

    drive_schedule: hinge id -> target angle (radians); driven hinges move
    linearly from their start values. Free hinges follow closure, seeded by
    the projection of the remaining delta onto the instantaneous null space
    (branch disambiguation at singular states). If `to` is given the final
    state must land within `snap` of it and is then replaced by the exact
    target; otherwise the tracked state is returned as reached.
    """
    tol = tol if tol is not None else default_tolerance()
    state = start
    drivers = sorted(drive_schedule)
    start_vals = {k: start.gamma[k] for k in drivers}
    target = to.gamma if to is not None else None
    span = max(abs(drive_schedule[k] - start_vals[k]) for k in drivers) if drivers else 0.0
    states = [state]
    cur_step = step
    f = 0.0
    guard = 0
    while f < 1.0 - 1e-12:
        guard += 1
        if guard > 10000:
            raise NoConvergence("continuation exceeded step budget")
        df = min(cur_step / span if span > 0 else 1.0, 1.0 - f)
        f_next = f + df
        seed_g = state.gamma.copy()
        if target is not None:
            N = _null_basis(structure, state)
            if N.shape[0]:
                delta = target - state.gamma
                v = N.T @ (N @ delta)
                vk = np.array([v[k] for k in drivers])
                adv = np.array([start_vals[k]
                                + f_next * (drive_schedule[k] - start_vals[k])
                                - state.gamma[k] for k in drivers])
                dn = float(vk @ vk)
                if dn > 1e-14:
                    seed_g = state.gamma + (float(vk @ adv) / dn) * v
        pinned = {k: start_vals[k] + f_next * (drive_schedule[k] - start_vals[k])
                  for k in drivers}
        try:
            nxt = solve_closure(structure, pinned, FoldState(seed_g), tol=tol)
        except (NoConvergence, DrivenOverconstrained):
            if cur_step / 2 >= min_step - 1e-15:
                cur_step /= 2
                continue
            raise
        if collision_check is not None:
            # states inside the landing window get replaced by the exact
            # target, whose collision the caller validates; checking the
            # tracked approximation there only reports endpoint noise
            near_target = (target is not None
                           and np.max(np.abs(nxt.gamma - target)) < snap)
            if not near_target:
                bad = collision_check(nxt, len(states))
                if bad:
                    raise CollisionOnPath(len(states), bad)
        state = nxt
        f = f_next
        if record:
            states.append(state)
        else:
            states = [states[0], state]
    if to is not None:
        dev = np.max(np.abs(state.gamma - to.gamma)) if structure.n_hinges else 0.0
        if dev > snap:
            raise WrongEndpoint(f"landed {np.rad2deg(dev):.2f} deg from target")
        res = residual_vector(structure, to)
        if res.size and np.max(np.abs(res)) > max(tol, 1e-9):
            raise WrongEndpoint("target state does not satisfy closure")
        states[-1] = to
        state = to
    active = frozenset(
        i for i in range(structure.n_hinges)
        if abs(_angdiff(states[-1].gamma[i], states[0].gamma[i])) > 1e-9)
    dof = 0
    # interior band only: the lattice endpoints are singular and would
    # inflate the restricted nullity
    interior = states[max(1, len(states) // 4):max(2, 3 * len(states) // 4)]
    if interior and active:
        samples = interior[:: max(1, len(interior) // 5)]
        for s in samples:
            dof = max(dof, restricted_nullity(structure, s, active))
    return KinePath(states, active, tuple(drivers), dof)


def _angdiff(a, b):
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


# ---------------------------------------------------------------------------
# placement
# ---------------------------------------------------------------------------

def forward_placement(structure, state, tol=None, snap_tol=1e-6):
    """Body centers and orientations in the fixed global frame (the anchor
    cube holds its home pose). 90-degree-lattice states snap to exact
    odd-integer centers and exact axis permutation orientations."""
    from .shapespace import ShapeMatrix
    tol = tol if tol is not None else max(default_tolerance(), 1e-9) * 100
    res = loop_residual(structure, state)
    worst = max((float(np.max(np.abs(r))) for r in res), default=0.0)
    if worst > tol:
        raise NotOnManifold(f"residual {worst:.2e} exceeds {tol:.2e}")
    c = _compiled(structure)
    poses = {structure.anchor_id: np.eye(4)}
    g = state.gamma
    for parent, child, hid in c.tree:
        a, b = c.hinge_ab[hid]
        H = c.hmat(hid, g[hid])
        if (a, b) == (parent, child):
            poses[child] = poses[parent] @ H
        else:
            poses[child] = poses[parent] @ _inv_rigid(H)
    n = structure.n_cubes
    centers = np.zeros((n, 3))
    orients = np.zeros((n, 3, 3))
    for cid in range(1, n + 1):
        T = poses[cid]
        centers[cid - 1] = T[:3, :3] @ c.homes[cid - 1] + T[:3, 3]
        orients[cid - 1] = T[:3, :3]
    lattice = state.is_lattice()
    if lattice:
        snapped = np.round(centers)
        if np.max(np.abs(snapped - centers)) < snap_tol:
            centers = snapped
            orients = np.round(orients)
        else:
            lattice = False
    return ShapeMatrix(centers=centers, orientations=orients, lattice=lattice)


def _segment_distance(a0, a1, b0, b1):
    """Closest distance between two segments."""
    u = a1 - a0
    v = b1 - b0
    w = a0 - b0
    a = u @ u
    b = u @ v
    c = v @ v
    d = u @ w
    e = v @ w
    denom = a * c - b * b
    if denom > 1e-12:
        s = np.clip((b * e - c * d) / denom, 0.0, 1.0)
    else:
        s = 0.0
    t = (b * s + e) / c if c > 1e-12 else 0.0
    best = None
    for s_try, t_try in ((s, t), (0.0, e / c if c > 1e-12 else 0.0),
                         (1.0, (e + b) / c if c > 1e-12 else 0.0),
                         ((-d) / a if a > 1e-12 else 0.0, 0.0),
                         ((b - d) / a if a > 1e-12 else 0.0, 1.0)):
        s_c = float(np.clip(s_try, 0.0, 1.0))
        t_c = float(np.clip(t_try, 0.0, 1.0))
        dist = float(np.linalg.norm((a0 + s_c * u) - (b0 + t_c * v)))
        if best is None or dist < best:
            best = dist
    return best


def level2_link_length(structure, state, link_index, tol=None):
    """Closest distance between the two level-2 hinge edges bounding a
    level-1 block (the flexible level-2 link length)."""
    l2 = [h for h in structure.hinges if h.level == 2]
    if not l2:
        raise BadIndex("structure has no level-2 hinges")
    if not (0 <= link_index < len(l2)):
        raise BadIndex(f"link index {link_index} out of range")
    placed = forward_placement(structure, state, tol=tol)
    c = _compiled(structure)

    def edge_now(h):
        # the hinge edge expressed in the owning cube's current pose
        cid = h.cube_a
        R = np.asarray(placed.orientations[cid - 1], float)
        ctr = placed.centers[cid - 1]
        home = c.homes[cid - 1]
        anchor = R @ (np.array(h.axis_anchor) - home) + ctr
        direction = R @ np.array(h.axis_dir)
        return anchor - direction, anchor + direction

    prev = l2[link_index]
    nxt = l2[(link_index + 1) % len(l2)]
    a0, a1 = edge_now(prev)
    b0, b1 = edge_now(nxt)
    return _segment_distance(a0, a1, b0, b1)


# ---------------------------------------------------------------------------
# published 8R relations
# ---------------------------------------------------------------------------

def printed_8r_relation(gamma_even):
    """The literature's closed-form for the symmetric 8R branch, evaluated
    exactly as printed: gamma_{m1,5} = asin(sin^2 g / (1 + cos^2 g)),
    gamma_{m3,7} = pi - gamma_{m1,5}."""
    s, cc = math.sin(gamma_even), math.cos(gamma_even)
    val = math.asin(s * s / (1.0 + cc * cc))
    return val, math.pi - val


def closed_form_8r(structure, gamma_drive, seed=None, tol=None):
    """Printed-formula angles vs the numeric symmetric-branch solution.

    Drives the ring's even hinges (positions 1,3,5,7) to gamma_drive from
    the all-90-degree state and solves the odd hinges. Returns a dict with
    both angle sets and their discrepancy; the numeric set is authoritative.
    """
    if structure.n_hinges < 8:
        raise BadIndex("closed-form relation needs an 8R ring")
    ring = [hid for hid, _ in structure.loops[0]]
    if len(ring) != 8:
        raise BadIndex("first loop is not an 8R ring")
    even = [ring[i] for i in (1, 3, 5, 7)]
    odd = [ring[i] for i in (0, 2, 4, 6)]
    start = seed or FoldState(np.where(
        np.isin(np.arange(structure.n_hinges), ring),
        math.pi / 2, math.pi))
    path = continue_path(structure, start,
                         {h: gamma_drive for h in even}, to=None,
                         step=np.deg2rad(1.0), tol=tol, record=False)
    sol = path.end
    m15, m37 = printed_8r_relation(gamma_drive)
    printed = {"m15": m15, "m37": m37}
    numeric = {"m15": float(sol.gamma[odd[0]]), "m37": float(sol.gamma[odd[1]]),
               "all_odd": [float(sol.gamma[h]) for h in odd]}
    disc = {k: abs(printed[k] - numeric[k]) for k in ("m15", "m37")}
    return {"gamma_drive": gamma_drive, "printed": printed, "numeric": numeric,
            "discrepancy": disc, "state": sol}
