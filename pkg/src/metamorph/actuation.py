"""Actuator selection and motor schedule compilation.

A path is driven by its driven-hinge set (the active servos); passive
hinges follow closure or stay pinned. assign_actuators picks a hinge set
covering every path's drivers via a greedy cover that reuses hinges across
paths; compile_schedule turns an edge sequence into time-parameterized
keyframes and re-validates closure along the interpolation; export emits
the serial command stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClosureDrift, UnassignedHinge, UncoverablePath
from .kinematics import residual_vector, solve_closure
from .errors import NoConvergence, DrivenOverconstrained

SCHEDULE_SCHEMA = "metamorph-schedule/1"


@dataclass
class PathSpec:
    """A reconfiguration step: driven hinges with start/end angles (radians)."""

    driven: tuple
    start: dict
    end: dict
    alternatives: tuple = ()     # optional equivalent driven sets


@dataclass
class ActuatorAssignment:
    actuated: frozenset
    passive: frozenset
    coverage: list

    @property
    def motor_ids(self):
        """Motor index per actuated hinge, in actuated-hinge order."""
        return {h: i for i, h in enumerate(sorted(self.actuated))}


@dataclass
class MotorSchedule:
    keyframes: list          # (t_seconds, hinge_id, angle_degrees)
    omega: float
    concurrent_active: list  # per-step count of simultaneously moving drivers

    @property
    def duration(self):
        return max((t for t, _, _ in self.keyframes), default=0.0)


def paths_from_edges(edges, graph):
    """PathSpecs for graph edges (driven sets recorded during validation)."""
    out = []
    for e in edges:
        a = graph.nodes[e.key_a].fold_state
        b = graph.nodes[e.key_b].fold_state
        out.append(PathSpec(tuple(e.driven),
                            {h: float(a.gamma[h]) for h in e.driven},
                            {h: float(b.gamma[h]) for h in e.driven}))
    return out


def assign_actuators(paths, candidates=None, universe=None):
    """Greedy cover: every path's driven set must lie inside the actuated
    set; alternatives (when present) are chosen to maximize hinge reuse.
    `universe` (all hinge ids of the structure) fixes the passive set."""
    if not paths:
        return ActuatorAssignment(frozenset(), frozenset(universe or ()), [])
    actuated = set()
    for p in paths:
        options = [tuple(p.driven)] + [tuple(a) for a in p.alternatives]
        if candidates is not None:
            options = [o for o in options if set(o) <= set(candidates)]
            if not options:
                raise UncoverablePath(
                    f"path drivers {p.driven} outside candidate actuators")
        options.sort(key=lambda o: (len(set(o) - actuated), o))
        actuated.update(options[0])
    if universe is None:
        universe = set()
        for p in paths:
            universe.update(p.driven)
            universe.update(p.start)
        if candidates is not None:
            universe |= set(candidates)
        universe |= actuated
    return ActuatorAssignment(frozenset(actuated),
                              frozenset(set(universe) - actuated), list(paths))


def compile_schedule(structure, edges, graph, omega_deg_s, validate_deg=2.0,
                     tol=1e-6):
    """Piecewise-linear driven trajectories for an edge sequence.

    Each step's duration is max |delta gamma| / omega; interpolated states
    are re-solved for closure at the validation resolution and must stay
    within tolerance.
    """
    if omega_deg_s <= 0:
        raise ValueError("omega must be positive")
    keyframes = []
    concurrent = []
    t = 0.0
    cursor = None
    for step_idx, e in enumerate(edges):
        a = graph.nodes[e.key_a].fold_state
        b = graph.nodes[e.key_b].fold_state
        if cursor is None:
            cursor = a
        if cursor.key() == b.key():
            a, b = b, a   # edge traversed in reverse
        start = {h: float(cursor.gamma[h]) for h in e.driven}
        dest_state = b if cursor.key() == a.key() else a
        end = {h: float(dest_state.gamma[h]) for h in e.driven}
        deltas = {h: math.degrees(abs(end[h] - start[h])) for h in e.driven}
        span = max(deltas.values(), default=0.0)
        duration = span / omega_deg_s
        moving = sum(1 for d in deltas.values() if d > 1e-9)
        concurrent.append(moving)
        for h in sorted(e.driven):
            keyframes.append((round(t, 9), h, round(math.degrees(start[h]), 6)))
        # closure validation along the interpolation
        nsteps = max(1, int(math.ceil(span / validate_deg)))
        state = cursor
        for k in range(1, nsteps + 1):
            f = k / nsteps
            pinned = {h: start[h] + f * (end[h] - start[h]) for h in e.driven}
            try:
                state = solve_closure(structure, pinned, state, tol=1e-9)
            except (NoConvergence, DrivenOverconstrained) as exc:
                raise ClosureDrift(f"closure drift in step {step_idx}", step_idx) from exc
            r = residual_vector(structure, state)
            if r.size and np.max(np.abs(r)) > tol:
                raise ClosureDrift(f"closure drift in step {step_idx}", step_idx)
        t += duration
        for h in sorted(e.driven):
            keyframes.append((round(t, 9), h, round(math.degrees(end[h]), 6)))
        cursor = dest_state
    return MotorSchedule(keyframes, omega_deg_s, concurrent)


def export_commands(schedule: MotorSchedule, assignment: ActuatorAssignment):
    """Newline-delimited frames `SET <motor> <angle> <t_ms>` ending in RUN."""
    motor = assignment.motor_ids
    lines = []
    for t, hinge, angle in schedule.keyframes:
        if hinge not in motor:
            raise UnassignedHinge(f"hinge {hinge} is not actuated")
        lines.append(f"SET {motor[hinge]} {angle:.2f} {int(round(t * 1000))}")
    lines.append("RUN")
    return "\n".join(lines) + "\n"


def parse_commands(text, assignment: ActuatorAssignment):
    """Inverse of export_commands; returns the keyframe list."""
    hinge_of = {m: h for h, m in assignment.motor_ids.items()}
    frames = []
    for line in text.strip().splitlines():
        parts = line.split()
        if parts == ["RUN"]:
            break
        if parts[0] != "SET":
            raise ValueError(f"bad command frame {line!r}")
        m, angle, t_ms = int(parts[1]), float(parts[2]), int(parts[3])
        frames.append((t_ms / 1000.0, hinge_of[m], angle))
    return frames


def schedule_to_dict(schedule: MotorSchedule):
    return {"schema": SCHEDULE_SCHEMA, "omega_deg_s": schedule.omega,
            "keyframes": [[t, h, a] for t, h, a in schedule.keyframes],
            "concurrent_active": list(schedule.concurrent_active)}
