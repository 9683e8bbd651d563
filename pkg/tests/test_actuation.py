"""Actuator assignment, schedule compilation, command export."""

import math

import numpy as np
import pytest

from metamorph import (assign_actuators, compile_schedule, export_commands,
                       parse_commands, paths_from_edges)
from metamorph.actuation import ActuatorAssignment, MotorSchedule, PathSpec
from metamorph.errors import ClosureDrift, UnassignedHinge, UncoverablePath
from metamorph.shapespace import find_path


def test_single_path_actuates_its_drivers():
    p = PathSpec((2, 5), {2: math.pi, 5: math.pi},
                 {2: math.pi / 2, 5: math.pi / 2})
    assignment = assign_actuators([p])
    assert assignment.actuated == {2, 5}


def test_cover_reuses_hinges():
    p1 = PathSpec((1,), {1: math.pi}, {1: math.pi / 2},
                  alternatives=((3,),))
    p2 = PathSpec((3,), {3: math.pi}, {3: math.pi / 2})
    assignment = assign_actuators([p2, p1])
    # p1 switches to its alternative (3,) already actuated by p2
    assert assignment.actuated == {3}


def test_restricted_candidates_uncoverable():
    p = PathSpec((4,), {4: math.pi}, {4: math.pi / 2})
    with pytest.raises(UncoverablePath):
        assign_actuators([p], candidates=(1, 2))


def test_level1_full_graph_actuation(structure8, graph8):
    # the full standalone-8R graph is drivable with at most five motors
    paths = paths_from_edges(graph8.edges, graph8)
    assignment = assign_actuators(paths, universe=range(structure8.n_hinges))
    assert len(assignment.actuated) <= 5
    assert assignment.actuated | assignment.passive == set(range(8))


def test_compile_empty_schedule(canonical_structure, canonical_graph):
    schedule = compile_schedule(canonical_structure, [], canonical_graph, 30.0)
    assert schedule.keyframes == []
    assert schedule.duration == 0.0


def test_compile_single_move_arithmetic(structure8, graph8):
    g = graph8.graph()
    nbr = next(iter(g.neighbors(graph8.root_key)))
    edges = find_path(graph8, graph8.root_key, nbr)
    schedule = compile_schedule(structure8, edges, graph8, 30.0)
    # one 90-degree move at 30 deg/s lasts 3 s; two keyframes per driven hinge
    assert schedule.duration == pytest.approx(3.0)
    per_hinge = {}
    for t, h, a in schedule.keyframes:
        per_hinge.setdefault(h, []).append((t, a))
    assert all(len(v) == 2 for v in per_hinge.values())


def test_compile_validates_closure(structure8, graph8):
    g = graph8.graph()
    nbr = next(iter(g.neighbors(graph8.root_key)))
    edges = find_path(graph8, graph8.root_key, nbr)
    schedule = compile_schedule(structure8, edges, graph8, 30.0, validate_deg=2.0)
    assert schedule.concurrent_active
    assert max(schedule.concurrent_active) <= 3


def test_export_empty_is_run_only():
    schedule = MotorSchedule([], 30.0, [])
    out = export_commands(schedule, ActuatorAssignment(frozenset(), frozenset(), []))
    assert out == "RUN\n"


def test_export_format_and_roundtrip():
    schedule = MotorSchedule([(0.0, 7, 180.0), (3.0, 7, 90.0)], 30.0, [1])
    assignment = ActuatorAssignment(frozenset({7}), frozenset(), [])
    out = export_commands(schedule, assignment)
    assert out == "SET 0 180.00 0\nSET 0 90.00 3000\nRUN\n"
    frames = parse_commands(out, assignment)
    assert frames == [(0.0, 7, 180.0), (3.0, 7, 90.0)]


def test_export_single_keyframe_golden():
    schedule = MotorSchedule([(3.0, 4, 90.0)], 30.0, [1])
    assignment = ActuatorAssignment(frozenset({4}), frozenset(), [])
    assert export_commands(schedule, assignment) == "SET 0 90.00 3000\nRUN\n"


def test_export_unassigned_hinge():
    schedule = MotorSchedule([(0.0, 9, 90.0)], 30.0, [1])
    assignment = ActuatorAssignment(frozenset({1}), frozenset({9}), [])
    with pytest.raises(UnassignedHinge):
        export_commands(schedule, assignment)


def test_rl1_schedule_concurrency(canonical_structure, canonical_graph, rl1,
                                  rl1_paths):
    # compile the replayed RL-1 loop: drivers stay at or below three
    from metamorph.actuation import PathSpec
    paths = []
    for a, b, path in rl1_paths:
        paths.append(PathSpec(path.driven_hinges,
                              {h: float(path.start.gamma[h]) for h in path.driven_hinges},
                              {h: float(path.end.gamma[h]) for h in path.driven_hinges}))
    assignment = assign_actuators(paths)
    assert all(len(p.driven) <= 3 for p in paths)
    assert len(assignment.actuated) <= 22
