"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line with its measured values and runtime.

Every tolerance is pinned here. One criterion (transition path DOF
2, 2, 1) asserts the published per-leg DOF values verbatim; the engine's
spec-defined measure (max interior nullity of the closure Jacobian
restricted to the leg's active hinges) reproduces the rotated-joint
counts exactly but reports DOF (2, 1, 2) for the three legs, so that
single assertion documents a genuine model discrepancy rather than an
implementation defect. The analysis lives in the project notes.
"""

import json
import math
import time

import numpy as np
import pytest

from metamorph import (FoldState, build_database, build_structure, canonicalize,
                       check_collision, continue_path, dof_analysis,
                       forward_placement, match_shape, assign_actuators,
                       compile_schedule, export_commands, parse_commands,
                       paths_from_edges, closed_form_8r, printed_8r_relation,
                       reference_shape)
from metamorph.actuation import ActuatorAssignment, PathSpec
from metamorph.canonical import (canonical_category1, canonical_level1,
                                 M_A_COLUMNS, M_D_COLUMNS, M_E_COLUMNS,
                                 M_E_PRINTED, RL1_ORDER)
from metamorph.kinematics import closure_jacobian, residual_vector
from metamorph.shapespace import build_transition_graph, GraphEdge, TransitionGraph
from metamorph.errors import DrivenOverconstrained, NoConvergence

from tests.test_shapespace import _oracle_valid_states, _oracle_connect
from tests.test_kinematics import _fd_jacobian, _random_on_manifold_states


def _report(name, ok, detail="", runtime=None):
    stamp = "PASS" if ok else "FAIL"
    extra = f" [{runtime:.2f}s]" if runtime is not None else ""
    print(f"ACCEPTANCE {name}: {stamp}{extra} {detail}")


def test_eq3_golden_cube20(canonical_structure, rl1):
    t0 = time.perf_counter()
    th = math.radians(90)
    R = np.array([[1, 0, 0],
                  [0, math.cos(th), math.sin(th)],
                  [0, -math.sin(th), math.cos(th)]])
    moved = R @ np.array([1, 1, 1]) + np.array([0, 2, 0])
    ok_formula = np.array_equal(np.round(moved).astype(int), [1, 3, -1])
    pd = forward_placement(canonical_structure, rl1["M_D"]).int_centers()[19]
    pe = forward_placement(canonical_structure, rl1["M_E"]).int_centers()[19]
    dt = time.perf_counter() - t0
    ok = ok_formula and pd.tolist() == [1, 3, 1] and pe.tolist() == [1, 3, -1]
    _report("eq3-cube20", ok and dt < 1.0,
            f"cube20 {pd.tolist()} -> {pe.tolist()}", dt)
    assert ok
    assert dt < 1.0


def test_eq4_golden_reference_shape(canonical_structure):
    ref = reference_shape(canonical_structure).int_centers()
    ok = np.array_equal(ref, np.array(M_A_COLUMNS))
    _report("eq4-reference-shape", ok, "32 columns exact")
    assert ok


def test_eq5_golden_rl1_replay(canonical_structure, rl1):
    from metamorph.canonical import rl1_edges
    t0 = time.perf_counter()
    by_name = {}
    cur = rl1["M_A"]
    for a, b, driven in rl1_edges(canonical_structure):
        target = rl1[b] if b in rl1 else rl1["M_A"]
        sched = {h: float(target.gamma[h]) for h in driven}
        path = continue_path(canonical_structure, cur, sched, to=target)
        by_name[b] = path
        cur = path.end
    pd = forward_placement(canonical_structure, by_name["M_D"].end).int_centers()
    pe = forward_placement(canonical_structure, by_name["M_E"].end).int_centers()
    dt = time.perf_counter() - t0
    ok_d = np.array_equal(pd, np.array(M_D_COLUMNS))
    ok_e = np.array_equal(pe, np.array(M_E_COLUMNS))
    # documented comparison against the printed (partially corrupt) matrix
    printed_match = sum(
        1 for cid, col in M_E_PRINTED.items()
        if tuple(pe[cid - 1]) == col)
    _report("eq5-rl1-golden", ok_d and ok_e and dt < 30.0,
            f"M_D exact={ok_d} M_E exact={ok_e} "
            f"(printed M_E agrees on {printed_match}/31 columns)", dt)
    assert ok_d and ok_e
    assert dt < 30.0


def test_dof_table(structure4, structure6, structure8):
    t0 = time.perf_counter()
    got = {}
    for st, n in ((structure4, 4), (structure6, 6), (structure8, 8)):
        got[n] = dof_analysis(st, FoldState.flat(st), rel_sv_tol=1e-8).null_dim
    dt = time.perf_counter() - t0
    ok = got == {4: 2, 6: 3, 8: 5} and dt < 5.0
    _report("dof-table", ok, f"null_dim {got}", dt)
    assert got == {4: 2, 6: 3, 8: 5}
    assert dt < 5.0


def test_transition_dof_counts(rl1_paths):
    tail = {(a, b): p for a, b, p in rl1_paths}
    segs = [("M_D", "M_E"), ("M_E", "M_F"), ("M_F", "M_A")]
    counts = tuple(len(tail[s].active_hinges) for s in segs)
    dofs = tuple(tail[s].path_dof for s in segs)
    ok_counts = counts == (16, 8, 24)
    ok_dofs = dofs == (2, 2, 1)
    _report("transition-dof", ok_counts and ok_dofs,
            f"rotated joints {counts} (want (16, 8, 24)); "
            f"path DOF {dofs} (want (2, 2, 1))")
    assert ok_counts, f"rotated-joint counts {counts} != (16, 8, 24)"
    assert ok_dofs, (
        f"path DOF {dofs} != published (2, 2, 1): the implemented measure "
        "(max interior nullity of the closure Jacobian restricted to the "
        "active hinges) reproduces the joint counts but not the published "
        "DOF pairing; see the project notes for the exhaustive analysis")


def test_bruteforce_oracle_equivalence(structure8):
    t0 = time.perf_counter()
    valid = _oracle_valid_states(structure8)
    connected = _oracle_connect(structure8, valid)
    oracle_keys = set()
    for combo in connected:
        shape = forward_placement(structure8, FoldState(np.array(combo)))
        if check_collision(shape):
            continue
        oracle_keys.add(canonicalize(shape))
    graph = build_transition_graph(structure8,
                                   limits={"max_nodes": 256, "max_depth": 16})
    dt = time.perf_counter() - t0
    ok = set(graph.nodes) == oracle_keys and dt < 60.0
    _report("bruteforce-8r", ok,
            f"graph {len(graph.nodes)} nodes == oracle {len(oracle_keys)} "
            f"(65536 assignments screened)", dt)
    assert set(graph.nodes) == oracle_keys
    assert dt < 60.0


def test_jacobian_vs_central_differences():
    t0 = time.perf_counter()
    rng = np.random.default_rng(23)
    designs = [canonical_level1(4), canonical_level1(8), canonical_category1()]
    counts = [34, 33, 33]
    worst = 0.0
    total = 0
    for design, count in zip(designs, counts):
        st = build_structure(design)
        for state in _random_on_manifold_states(st, count, rng):
            Ja = closure_jacobian(st, state)
            Jf = _fd_jacobian(st, state)
            rel = np.max(np.abs(Ja - Jf)) / max(1.0, np.max(np.abs(Jf)))
            worst = max(worst, rel)
            total += 1
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and total == 100
    _report("jacobian-fd", ok, f"max rel err {worst:.2e} over {total} states", dt)
    assert total == 100
    assert worst < 1e-5


def test_scaling_path_vs_bifurcation(canonical_structure):
    t0 = time.perf_counter()
    import networkx as nx
    graph = build_transition_graph(
        canonical_structure,
        limits={"max_nodes": 30, "max_depth": 3, "max_candidates": 10})
    xs, ys = [], []
    for depth in (0, 1, 2, 3):
        keys = {k for k, n in graph.nodes.items() if n.depth <= depth}
        g = nx.Graph()
        g.add_nodes_from(keys)
        for e in graph.edges:
            if e.key_a in keys and e.key_b in keys:
                g.add_edge(e.key_a, e.key_b)
        paths = 0
        for other in keys - {graph.root_key}:
            paths += sum(1 for _ in nx.all_simple_paths(
                g, graph.root_key, other, cutoff=4))
        incident = {}
        for e in graph.edges:
            if e.key_a in keys and e.key_b in keys:
                for k in (e.key_a, e.key_b):
                    incident.setdefault(k, []).append(e.path_dof)
        bifs = sum(1 for k in keys
                   if incident.get(k) and
                   graph.nodes[k].dof_at_node > max(incident[k]))
        xs.append(bifs)
        ys.append(paths)
    xs = np.array(xs, float)
    ys = np.array(ys, float)
    coeffs = np.polyfit(xs, ys, 1)
    pred = np.polyval(coeffs, xs)
    ss_res = np.sum((ys - pred) ** 2)
    ss_tot = np.sum((ys - ys.mean()) ** 2)
    r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 0.0
    dt = time.perf_counter() - t0
    ok = r2 > 0.9
    _report("scaling-linearity", ok,
            f"bifurcations {xs.tolist()} paths {ys.tolist()} R^2={r2:.3f} "
            "(absolute ~1e3/100 figures deferred to the long-run command)", dt)
    assert r2 > 0.9


def test_closed_form_8r_reconciliation(link8_structure):
    t0 = time.perf_counter()
    out90 = closed_form_8r(link8_structure, math.pi / 2)
    ok_90 = np.allclose(out90["numeric"]["all_odd"], math.pi / 2, atol=1e-6)
    out150 = closed_form_8r(link8_structure, math.radians(150))
    printed15 = math.degrees(out150["printed"]["m15"])
    numeric15 = math.degrees(out150["numeric"]["m15"])
    report = {
        "gamma_drive_deg": 150.0,
        "printed_formula_deg": {"m15": printed15,
                                "m37": math.degrees(out150["printed"]["m37"])},
        "numeric_solver_deg": {"m15": numeric15,
                               "m37": math.degrees(out150["numeric"]["m37"])},
        "published_claim_deg": {"m15": 109.5, "m37": 70.5},
        "resolution": "numeric solver authoritative; see README and notes",
    }
    dt = time.perf_counter() - t0
    ok = ok_90 and out150["discrepancy"]["m15"] > 0
    _report("closed-form-8r", ok, json.dumps(report), dt)
    assert ok_90
    assert out150["discrepancy"]["m15"] > 0
    assert printed15 == pytest.approx(8.213, abs=0.01)


def test_inverse_design_me(canonical_structure, canonical_graph, rl1):
    t0 = time.perf_counter()
    db = build_database([canonical_category1()], graphs=[canonical_graph])
    me = forward_placement(canonical_structure, rl1["M_E"])
    me_key = canonicalize(me)
    from metamorph import voxelize_target
    exact = match_shape(db, voxelize_target([tuple(v) for v in me.int_centers()]),
                        top_k=1)[0]
    vox = [tuple(v) for v in me.int_centers()]
    vox[0] = (vox[0][0], vox[0][1], vox[0][2] + 2)
    perturbed = match_shape(db, voxelize_target(vox), top_k=1)[0]
    dt = time.perf_counter() - t0
    ok = (exact.errf == 0.0 and exact.exact_position and exact.node_key == me_key
          and perturbed.node_key == me_key and perturbed.errf > 0
          and not perturbed.exact_position and dt < 30.0)
    _report("inverse-design", ok,
            f"exact errf={exact.errf:.3g} perturbed errf={perturbed.errf:.4f}", dt)
    assert exact.errf == 0.0 and exact.exact_position
    assert exact.node_key == me_key
    assert perturbed.node_key == me_key and perturbed.errf > 0
    assert not perturbed.exact_position
    assert dt < 30.0


def _rl1_graph(structure, rl1, rl1_paths):
    """Minimal TransitionGraph holding the validated RL-1 cycle."""
    from metamorph.shapespace import _make_node
    graph = TransitionGraph(structure, None)
    keys = {}
    for name in RL1_ORDER:
        state = rl1[name]
        shape = forward_placement(structure, state)
        key = canonicalize(shape)
        keys[name] = key
        graph.nodes[key] = _make_node(structure, state, shape, key, 0)
    graph.root_key = keys["M_A"]
    for a, b, path in rl1_paths:
        b_eff = b if b in keys else "M_A"
        graph.edges.append(GraphEdge(
            keys[a], keys[b_eff], path.driven_hinges,
            tuple(float(path.end.gamma[h]) for h in path.driven_hinges),
            tuple(sorted(path.active_hinges)), path.path_dof))
    return graph, keys


def test_actuation_criteria(structure8, graph8, canonical_structure, rl1,
                            rl1_paths):
    t0 = time.perf_counter()
    lvl1_paths = paths_from_edges(graph8.edges, graph8)
    lvl1 = assign_actuators(lvl1_paths, universe=range(structure8.n_hinges))
    rl1_graph, keys = _rl1_graph(canonical_structure, rl1, rl1_paths)
    demo_paths = paths_from_edges(rl1_graph.edges, rl1_graph)
    lvl2 = assign_actuators(demo_paths,
                            universe=range(canonical_structure.n_hinges))
    schedule = compile_schedule(canonical_structure, rl1_graph.edges, rl1_graph,
                                omega_deg_s=30.0)
    concurrent_ok = max(schedule.concurrent_active) <= 3
    assignment = ActuatorAssignment(frozenset(h for _, h, _ in schedule.keyframes),
                                    frozenset(), [])
    stream = export_commands(schedule, assignment)
    frames = parse_commands(stream, assignment)
    roundtrip_ok = frames == [(t, h, a) for t, h, a in schedule.keyframes]
    stream2 = export_commands(schedule, assignment)
    dt = time.perf_counter() - t0
    ok = (len(lvl1.actuated) <= 5 and len(lvl2.actuated) <= 22
          and concurrent_ok and roundtrip_ok and stream == stream2)
    _report("actuation", ok,
            f"level-1 motors={len(lvl1.actuated)} (<=5), "
            f"level-2 demo motors={len(lvl2.actuated)} (<=22), "
            f"max concurrent={max(schedule.concurrent_active)} (<=3), "
            f"roundtrip bit-exact={roundtrip_ok}", dt)
    assert len(lvl1.actuated) <= 5
    assert len(lvl2.actuated) <= 22
    assert concurrent_ok
    assert roundtrip_ok and stream == stream2


def test_physical_results_not_reproduced():
    # load capacities, locomotion speeds, deployment wall-clock times and
    # meter-scale volume ratios are intentionally out of scope; the property
    # suites above stand in for them
    _report("physical-results-excluded", True, "out of scope by design")
