"""Inverse design: voxelization, database, matching, plans."""

import numpy as np
import pytest

from metamorph import (build_database, forward_placement, match_shape,
                       plan_reconfiguration, voxelize_target, save_database,
                       load_database, canonicalize, FoldState, continue_path)
from metamorph.errors import EmptyDatabase, EmptyTarget, StaleResult
from metamorph.invdesign import TargetShape, ShapeDatabase
from metamorph.canonical import canonical_category1


@pytest.fixture(scope="module")
def rl1_db(canonical_structure, canonical_graph):
    return build_database([canonical_category1()], graphs=[canonical_graph])


def test_voxelize_passthrough():
    t = voxelize_target([(1, 1, 1), (1, 3, 1)])
    assert t.voxels == {(1, 1, 1), (1, 3, 1)}


def test_voxelize_snaps_to_odd():
    t = voxelize_target([(1.2, 2.9, 1.0)])
    assert t.voxels == {(1, 3, 1)}


def test_voxelize_box_mesh():
    # an axis-aligned unit box spanning [0,2]^3 covers exactly one cell
    v = [np.array(p, float) for p in
         [(0, 0, 0), (2, 0, 0), (2, 2, 0), (0, 2, 0),
          (0, 0, 2), (2, 0, 2), (2, 2, 2), (0, 2, 2)]]
    quads = [(0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
             (2, 3, 7, 6), (0, 4, 7, 3), (1, 2, 6, 5)]
    tris = []
    for a, b, c, d in quads:
        tris.append((v[a], v[b], v[c]))
        tris.append((v[a], v[c], v[d]))
    t = voxelize_target(tris)
    assert t.voxels == {(1, 1, 1)}


def test_voxelize_empty_rejected():
    with pytest.raises(EmptyTarget):
        TargetShape(frozenset())


def test_database_rows_include_rl1(rl1_db, canonical_structure, rl1):
    keys = {r.node_key for r in rl1_db.rows}
    for name, state in rl1.items():
        k = canonicalize(forward_placement(canonical_structure, state))
        assert k in keys, name


def test_empty_designs_empty_db():
    db = build_database([])
    assert db.rows == []
    with pytest.raises(EmptyDatabase):
        match_shape(db, voxelize_target([(1, 1, 1)]))


def test_match_self_is_exact(rl1_db, canonical_structure, rl1):
    me = forward_placement(canonical_structure, rl1["M_E"])
    target = voxelize_target([tuple(v) for v in me.int_centers()])
    results = match_shape(rl1_db, target, top_k=3)
    top = results[0]
    assert top.errf == pytest.approx(0.0, abs=1e-12)
    assert top.exact_position
    assert top.node_key == canonicalize(me)


def test_match_perturbed_prefers_me(rl1_db, canonical_structure, rl1):
    me = forward_placement(canonical_structure, rl1["M_E"])
    vox = [tuple(v) for v in me.int_centers()]
    vox[0] = (vox[0][0], vox[0][1], vox[0][2] + 2)
    results = match_shape(rl1_db, voxelize_target(vox), top_k=3)
    top = results[0]
    assert top.node_key == canonicalize(me)
    assert top.errf > 0
    assert not top.exact_position


def test_errf_bounds_and_determinism(rl1_db):
    rng = np.random.default_rng(3)
    for _ in range(5):
        vox = [tuple(2 * v + 1) for v in rng.integers(-4, 4, size=(12, 3))]
        r1 = match_shape(rl1_db, voxelize_target(vox), top_k=10)
        r2 = match_shape(rl1_db, voxelize_target(vox), top_k=10)
        assert [(m.design_id, m.node_key, m.errf) for m in r1] == \
               [(m.design_id, m.node_key, m.errf) for m in r2]
        assert all(0.0 <= m.errf <= 1.0 for m in r1)
        assert [m.errf for m in r1] == sorted(m.errf for m in r1)


def test_ranking_invariant_under_uniform_scaling(rl1_db, canonical_structure, rl1):
    me = forward_placement(canonical_structure, rl1["M_E"])
    vox = [tuple(v) for v in me.int_centers()]
    base = match_shape(rl1_db, voxelize_target(vox), top_k=1)[0]
    scaled_rows = [type(r)(r.design_id, r.design, r.node_key,
                           r.centers * 3, r.path_from_root, r.partial)
                   for r in rl1_db.rows]
    db3 = ShapeDatabase(scaled_rows)
    scaled_target = voxelize_target([tuple(3 * np.array(v)) for v in vox])
    top3 = match_shape(db3, scaled_target, top_k=1)[0]
    assert (top3.design_id, top3.node_key) == (base.design_id, base.node_key)


def test_plan_replays_to_matched_node(rl1_db, canonical_structure, rl1):
    me = forward_placement(canonical_structure, rl1["M_E"])
    target = voxelize_target([tuple(v) for v in me.int_centers()])
    top = match_shape(rl1_db, target, top_k=1)[0]
    plan = plan_reconfiguration(rl1_db, top)
    assert plan
    state = FoldState.flat(canonical_structure)
    import math
    for driven, targets_deg, full_deg in plan:
        sched = {h: math.radians(t) for h, t in zip(driven, targets_deg)}
        path = continue_path(canonical_structure, state, sched,
                             to=FoldState.from_degrees(full_deg))
        state = path.end
    final = forward_placement(canonical_structure, state)
    assert canonicalize(final) == top.node_key


def test_plan_for_root_is_empty(rl1_db, canonical_structure, rl1):
    ma = forward_placement(canonical_structure, rl1["M_A"])
    target = voxelize_target([tuple(v) for v in ma.int_centers()])
    top = match_shape(rl1_db, target, top_k=1)[0]
    assert top.node_key == canonicalize(ma)
    assert plan_reconfiguration(rl1_db, top) == []


def test_stale_result(rl1_db):
    target = voxelize_target([(1, 1, 1)])
    top = match_shape(rl1_db, target, top_k=1)[0]
    rebuilt = ShapeDatabase(list(rl1_db.rows))
    with pytest.raises(StaleResult):
        plan_reconfiguration(rebuilt, top)


def test_database_persistence_roundtrip(rl1_db, tmp_path):
    save_database(rl1_db, tmp_path / "db")
    loaded = load_database(tmp_path / "db")
    assert loaded.generation == rl1_db.generation
    assert len(loaded.rows) == len(rl1_db.rows)
    a = sorted((r.design_id, r.node_key) for r in rl1_db.rows)
    b = sorted((r.design_id, r.node_key) for r in loaded.rows)
    assert a == b


def test_two_designs_distinct_rows(canonical_structure):
    from metamorph import flip_link
    from metamorph.shapespace import build_transition_graph
    from metamorph import build_structure
    d1 = canonical_category1()
    d2 = flip_link(d1, 0)
    limits = {"max_nodes": 3, "max_depth": 1, "max_candidates": 4}
    db = build_database([d1, d2], limits=limits)
    ids = {r.design_id for r in db.rows}
    assert ids == {"design-0000", "design-0001"}
