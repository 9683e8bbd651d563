"""Property tests for engine invariants that hold over whole input
domains rather than fixed examples."""

import math

import numpy as np
from hypothesis import given, settings, strategies as st

from metamorph import DesignSpec, build_structure, flip_link, hinge_transform
from metamorph.canonical import canonical_category1
from metamorph.kinematics import FoldState
from metamorph.shapespace import ShapeMatrix, canonicalize, detect_isl


@given(d=st.floats(0, 10, allow_nan=False),
       gamma=st.floats(0, 2 * math.pi - 1e-9))
def test_hinge_transform_is_rigid(d, gamma):
    T = hinge_transform(d, gamma)
    R = T[:3, :3]
    assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-12
    assert abs(np.linalg.det(R) - 1.0) < 1e-10
    assert np.linalg.norm(T @ np.linalg.inv(T) - np.eye(4)) < 1e-12


@given(i=st.integers(0, 3), j=st.integers(0, 3))
@settings(max_examples=20, deadline=None)
def test_flip_link_involution_commutes(i, j):
    d = canonical_category1()
    assert flip_link(flip_link(d, i), i) == d
    if i != j:
        assert flip_link(flip_link(d, i), j) == flip_link(flip_link(d, j), i)


@given(codes=st.tuples(*[st.integers(0, 3)] * 4))
@settings(max_examples=40, deadline=None)
def test_n4_designs_never_panic(codes):
    from metamorph.errors import MetamorphError
    try:
        stx = build_structure(DesignSpec((4,), codes, (False,)))
        assert stx.n_cubes == 4
    except MetamorphError:
        pass


@given(shift=st.tuples(st.integers(-6, 6), st.integers(-6, 6),
                       st.integers(-6, 6)))
@settings(max_examples=25, deadline=None)
def test_canonical_key_and_isl_translation_invariant(shift):
    base = np.array([[x, y, 1] for x in (-3, -1, 1, 3) for y in (-1, 1)], float)
    orients = np.tile(np.eye(3), (len(base), 1, 1))
    a = ShapeMatrix(base, orients, True)
    b = ShapeMatrix(base + 2 * np.array(shift), orients.copy(), True)
    assert canonicalize(a) == canonicalize(b)
    assert detect_isl(a) == detect_isl(b)


@given(deg=st.lists(st.floats(-720, 720, allow_nan=False), min_size=8,
                    max_size=8))
def test_fold_state_normalizes_to_domain(deg):
    state = FoldState.from_degrees(deg)
    assert np.all(state.gamma >= 0)
    assert np.all(state.gamma < 2 * math.pi)
