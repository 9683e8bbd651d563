"""Shared fixtures. The expensive artifacts (canonical structure, replayed
RL-1 paths, transition graphs) are built once per session."""

import math

import numpy as np
import pytest

from metamorph import build_structure, continue_path
from metamorph.canonical import (canonical_category1, canonical_level1,
                                 canonical_link_8r, rl1_states, rl1_edges,
                                 RL1_ORDER)
from metamorph.shapespace import build_transition_graph


@pytest.fixture(scope="session")
def canonical_structure():
    return build_structure(canonical_category1())


@pytest.fixture(scope="session")
def rl1(canonical_structure):
    return rl1_states(canonical_structure)


@pytest.fixture(scope="session")
def structure8():
    return build_structure(canonical_level1(8))


@pytest.fixture(scope="session")
def structure6():
    return build_structure(canonical_level1(6))


@pytest.fixture(scope="session")
def structure4():
    return build_structure(canonical_level1(4))


@pytest.fixture(scope="session")
def link8_structure():
    return build_structure(canonical_link_8r())


@pytest.fixture(scope="session")
def rl1_paths(canonical_structure, rl1):
    """Replayed RL-1: list of (from_name, to_name, KinePath)."""
    st = canonical_structure
    out = []
    cur = rl1["M_A"]
    for a, b, driven in rl1_edges(st):
        target = rl1[b] if b in rl1 else rl1["M_A"]
        sched = {h: float(target.gamma[h]) for h in driven}
        path = continue_path(st, cur, sched, to=target)
        out.append((a, b, path))
        cur = path.end
    return out


@pytest.fixture(scope="session")
def graph8(structure8):
    """Full transition graph of the standalone 8R (no candidate caps)."""
    return build_transition_graph(
        structure8, limits={"max_nodes": 256, "max_depth": 16})


@pytest.fixture(scope="session")
def canonical_graph(canonical_structure, rl1):
    """Canonical level-2 graph covering RL-1 (seeded corridor)."""
    seeds = [rl1[n] for n in RL1_ORDER[1:]]
    return build_transition_graph(
        canonical_structure,
        limits={"max_nodes": 24, "max_depth": 2, "max_candidates": 26},
        seeds=seeds)
