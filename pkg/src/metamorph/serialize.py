"""State and shape serialization (schema metamorph-state/1)."""

from __future__ import annotations

import json

import numpy as np

from .kinematics import FoldState
from .shapespace import ShapeMatrix

STATE_SCHEMA = "metamorph-state/1"


def state_to_dict(state: FoldState, shape: ShapeMatrix = None):
    doc = {
        "schema": STATE_SCHEMA,
        "gamma_deg": [round(float(v), 6) for v in state.degrees()],
    }
    if shape is not None:
        doc["shape"] = shape_to_dict(shape)
    return doc


def shape_to_dict(shape: ShapeMatrix):
    if shape.lattice:
        centers = shape.int_centers().tolist()
        orients = np.asarray(np.round(shape.orientations), int).tolist()
    else:
        centers = [[round(float(v), 6) for v in row] for row in shape.centers]
        orients = [[[round(float(v), 6) for v in row] for row in m]
                   for m in shape.orientations]
    return {"lattice": bool(shape.lattice), "centers": centers,
            "orientations": orients}


def state_from_dict(doc):
    if doc.get("schema") != STATE_SCHEMA:
        raise ValueError(f"unsupported state schema {doc.get('schema')!r}")
    return FoldState.from_degrees(doc["gamma_deg"])


def save_state(state, path, shape=None):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(state_to_dict(state, shape), f)


def load_state(path):
    with open(path, encoding="utf-8") as f:
        return state_from_dict(json.load(f))
