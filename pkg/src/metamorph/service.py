"""Session service: a bidirectional text-message channel (WebSocket)
speaking schema metamorph-proto/1.

One session per connection; messages are processed strictly in order.
Every request receives exactly one response (or error) echoing its
sequence number; apply_branch additionally streams animate_frames
notifications before its response. Engine errors never terminate the
session.
"""

from __future__ import annotations

import json
import math

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import canonical
from .errors import MetamorphError
from .kinematics import FoldState, forward_placement
from .model import build_structure, design_from_dict
from .serialize import shape_to_dict
from .shapespace import (canonicalize, enumerate_moves, export_mesh_obj,
                         build_transition_graph, graph_to_dict)
from .invdesign import build_database, match_shape, voxelize_target

PROTO_SCHEMA = "metamorph-proto/1"
FRAMES_PER_QUARTER_TURN = 10


class Session:
    def __init__(self):
        self.structure = None
        self.state = None
        self.history = []        # (previous FoldState,)
        self.branches = []       # [(Move, KinePath)]
        self._db = None

    # -- helpers ----------------------------------------------------------
    def _shape(self):
        return forward_placement(self.structure, self.state)

    def _state_payload(self):
        shape = self._shape()
        return {
            "node_key": canonicalize(shape),
            "gamma_deg": [round(float(v), 6) for v in self.state.degrees()],
            "shape": shape_to_dict(shape),
            "history_depth": len(self.history),
        }

    def _refresh_branches(self):
        self.branches = enumerate_moves(self.structure, self.state)

    def _branch_payload(self):
        out = []
        for i, (mv, path) in enumerate(self.branches):
            end_shape = forward_placement(self.structure, path.end)
            out.append({
                "branch_id": f"b{i}",
                "changed_hinges": list(mv.changed),
                "targets_deg": {str(h): round(math.degrees(v), 6)
                                for h, v in mv.targets.items()},
                "path_dof": path.path_dof,
                "to_key": canonicalize(end_shape),
            })
        return out

    # -- request handlers --------------------------------------------------
    def handle(self, msg, send):
        kind = msg.get("kind")
        seq = msg.get("seq")
        payload = msg.get("payload") or {}
        try:
            fn = getattr(self, f"on_{kind}", None)
            if fn is None:
                raise MetamorphError(f"unknown message kind {kind!r}")
            result_kind, result = fn(payload, seq, send)
            send({"seq": seq, "kind": result_kind, "payload": result})
        except MetamorphError as exc:
            send({"seq": seq, "kind": "error", "payload": {"message": str(exc)}})
        except (KeyError, ValueError, TypeError) as exc:
            send({"seq": seq, "kind": "error", "payload": {"message": str(exc)}})

    def on_hello(self, payload, seq, send):
        return "hello", {"schema": PROTO_SCHEMA, "version": 1}

    def on_load_design(self, payload, seq, send):
        spec = payload.get("design", "canonical")
        if spec == "canonical":
            design = canonical.canonical_category1()
        elif isinstance(spec, str) and spec.startswith("level1:"):
            design = canonical.canonical_level1(int(spec.split(":")[1]))
        else:
            design = design_from_dict(spec)
        self.structure = build_structure(design)
        self.state = FoldState.flat(self.structure)
        self.history = []
        self._db = None
        self._refresh_branches()
        out = self._state_payload()
        out["branches"] = self._branch_payload()
        return "state", out

    def _require_session(self):
        if self.structure is None:
            raise MetamorphError("no design loaded")

    def on_state(self, payload, seq, send):
        self._require_session()
        return "state", self._state_payload()

    def on_list_branches(self, payload, seq, send):
        self._require_session()
        return "list_branches", {"branches": self._branch_payload()}

    def on_apply_branch(self, payload, seq, send):
        self._require_session()
        bid = payload.get("branch_id")
        idx = None
        if isinstance(bid, str) and bid.startswith("b"):
            try:
                idx = int(bid[1:])
            except ValueError:
                idx = None
        if idx is None or not (0 <= idx < len(self.branches)):
            raise MetamorphError(f"unknown branch id {bid!r}")
        mv, path = self.branches[idx]
        span = max(abs(mv.targets[h] - self.state.gamma[h]) for h in mv.targets)
        n_frames = max(2, int(math.ceil(FRAMES_PER_QUARTER_TURN * span / (math.pi / 2))))
        stride = max(1, len(path.states) // n_frames)
        frames = path.states[::stride]
        if frames[-1] is not path.states[-1]:
            frames.append(path.states[-1])
        shapes = []
        for s in frames:
            shape = forward_placement(self.structure, s, tol=1e-6)
            shapes.append(shape_to_dict(shape))
        send({"seq": seq, "kind": "animate_frames",
              "payload": {"frames": shapes}})
        self.history.append(self.state)
        self.state = path.end
        self._refresh_branches()
        out = self._state_payload()
        out["branches"] = self._branch_payload()
        return "state", out

    def on_undo(self, payload, seq, send):
        self._require_session()
        if not self.history:
            raise MetamorphError("nothing to undo")
        self.state = self.history.pop()
        self._refresh_branches()
        out = self._state_payload()
        out["branches"] = self._branch_payload()
        return "state", out

    def on_inverse_query(self, payload, seq, send):
        self._require_session()
        voxels = payload.get("voxels")
        if not voxels:
            raise MetamorphError("inverse_query needs voxels")
        target = voxelize_target([tuple(v) for v in voxels])
        if self._db is None:
            limits = payload.get("limits") or {"max_nodes": 24, "max_depth": 2}
            self._db = build_database([self.structure.design], limits=limits)
        results = match_shape(self._db, target, top_k=payload.get("top_k", 3))
        return "inverse_query", {"results": [
            {"design": r.design_id, "node_key": r.node_key, "errf": r.errf,
             "exact_position": r.exact_position, "plan_length": len(r.plan)}
            for r in results]}

    def on_export(self, payload, seq, send):
        self._require_session()
        what = payload.get("what", "mesh")
        if what == "mesh":
            import io
            buf = io.StringIO()
            export_mesh_obj(self._shape(), buf)
            return "export", {"what": "mesh", "format": "obj",
                              "data": buf.getvalue()}
        if what == "graph":
            limits = payload.get("limits") or {"max_nodes": 16, "max_depth": 2}
            graph = build_transition_graph(self.structure, limits=limits)
            return "export", {"what": "graph", "data": graph_to_dict(graph)}
        raise MetamorphError(f"unknown export kind {what!r}")


def create_app():
    app = FastAPI(title="metamorph session service")

    @app.get("/health")
    def health():
        return {"ok": True, "schema": PROTO_SCHEMA}

    @app.websocket("/ws")
    async def ws(socket: WebSocket):
        await socket.accept()
        session = Session()
        outbox = []

        def send(doc):
            outbox.append(doc)

        try:
            while True:
                raw = await socket.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    msg = {"seq": None, "kind": "invalid"}
                session.handle(msg, send)
                while outbox:
                    await socket.send_text(json.dumps(outbox.pop(0)))
        except WebSocketDisconnect:
            return

    return app
