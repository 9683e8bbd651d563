"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 engine error. `--json` switches
machine-readable output; METAMORPH_TOL or --tol overrides the closure
tolerance (flag wins over the environment variable).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import canonical
from .errors import MetamorphError
from .kinematics import FoldState, forward_placement
from .model import build_structure, load_design, enumerate_designs
from .serialize import load_state, state_to_dict
from .shapespace import (build_transition_graph, graph_metrics, graph_to_dict,
                         find_path, export_mesh_obj, save_graph, canonicalize)
from .invdesign import (build_database, load_database, match_shape, save_database,
                        voxelize_target)
from .actuation import (assign_actuators, compile_schedule, export_commands,
                        paths_from_edges, schedule_to_dict)


def _design_from_arg(arg):
    if arg == "canonical":
        return canonical.canonical_category1()
    if arg.startswith("level1:"):
        return canonical.canonical_level1(int(arg.split(":", 1)[1]))
    return load_design(arg)


def _limits(args):
    lim = {}
    if getattr(args, "limits", None):
        lim.update(json.loads(args.limits))
    for k in ("max_nodes", "max_depth"):
        v = getattr(args, k, None)
        if v is not None:
            lim[k] = v
    return lim


def _emit(args, doc, human):
    if getattr(args, "json", False):
        print(json.dumps(doc))
    else:
        print(human)


def _resolve_key(graph, token):
    if token in graph.nodes:
        return token
    if token.startswith("#"):
        keys = sorted(graph.nodes)
        idx = int(token[1:])
        if 0 <= idx < len(keys):
            return keys[idx]
    matches = [k for k in graph.nodes if k.startswith(token)]
    if len(matches) == 1:
        return matches[0]
    names = rl1_key_map(graph)
    if token in names:
        return names[token]
    raise MetamorphError(f"unknown node key {token!r}")


def rl1_key_map(graph):
    """Canonical-key lookup for the named RL-1 nodes when present."""
    try:
        st = graph.structure
        states = canonical.rl1_states(st)
    except Exception:
        return {}
    out = {}
    for name, s in states.items():
        try:
            key = canonicalize(forward_placement(st, s))
        except Exception:
            continue
        if key in graph.nodes:
            out[name] = key
    return out


def cmd_design_validate(args):
    design = _design_from_arg(args.design)
    st = build_structure(design)
    doc = {"cubes": st.n_cubes, "hinges": st.n_hinges,
           "loops": [len(l) for l in st.loops]}
    _emit(args, doc, f"{st.n_cubes} cubes, {st.n_hinges} hinges")
    return 0


def cmd_design_enumerate(args):
    vary = tuple(v for v in args.vary.split(",") if v)
    gen = enumerate_designs(tuple(args.motifs), vary=vary,
                            symmetry_dedupe=args.dedupe)
    count = 0
    for d in gen:
        count += 1
        if args.limit and count >= args.limit:
            break
    _emit(args, {"count": count}, f"{count} designs")
    return 0


def cmd_graph_build(args):
    design = _design_from_arg(args.design)
    st = build_structure(design)
    graph = build_transition_graph(st, limits=_limits(args))
    if args.output:
        save_graph(graph, args.output)
    doc = graph_to_dict(graph)
    _emit(args, {"nodes": len(graph.nodes), "edges": len(graph.edges),
                 "truncated": graph.truncated},
          f"{len(graph.nodes)} nodes, {len(graph.edges)} edges"
          + (" (truncated)" if graph.truncated else ""))
    return 0


def _build_graph_for(args):
    design = _design_from_arg(args.design)
    st = build_structure(design)
    return build_transition_graph(st, limits=_limits(args))


def cmd_graph_metrics(args):
    graph = _build_graph_for(args)
    m = graph_metrics(graph, path_length_bound=args.bound)
    _emit(args, m, "\n".join(f"{k}: {v}" for k, v in m.items()))
    return 0


def cmd_graph_path(args):
    graph = _build_graph_for(args)
    a = _resolve_key(graph, getattr(args, "from"))
    b = _resolve_key(graph, args.to)
    edges = find_path(graph, a, b, objective=args.objective)
    doc = [{"a": e.key_a, "b": e.key_b, "driven": list(e.driven),
            "path_dof": e.path_dof} for e in edges]
    _emit(args, doc, f"{len(edges)} steps")
    return 0


def cmd_shape_place(args):
    design = _design_from_arg(args.design)
    st = build_structure(design)
    state = FoldState.flat(st) if args.flat else load_state(args.state)
    shape = forward_placement(st, state)
    doc = state_to_dict(state, shape)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            json.dump(doc, f)
    _emit(args, doc, f"{len(shape.centers)} cubes placed"
          + (" (lattice)" if shape.lattice else ""))
    return 0


def cmd_shape_export(args):
    design = _design_from_arg(args.design)
    st = build_structure(design)
    state = FoldState.flat(st) if args.flat else load_state(args.state)
    shape = forward_placement(st, state)
    export_mesh_obj(shape, args.output)
    _emit(args, {"output": args.output}, f"mesh written to {args.output}")
    return 0


def cmd_invdesign_build_db(args):
    designs = [_design_from_arg(d) for d in args.designs]
    db = build_database(designs, limits=_limits(args))
    save_database(db, args.output)
    _emit(args, {"rows": len(db.rows)}, f"{len(db.rows)} rows -> {args.output}")
    return 0


def cmd_invdesign_match(args):
    db = load_database(args.db)
    if args.target.endswith(".obj"):
        target = voxelize_target(args.target)
    else:
        with open(args.target, encoding="utf-8") as f:
            target = voxelize_target([tuple(v) for v in json.load(f)])
    results = match_shape(db, target, top_k=args.top)
    doc = [{"design": r.design_id, "node": r.node_key[:32], "errf": r.errf,
            "exact": r.exact_position} for r in results]
    _emit(args, doc, "\n".join(
        f"{r.design_id} errf={r.errf:.6f} exact={r.exact_position}" for r in results))
    return 0


def cmd_actuate_assign(args):
    graph = _build_graph_for(args)
    paths = paths_from_edges(graph.edges, graph)
    assignment = assign_actuators(paths)
    doc = {"actuated": sorted(assignment.actuated),
           "count": len(assignment.actuated)}
    _emit(args, doc, f"{len(assignment.actuated)} actuated hinges: "
          f"{sorted(assignment.actuated)}")
    return 0


def cmd_actuate_compile(args):
    design = _design_from_arg(args.design)
    st = build_structure(design)
    graph = build_transition_graph(st, limits=_limits(args))
    keys = [_resolve_key(graph, t) for t in args.nodes]
    edges = []
    for a, b in zip(keys, keys[1:]):
        seg = find_path(graph, a, b, objective="fewest_steps")
        edges.extend(seg)
    schedule = compile_schedule(st, edges, graph, args.omega)
    doc = schedule_to_dict(schedule)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            json.dump(doc, f)
    _emit(args, doc, f"{len(schedule.keyframes)} keyframes, "
          f"duration {schedule.duration:.2f} s")
    return 0


def cmd_actuate_export(args):
    with open(args.schedule, encoding="utf-8") as f:
        doc = json.load(f)
    from .actuation import MotorSchedule, ActuatorAssignment
    schedule = MotorSchedule([(t, h, a) for t, h, a in doc["keyframes"]],
                             doc["omega_deg_s"], doc.get("concurrent_active", []))
    hinges = sorted({h for _, h, _ in schedule.keyframes})
    assignment = ActuatorAssignment(frozenset(hinges), frozenset(), [])
    text = export_commands(schedule, assignment)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
        _emit(args, {"output": args.output}, f"commands written to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args):
    import uvicorn
    from .service import create_app
    app = create_app()
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="metamorph")
    p.add_argument("--tol", type=float, default=None,
                   help="closure tolerance override (beats METAMORPH_TOL)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for sampling ops")
    sub = p.add_subparsers(dest="cmd")

    pd = sub.add_parser("design").add_subparsers(dest="sub")
    v = pd.add_parser("validate")
    v.add_argument("design")
    v.set_defaults(fn=cmd_design_validate)
    e = pd.add_parser("enumerate")
    e.add_argument("--motifs", type=int, nargs="+", required=True)
    e.add_argument("--vary", default="placements")
    e.add_argument("--dedupe", action="store_true")
    e.add_argument("--limit", type=int, default=0)
    e.set_defaults(fn=cmd_design_enumerate)

    pg = sub.add_parser("graph").add_subparsers(dest="sub")
    for name, fn in (("build", cmd_graph_build), ("metrics", cmd_graph_metrics),
                     ("path", cmd_graph_path)):
        g = pg.add_parser(name)
        g.add_argument("design")
        g.add_argument("--limits")
        g.add_argument("--max-nodes", type=int, dest="max_nodes")
        g.add_argument("--max-depth", type=int, dest="max_depth")
        if name == "build":
            g.add_argument("-o", "--output")
        if name == "metrics":
            g.add_argument("--bound", type=int, default=6)
        if name == "path":
            g.add_argument("--from", required=True)
            g.add_argument("--to", required=True)
            g.add_argument("--objective", default="fewest_steps",
                           choices=["fewest_steps", "fewest_active_dof"])
        g.set_defaults(fn=fn)

    ps = sub.add_parser("shape").add_subparsers(dest="sub")
    for name, fn in (("place", cmd_shape_place), ("export", cmd_shape_export)):
        s = ps.add_parser(name)
        s.add_argument("design")
        s.add_argument("--state")
        s.add_argument("--flat", action="store_true")
        s.add_argument("-o", "--output", required=(name == "export"))
        s.set_defaults(fn=fn)

    pi = sub.add_parser("invdesign").add_subparsers(dest="sub")
    b = pi.add_parser("build-db")
    b.add_argument("designs", nargs="+")
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--limits")
    b.add_argument("--max-nodes", type=int, dest="max_nodes")
    b.add_argument("--max-depth", type=int, dest="max_depth")
    b.set_defaults(fn=cmd_invdesign_build_db)
    m = pi.add_parser("match")
    m.add_argument("db")
    m.add_argument("--target", required=True)
    m.add_argument("--top", type=int, default=5)
    m.set_defaults(fn=cmd_invdesign_match)

    pa = sub.add_parser("actuate").add_subparsers(dest="sub")
    a = pa.add_parser("assign")
    a.add_argument("design")
    a.add_argument("--limits")
    a.add_argument("--max-nodes", type=int, dest="max_nodes")
    a.add_argument("--max-depth", type=int, dest="max_depth")
    a.set_defaults(fn=cmd_actuate_assign)
    c = pa.add_parser("compile")
    c.add_argument("design")
    c.add_argument("--nodes", nargs="+", required=True)
    c.add_argument("--omega", type=float, default=30.0)
    c.add_argument("--limits")
    c.add_argument("--max-nodes", type=int, dest="max_nodes")
    c.add_argument("--max-depth", type=int, dest="max_depth")
    c.add_argument("-o", "--output")
    c.set_defaults(fn=cmd_actuate_compile)
    x = pa.add_parser("export")
    x.add_argument("schedule")
    x.add_argument("-o", "--output")
    x.set_defaults(fn=cmd_actuate_export)

    sv = sub.add_parser("serve")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8750)
    sv.set_defaults(fn=cmd_serve)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; the CLI contract is exit 1
        return 1 if exc.code else 0
    if not hasattr(args, "fn"):
        parser.print_usage(sys.stderr)
        return 1
    if args.tol is not None:
        os.environ["METAMORPH_TOL"] = str(args.tol)
    try:
        return args.fn(args)
    except MetamorphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
