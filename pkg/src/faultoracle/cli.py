"""faultoracle command line: build, fuzz, bench, query.

Every subcommand writes JSON Lines (sorted keys). Wall-clock numbers live under
a nested ``timing`` key so reruns can be diffed after dropping it.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from . import snapshot
from .det_oracle import CapacityError, DetOracle
from .graph_core import Graph, component_labels, generate_graph, load_graph, parse_generator_spec
from .hierarchy import build_hierarchy
from .mc_edge_oracle import MCEdgeOracle
from .mc_vertex_oracle import MCVertexOracle

SCHEMA = 1
MC_GATE = 0.01
STRUCTURES = ("det", "mc-vertex", "mc-edge")


def load_source(src: str, seed: int) -> Graph:
    if src.startswith("gen:"):
        model, params = parse_generator_spec(src[4:])
        gseed = params.pop("seed", seed)
        return generate_graph(model, params, gseed)
    return load_graph(Path(src).read_text())


def build_oracle(structure: str, g: Graph, cfg: dict, levels=None):
    h = build_hierarchy(g, levels) if structure != "mc-edge" else None
    if structure == "det":
        return DetOracle(g, cfg["dstar"], h)
    if structure == "mc-vertex":
        return MCVertexOracle(g, seed=cfg["seed"], c=cfg["c"], hierarchy=h, eager=cfg["eager"])
    return MCEdgeOracle(g, seed=cfg["seed"], c=cfg["c"], strict=cfg["strict"])


def snapshot_bytes(structure: str, o, cfg: dict) -> bytes:
    levels = o.h.levels if structure != "mc-edge" else None
    bsets = o.bsets.sampled if structure == "mc-vertex" else None
    return snapshot.encode(structure, o.g, cfg, levels, bsets)


def oracle_from_snapshot(buf: bytes):
    data = snapshot.decode(buf)
    cfg = data["params"]
    o = build_oracle(data["structure"], data["graph"], cfg, data["levels"] or None)
    if data["structure"] == "mc-vertex" and [list(b) for b in o.bsets.sampled] != data["bsets"]:
        raise snapshot.SnapshotError("stored B-sets do not match the rebuilt ones")
    return data["structure"], o, cfg


def _config(args) -> dict:
    if args.c < 1:
        raise SystemExit("error: --c must be >= 1")
    if args.structure == "det" and args.dstar < 1:
        raise SystemExit("error: --dstar must be >= 1 for det")
    return {"dstar": args.dstar, "seed": args.seed, "c": args.c,
            "strict": args.strict_space, "eager": args.eager_sketch}


def build_stats(structure: str, o) -> dict:
    meta = dict(o.meta) if hasattr(o, "meta") else {}
    if structure == "mc-edge":
        meta = {"label_bits": o.bits, "rows": o.sampler.rows, "cols": o.sampler.cols, "probe_cap": o.probe_cap}
    return meta


class _Emitter:
    def __init__(self, out: str | None):
        self.fh = open(out, "w") if out else sys.stdout

    def __call__(self, rec: dict):
        rec = {"schema": SCHEMA, **rec}
        self.fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()
        else:
            self.fh.flush()


def sample_failures(rng: random.Random, structure: str, g: Graph, d: int) -> list:
    if structure == "mc-edge":
        return sorted(rng.sample(g.edges, min(d, g.m)))
    return sorted(rng.sample(range(g.n), min(d, g.n)))


def run_trial(structure: str, o, g: Graph, D: list, rng: random.Random, queries: int) -> dict:
    """One delete + query batch, compared against BFS labels."""
    rec = {"structure": structure, "n": g.n, "m": g.m, "d": len(D)}
    t0 = time.perf_counter()
    try:
        s = o.delete(D)
    except CapacityError as exc:
        rec.update(capacity_error=str(exc), queries=0, wrong=0, agree=True, detected_failure=False)
        rec["timing"] = {"update_s": time.perf_counter() - t0}
        return rec
    t_update = time.perf_counter() - t0
    if structure == "mc-edge":
        truth = component_labels(g, (), D)
        alive = list(range(g.n))
    else:
        truth = component_labels(g, D, ())
        dead = set(D)
        alive = [v for v in range(g.n) if v not in dead]
    failed_session = getattr(s, "status", "ok") == "detected-failure"
    wrong = 0
    asked = 0
    t1 = time.perf_counter()
    if alive:
        for _ in range(queries):
            u, v = rng.choice(alive), rng.choice(alive)
            asked += 1
            want = truth[u] == truth[v]
            if failed_session:
                continue  # answered by BFS, charged as an error below
            if s.query(u, v) != want:
                wrong += 1
    t_query = time.perf_counter() - t1
    rec.update(s.stats)
    rec.update(queries=asked, wrong=wrong, agree=wrong == 0, detected_failure=failed_session,
               capacity_error=None)
    rec["timing"] = {"update_s": t_update, "query_s": t_query}
    return rec


def cmd_build(args) -> int:
    cfg = _config(args)
    g = load_source(args.graph, args.seed)
    t0 = time.perf_counter()
    o = build_oracle(args.structure, g, cfg)
    t_build = time.perf_counter() - t0
    buf = snapshot_bytes(args.structure, o, cfg)
    out = args.out or "oracle.flto"
    Path(out).write_bytes(buf)
    rec = {"kind": "build", "structure": args.structure, "n": g.n, "m": g.m, "seed": args.seed,
           "c": args.c, "dstar": args.dstar, "snapshot": out, "bytes": len(buf),
           "digest": snapshot.digest(buf), "stats": build_stats(args.structure, o),
           "timing": {"build_s": t_build}}
    emit = _Emitter(None)
    emit(rec)
    emit.close()
    return 0


def cmd_fuzz(args) -> int:
    cfg = _config(args)
    g = load_source(args.graph, args.seed)
    o = build_oracle(args.structure, g, cfg)
    rng = random.Random(args.seed)
    emit = _Emitter(args.out)
    dmax = args.dmax if args.dmax is not None else (args.dstar if args.structure == "det" else 8)
    total = wrong = charged = mismatched = 0
    for trial in range(args.trials):
        d = rng.randint(0, dmax)
        D = sample_failures(rng, args.structure, g, d)
        rec = run_trial(args.structure, o, g, D, rng, args.queries)
        rec.update(kind="trial", trial=trial)
        emit(rec)
        total += rec["queries"]
        wrong += rec["wrong"]
        mismatched += rec["wrong"] > 0
        charged += rec["wrong"] + (rec["queries"] if rec["detected_failure"] else 0)
    rate = charged / total if total else 0.0
    if args.structure == "det":
        ok = mismatched == 0
    else:
        ok = rate <= MC_GATE
    emit({"kind": "summary", "structure": args.structure, "trials": args.trials, "queries": total,
          "wrong": wrong, "error_rate": rate, "gate": MC_GATE, "pass": ok})
    emit.close()
    return 0 if ok else 1


def cmd_bench(args) -> int:
    cfg = _config(args)
    g = load_source(args.graph, args.seed)
    o = build_oracle(args.structure, g, cfg)
    rng = random.Random(args.seed)
    emit = _Emitter(args.out)
    dmax = args.dmax if args.dmax is not None else (args.dstar if args.structure == "det" else 32)
    sweep = [0]
    d = 1
    while d <= dmax:
        sweep.append(d)
        d *= 2
    for d in sweep:
        sums: dict = {}
        for trial in range(args.trials):
            D = sample_failures(rng, args.structure, g, d)
            rec = run_trial(args.structure, o, g, D, rng, args.queries)
            rec.update(kind="trial", trial=trial)
            emit(rec)
            for k, v in rec.items():
                if isinstance(v, int) and not isinstance(v, bool) and k not in ("n", "m", "trial"):
                    sums[k] = sums.get(k, 0) + v
        mean = {k: v / max(args.trials, 1) for k, v in sorted(sums.items())}
        emit({"kind": "sweep", "structure": args.structure, "n": g.n, "m": g.m, "d": d,
              "trials": args.trials, "mean": mean})
    emit.close()
    return 0


def _pairs(text: str) -> list:
    out = []
    for item in filter(None, text.split(",")):
        u, _, v = item.partition("-")
        out.append((int(u), int(v)))
    return out


def cmd_query(args) -> int:
    structure, o, _ = oracle_from_snapshot(Path(args.snapshot).read_bytes())
    if structure == "mc-edge":
        D = _pairs(args.fail or "")
    else:
        D = [int(x) for x in filter(None, (args.fail or "").split(","))]
    emit = _Emitter(args.out)
    try:
        s = o.delete(D)
    except CapacityError as exc:
        emit({"kind": "query", "structure": structure, "capacity_error": str(exc)})
        emit.close()
        return 2
    status = getattr(s, "status", "ok")
    for u, v in _pairs(args.pairs or ""):
        if status == "detected-failure":
            lab = component_labels(o.g, (), D) if structure == "mc-edge" else component_labels(o.g, D, ())
            ans, via = lab[u] == lab[v], "bfs"
        else:
            ans, via = s.query(u, v), "oracle"
        emit({"kind": "query", "structure": structure, "u": u, "v": v, "connected": ans, "via": via})
    emit.close()
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="faultoracle", description="Connectivity oracles under vertex or edge failures.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--structure", choices=STRUCTURES, default="det")
        sp.add_argument("--graph", required=True, help="edge-list file or gen:model:k=v,...")
        sp.add_argument("--dstar", type=int, default=8)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--c", type=int, default=4)
        sp.add_argument("--out")
        sp.add_argument("--strict-space", action="store_true", help="mc-edge: validate names without the inverse map")
        sp.add_argument("--eager-sketch", action="store_true", help="mc-vertex: materialize all columns up front")

    b = sub.add_parser("build", help="build an oracle and write a snapshot")
    common(b)
    b.set_defaults(func=cmd_build)
    for name, func, trials in (("fuzz", cmd_fuzz, 100), ("bench", cmd_bench, 20)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--trials", type=int, default=trials)
        sp.add_argument("--dmax", type=int)
        sp.add_argument("--queries", type=int, default=10)
        sp.set_defaults(func=func)
    q = sub.add_parser("query", help="delete a failure set from a snapshot and answer pairs")
    q.add_argument("snapshot")
    q.add_argument("--fail", help="vertices 1,2,3 or edges 1-2,3-4")
    q.add_argument("--pairs", help="query pairs u-v,u-v")
    q.add_argument("--out")
    q.set_defaults(func=cmd_query)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
