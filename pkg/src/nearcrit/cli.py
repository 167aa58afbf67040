"""``nearcrit`` command line.

Exit codes: 0 on success, 2 on a violated precondition (bad arguments or input),
3 when a resource cap is hit.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import lab
from .decompose import decompose_extracted_giant, longest_2path
from .errors import IterationCapError, PreconditionError, ResourceCapError
from .graph import component_labels, largest_component, read_edge_list, write_edge_list
from .isoperimetry import CONNECTED_SET_LIMIT, conductance_profile
from .models import build_c1tilde, sample_gnp
from .rng import SUBCRITICAL, SUPERCRITICAL, ModelParams, RngStream, stream_index_for
from .walk import DEFAULT_DELTA, EXHAUSTIVE_LIMIT, STEP_CAP, LazyWalk, _mixing_times, mixing_candidates

EXIT_OK, EXIT_PRECONDITION, EXIT_RESOURCE = 0, 2, 3
# stream index namespaces for single-shot commands
_GENERATE, _PROFILE = 10, 11


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    p.add_argument("--threads", type=int, default=1, help="worker processes for replicate pools")
    p.add_argument("--out", type=Path, default=None, help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="tabular output format")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="nearcrit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample G(n,p) or the contiguous giant model")
    g.add_argument("--model", choices=lab.MODELS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--epsilon", type=float, required=True)
    g.add_argument("--regime", choices=(SUPERCRITICAL, SUBCRITICAL), default=SUPERCRITICAL)

    d = sub.add_parser("decompose", parents=[common], help="2-core, kernel and attached trees of the giant")
    d.add_argument("--in", dest="inp", type=Path, required=True)

    m = sub.add_parser("mix", parents=[common], help="worst-start TV and Cesaro mixing times")
    m.add_argument("--in", dest="inp", type=Path, required=True)
    m.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    m.add_argument("--strategy", choices=("heuristic", "exhaustive"), default="heuristic")

    p = sub.add_parser("profile", parents=[common], help="dyadic conductance profile")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--limit", type=int, default=CONNECTED_SET_LIMIT,
                   help="cap on enumerated connected sets in exact mode")

    s = sub.add_parser("sweep", parents=[common], help="parameter sweep, one record per replicate")
    s.add_argument("--n", type=int, nargs="+", required=True)
    s.add_argument("--epsilon", type=float, nargs="+", required=True)
    s.add_argument("--replicates", type=int, default=1)
    s.add_argument("--model", choices=lab.MODELS, default="c1")
    s.add_argument("--mixing", action="store_true", help="measure heuristic mixing times")
    s.add_argument("--no-cesaro", action="store_true", help="skip the Cesaro mixing time")
    s.add_argument("--delta", type=float, default=DEFAULT_DELTA)

    e = sub.add_parser("explore", parents=[common], help="subcritical component survey")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--epsilon", type=float, required=True)
    e.add_argument("--replicates", type=int, default=1)

    c = sub.add_parser("compare", parents=[common], help="G(n,p) giant vs contiguous model statistics")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--epsilon", type=float, required=True)
    c.add_argument("--replicates", type=int, default=10)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _tabular(rows: list[dict], columns: list[str], fmt: str | None, default: str) -> str:
    if (fmt or default) == "csv":
        return lab.rows_to_csv(rows, columns)
    return lab.to_json({"build": lab.build_tag(), "rows": rows})


def _read_connected(path: Path):
    g = read_edge_list(path)
    if len(component_labels(g)[1]) != 1:
        raise PreconditionError(f"{path}: graph is not connected")
    return g


def cmd_generate(a) -> dict:
    if a.out is None:
        raise PreconditionError("generate needs --out for the edge list")
    params = ModelParams(a.n, a.epsilon, a.regime)
    idx = stream_index_for(_GENERATE, lab.MODELS.index(a.model))
    stream = RngStream(a.seed, idx)
    parity = None
    if a.model == "c1":
        d = build_c1tilde(stream, params)
        graph = d.full
        parity = int(d.meta["parity_rejections"])
    else:
        graph = sample_gnp(stream, a.n, params.p)
        giant, _ = largest_component(graph)
        d = decompose_extracted_giant(giant)
    write_edge_list(graph, a.out)
    side = {
        "build": lab.build_tag(),
        "model": a.model,
        "regime": params.regime,
        "n": a.n,
        "epsilon": a.epsilon,
        "mu": params.mu,
        "lambda": params.lam,
        "seed": a.seed,
        "stream_index": idx,
        "vertex_count": graph.vertex_count,
        "edge_count": graph.edge_count,
        "full_size": d.full.vertex_count,
        "core_size": d.core.vertex_count,
        "kernel_size": d.kernel.vertex_count,
        "kernel_edges": d.kernel.edge_count,
        "loop_count": d.kernel.loop_count,
        "parity_rejections": parity,
    }
    _emit(lab.to_json(side), a.out.with_name(a.out.name + ".json"))
    return side


def cmd_decompose(a) -> dict:
    g = read_edge_list(a.inp)
    giant, _ = largest_component(g)
    d = decompose_extracted_giant(giant)
    s = d.summary()
    out = {
        "vertex_count": g.vertex_count,
        "giant_size": giant.vertex_count,
        "core_size": s["core_size"],
        "kernel_size": s["kernel_size"],
        "kernel_edges": s["kernel_edges"],
        "longest_2path": longest_2path(d),
        "tree_count": s["tree_count"],
        "max_tree": s["max_tree"],
        "disjoint_cycles": s["disjoint_cycles"],
    }
    _emit(lab.to_json(out), a.out)
    return out


def _scan(walk, starts, delta, cesaro, batch=64):
    """Mixing times over ``starts`` plus the number of law-evolution steps taken."""
    times, steps = [], 0
    for i in range(0, len(starts), batch):
        t = _mixing_times(walk, starts[i:i + batch], delta, cesaro, STEP_CAP)
        times.append(t)
        steps += int(t.max())
    return np.concatenate(times), steps


def cmd_mix(a) -> dict:
    g = _read_connected(a.inp)
    if not 0 < a.delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    if a.strategy == "exhaustive":
        if g.vertex_count > EXHAUSTIVE_LIMIT:
            raise PreconditionError(f"exhaustive strategy limited to {EXHAUSTIVE_LIMIT} vertices")
        starts = np.arange(g.vertex_count)
    else:
        starts = mixing_candidates(g, decompose_extracted_giant(g))
    walk = LazyWalk(g)
    tv, s1 = _scan(walk, starts, a.delta, False)
    ce, s2 = _scan(walk, starts, a.delta, True)
    i = int(np.argmax(tv))
    out = {
        "tmix": int(tv[i]),
        "cesaro": int(ce.max()),
        "argmax_vertex": int(starts[i]),
        "iterations": s1 + s2,
        "delta": a.delta,
        "strategy": a.strategy,
        "starts": len(starts),
    }
    _emit(lab.to_json(out), a.out)
    return out


def cmd_profile(a) -> dict:
    g = _read_connected(a.inp)
    stream = RngStream(a.seed, stream_index_for(_PROFILE)) if a.mode == "sampled" else None
    prof = conductance_profile(g, a.mode, stream, limit=a.limit)
    out = {"mode": a.mode, **prof.as_dict()}
    _emit(lab.to_json(out), a.out)
    return out


def cmd_sweep(a):
    points = [lab.GridPoint(n, eps, a.replicates, a.model) for n in a.n for eps in a.epsilon]
    records = lab.run_sweep(points, a.seed, mixing=a.mixing, delta=a.delta,
                            threads=a.threads, cesaro=not a.no_cesaro)
    if (a.format or "csv") == "csv":
        text = lab.records_to_csv(records)
    else:
        rows = [{k: v for k, v in dataclasses.asdict(r).items() if k != "runtime_ms"} for r in records]
        text = lab.to_json({"build": lab.build_tag(), "records": rows})
    _emit(text, a.out)
    if a.out is not None:
        manifest = {
            "build": lab.build_tag(),
            "command": "sweep",
            "master_seed": a.seed,
            "grid": [dataclasses.asdict(p) for p in points],
            "mixing": a.mixing,
            "delta": a.delta,
            "records": [
                {"stream_index": r.stream_index, "replicate": r.replicate, "n": r.n,
                 "epsilon": r.epsilon, "status": r.status, "runtime_ms": r.runtime_ms}
                for r in records
            ],
        }
        _emit(lab.to_json(manifest), a.out.with_name(a.out.name + ".manifest.json"))
    return records


def cmd_explore(a):
    rows = lab.subcritical_survey(a.n, a.epsilon, a.replicates, a.seed)
    columns = list(rows[0]) if rows else ["replicate"]
    _emit(_tabular(rows, columns, a.format, "csv"), a.out)
    return rows


def cmd_compare(a):
    table = lab.contiguity_compare(a.n, a.epsilon, a.replicates, a.seed)
    rows = table.as_records()
    _emit(_tabular(rows, list(rows[0]), a.format, "csv"), a.out)
    return table


COMMANDS = {
    "generate": cmd_generate,
    "decompose": cmd_decompose,
    "mix": cmd_mix,
    "profile": cmd_profile,
    "sweep": cmd_sweep,
    "explore": cmd_explore,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise PreconditionError("--seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise PreconditionError("--threads must be positive")
        COMMANDS[args.command](args)
    except (ResourceCapError, IterationCapError) as exc:
        print(f"nearcrit: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (PreconditionError, FileNotFoundError) as exc:
        print(f"nearcrit: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
