"""Experiment harness: sweeps, log-log fits, model comparison, subcritical survey, output."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .decompose import (
    EVENT_B,
    decompose_extracted_giant,
    detect_tree_event,
    explore_components,
    longest_2path,
)
from .errors import PreconditionError, ResourceCapError
from .graph import RootedTree, _concat_ranges, bfs_distances, component_labels, largest_component
from .models import build_c1tilde, sample_gnp
from .rng import SUBCRITICAL, SUPERCRITICAL, ModelParams, RngStream, stream_index_for
from .walk import DEFAULT_DELTA, mixing_candidates, worst_over

MODELS = ("gnp", "c1")
MIN_LAMBDA = 8.0
CONTIGUITY_STATS = ("giant_size", "core_size", "kernel_size", "kernel_edges", "longest_2path")
# stream-index namespaces, so different harness entry points never share streams
_SWEEP, _COMPARE, _SURVEY = 1, 2, 3


@lru_cache(maxsize=1)
def build_tag() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--tags", "--dirty"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


@dataclass(frozen=True)
class GridPoint:
    n: int
    epsilon: float
    replicates: int = 1
    model: str = "c1"
    regime: str = SUPERCRITICAL

    def __post_init__(self):
        if self.model not in MODELS:
            raise PreconditionError(f"unknown model {self.model!r}")
        if self.regime == SUPERCRITICAL and self.epsilon ** 3 * self.n < MIN_LAMBDA:
            raise PreconditionError(f"epsilon^3 n = {self.epsilon ** 3 * self.n:g} < {MIN_LAMBDA:g}")
        if self.model == "c1" and self.regime != SUPERCRITICAL:
            raise PreconditionError("the c1 model is supercritical only")


@dataclass
class SweepRecord:
    n: int
    epsilon: float
    lam: float
    seed: int
    model: str
    replicate: int
    stream_index: int
    giant_size: int | None = None
    core_size: int | None = None
    kernel_size: int | None = None
    kernel_edges: int | None = None
    longest_2path: int | None = None
    max_tree_size: int | None = None
    tmix_heuristic: int | None = None
    cesaro_heuristic: int | None = None
    runtime_ms: float | None = None
    status: str = "ok"


RECORD_COLUMNS = [f.name for f in dataclasses.fields(SweepRecord)]
CSV_COLUMNS = [c for c in RECORD_COLUMNS if c != "runtime_ms"] + ["build"]


def _giant(stream: RngStream, point: GridPoint):
    params = ModelParams(point.n, point.epsilon, point.regime)
    if point.model == "c1":
        return build_c1tilde(stream, params)
    g = sample_gnp(stream, point.n, params.p)
    giant, _ = largest_component(g)
    return decompose_extracted_giant(giant)


def run_replicate(point: GridPoint, grid_index: int, replicate: int, master_seed: int,
                  mixing: bool = False, delta: float = DEFAULT_DELTA, cesaro: bool = True) -> SweepRecord:
    idx = stream_index_for(_SWEEP, grid_index, replicate)
    rec = SweepRecord(point.n, point.epsilon, point.epsilon ** 3 * point.n, master_seed, point.model, replicate, idx)
    start = time.perf_counter()
    try:
        d = _giant(RngStream(master_seed, idx), point)
        rec.giant_size = d.full.vertex_count
        rec.core_size = d.core.vertex_count
        rec.kernel_size = d.kernel.vertex_count
        rec.kernel_edges = d.kernel.edge_count
        rec.longest_2path = longest_2path(d)
        sizes = d.tree_sizes
        rec.max_tree_size = int(sizes.max()) if sizes.size else d.full.vertex_count
        if mixing:
            cand = mixing_candidates(d.full, d)
            rec.tmix_heuristic = worst_over(d.full, cand, delta)[0]
            if cesaro:
                rec.cesaro_heuristic = worst_over(d.full, cand, delta, cesaro=True)[0]
    except (ResourceCapError, PreconditionError) as exc:
        rec.status = f"error: {type(exc).__name__}: {exc}"
    rec.runtime_ms = (time.perf_counter() - start) * 1e3
    return rec


def _run_task(args):
    return run_replicate(*args)


def run_sweep(points, master_seed: int, mixing: bool = False, delta: float = DEFAULT_DELTA,
              threads: int = 1, cesaro: bool = True) -> list[SweepRecord]:
    """One record per (grid point, replicate), in grid order, deterministic in ``master_seed``.

    With ``mixing`` the heuristic worst-start TV mixing time is measured, plus the Cesaro
    one when ``cesaro`` is set.
    """
    tasks = [(p, gi, r, master_seed, mixing, delta, cesaro) for gi, p in enumerate(points) for r in range(p.replicates)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_run_task, tasks))
    return [_run_task(t) for t in tasks]


def fit_loglog(points) -> tuple[float, float, float]:
    """Least squares of ``log y`` on ``log x``; returns ``(slope, intercept, r^2)``."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 3:
        raise PreconditionError("need at least three points")
    if np.any(pts <= 0):
        raise PreconditionError("log-log fit needs positive coordinates")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise PreconditionError("x values are all equal")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def mixing_scale(n: int, epsilon: float) -> float:
    """``eps^-3 log^2(eps^3 n)``."""
    return epsilon ** -3 * math.log(epsilon ** 3 * n) ** 2


def model_expectations(n: int, epsilon: float) -> dict:
    """First-order means of the contiguous model's structure statistics.

    Uses the centre ``Lambda0 = 1 + eps - mu`` of the degree-rate law: with
    ``D ~ Poisson(Lambda0)``, the kernel has ``n P(D >= 3)`` vertices and
    ``n E[D; D >= 3] / 2`` edges, each edge expands into ``1/(1-mu)`` core edges on
    average, and each core vertex carries a tree of mean size ``1/(1-mu)``.
    """
    from scipy.stats import poisson

    params = ModelParams(n, epsilon)
    mu, lam0 = params.mu, 1 + epsilon - params.mu
    kernel = n * float(poisson.sf(2, lam0))
    kernel_edges = n * lam0 * float(poisson.sf(1, lam0)) / 2
    core_edges = kernel_edges / (1 - mu)
    core = kernel + kernel_edges * (1 / (1 - mu) - 1)
    return {
        "Lambda0": lam0,
        "mu": mu,
        "kernel_size": kernel,
        "kernel_edges": kernel_edges,
        "N3": n * float(poisson.pmf(3, lam0)),
        "core_size": core,
        "core_edges": core_edges,
        "giant_size": core / (1 - mu),
        "mean_path_length": 1 / (1 - mu),
    }


@dataclass
class ContiguityTable:
    n: int
    epsilon: float
    replicates: int
    models: tuple
    rows: dict = field(default_factory=dict)

    def ratios(self) -> dict:
        return {k: v["ratio"] for k, v in self.rows.items()}

    def as_records(self) -> list[dict]:
        return [{"statistic": k, **v} for k, v in self.rows.items()]


def contiguity_compare(n: int, epsilon: float, replicates: int, master_seed: int,
                       regime: str = SUPERCRITICAL, models=("gnp", "c1")) -> ContiguityTable:
    """Replicate means/sds of the five structure statistics under two models, plus mean ratios
    (first model over second).  Replicate ``r`` of either model uses the same stream key."""
    if regime != SUPERCRITICAL:
        raise PreconditionError("contiguity comparison is defined in the supercritical regime")
    if replicates < 1:
        raise PreconditionError("need at least one replicate")
    values = {m: {s: [] for s in CONTIGUITY_STATS} for m in models}
    for model in dict.fromkeys(models):
        point = GridPoint(n, epsilon, replicates, model)
        for r in range(replicates):
            d = _giant(RngStream(master_seed, stream_index_for(_COMPARE, r)), point)
            stats = {
                "giant_size": d.full.vertex_count, "core_size": d.core.vertex_count,
                "kernel_size": d.kernel.vertex_count, "kernel_edges": d.kernel.edge_count,
                "longest_2path": longest_2path(d),
            }
            for s in CONTIGUITY_STATS:
                values[model][s].append(stats[s])
    a, b = models
    table = ContiguityTable(n, epsilon, replicates, tuple(models))
    for s in CONTIGUITY_STATS:
        xa, xb = np.asarray(values[a][s], float), np.asarray(values[b][s], float)
        table.rows[s] = {
            f"{a}_mean": float(xa.mean()), f"{a}_sd": float(xa.std(ddof=1)) if len(xa) > 1 else 0.0,
            f"{b}_mean": float(xb.mean()), f"{b}_sd": float(xb.std(ddof=1)) if len(xb) > 1 else 0.0,
            "ratio": float(xa.mean() / xb.mean()) if xb.mean() else math.nan,
        }
    return table


def survey_radius_and_mass(n: int, epsilon: float) -> tuple[int, float]:
    """``r = ceil(eps^-1 log(eps^3 n) / 20)`` and ``s = eps^-2 log(eps^3 n) / 64``."""
    L = math.log(epsilon ** 3 * n)
    return math.ceil(L / (20 * epsilon)), L / (64 * epsilon ** 2)


def component_diameters(g) -> tuple[np.ndarray, np.ndarray]:
    """Per-component double-sweep diameter (exact on trees, a lower bound otherwise).

    Both sweeps are single multi-source BFS runs, one source per component.
    Returns ``(labels, diameters)`` with components labelled largest first.
    """
    labels, sizes = component_labels(g)
    k = len(sizes)

    def farthest(dist):
        order = np.lexsort((-dist, labels))
        first = np.searchsorted(labels[order], np.arange(k))
        return order[first]

    seeds = farthest(np.zeros(g.vertex_count, dtype=np.int64))
    d1 = bfs_distances(g, seeds)
    far = farthest(d1)
    d2 = bfs_distances(g, far)
    diam = np.zeros(k, dtype=np.int64)
    np.maximum.at(diam, labels, d2)
    return labels, diam


def _component_tree(g, members: np.ndarray) -> RootedTree:
    """BFS tree of a tree component, rooted at its smallest vertex."""
    local = {int(v): i for i, v in enumerate(members)}
    parent = np.full(len(members), -2, dtype=np.int64)
    parent[0] = -1
    frontier = members[:1]
    while frontier.size:
        idx = _concat_ranges(g.indptr[frontier], g.degrees[frontier])
        src = np.repeat(frontier, g.degrees[frontier])
        nxt = []
        for s, t in zip(src.tolist(), g.nbr[idx].tolist()):
            lt = local[t]
            if parent[lt] == -2:
                parent[lt] = local[s]
                nxt.append(t)
        frontier = np.asarray(nxt, dtype=np.int64)
    return RootedTree(parent)


def subcritical_survey(n: int, epsilon: float, replicates: int, master_seed: int,
                       detect_b: bool = True) -> list[dict]:
    """Per replicate: exploration component count at budget ``eps n``, and on a full
    G(n, (1-eps)/n) sample the largest component, the largest diameter and whether some
    tree component carries the two-heavy-subtrees event B(r, s)."""
    ModelParams(n, epsilon, SUBCRITICAL)
    r, s = survey_radius_and_mass(n, epsilon)
    s_int = math.ceil(s)
    out = []
    for rep in range(replicates):
        stream = RngStream(master_seed, stream_index_for(_SURVEY, rep))
        sizes, exposed = explore_components(stream.child(0), n, epsilon, int(epsilon * n))
        g = sample_gnp(stream.child(1), n, (1 - epsilon) / n)
        labels, diam = component_diameters(g)
        comp_sizes = np.bincount(labels)
        b_hit = False
        if detect_b:
            edge_count = np.bincount(labels[g.edges[:, 0]], minlength=len(comp_sizes))
            order = np.argsort(labels, kind="stable")
            ptr = np.concatenate([[0], np.cumsum(comp_sizes)])
            for c in np.flatnonzero((edge_count == comp_sizes - 1) & (comp_sizes >= 2 * s_int)):
                tree = _component_tree(g, order[ptr[c]:ptr[c + 1]])
                if detect_tree_event(tree, r, s_int, EVENT_B):
                    b_hit = True
                    break
        out.append({
            "replicate": rep,
            "n": n,
            "epsilon": epsilon,
            "lam": epsilon ** 3 * n,
            "components_explored": len(sizes),
            "exposed": exposed,
            "mean_explored_size": float(np.mean(sizes)) if sizes else 0.0,
            "max_component": int(comp_sizes.max()),
            "max_diameter": int(diam.max()),
            "component_count": int(len(comp_sizes)),
            "r": r,
            "s": s_int,
            "b_event": b_hit,
            "size_bound": 10 * epsilon ** -2 * math.log(epsilon ** 3 * n),
        })
    return out


# -- serialization -------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def records_to_csv(records: list[SweepRecord]) -> str:
    """Sweep records as CSV; wall-clock runtime is left out so reruns are byte-identical."""
    tag = build_tag()
    return rows_to_csv([{**dataclasses.asdict(r), "build": tag} for r in records], CSV_COLUMNS)


def to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"not serializable: {type(o).__name__}")

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def load_schema(name: str) -> dict:
    """Published JSON schema for a CLI output: generate, decompose, mix, profile or manifest."""
    path = Path(__file__).resolve().parent / "schemas" / f"{name}.schema.json"
    if not path.exists():
        raise PreconditionError(f"no schema named {name!r}")
    return json.loads(path.read_text())
