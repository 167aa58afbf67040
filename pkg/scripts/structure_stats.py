"""Kernel / core / giant sizes of the contiguous model against its exact first-order means.

    python3 scripts/structure_stats.py --n 1000000 --epsilon 0.1 --replicates 10
"""
import argparse
import math

import numpy as np

from nearcrit.decompose import longest_2path
from nearcrit.lab import model_expectations
from nearcrit.models import build_c1tilde
from nearcrit.rng import ModelParams, RngStream


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10 ** 6)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--seed", type=int, default=2024)
    a = ap.parse_args()

    params = ModelParams(a.n, a.epsilon)
    lam, eps, n = params.lam, a.epsilon, a.n
    draws = [build_c1tilde(RngStream(a.seed, r), params) for r in range(a.replicates)]
    exp = model_expectations(n, eps)
    rows = [
        ("kernel_size / lam", [d.kernel.vertex_count / lam for d in draws], exp["kernel_size"] / lam, 4 / 3),
        ("kernel_edges / lam", [d.kernel.edge_count / lam for d in draws], exp["kernel_edges"] / lam, 2.0),
        ("N3 / lam", [d.meta["N3"] / lam for d in draws], exp["N3"] / lam, 4 / 3),
        ("core_edges / (eps^2 n)", [d.core.edge_count / (eps ** 2 * n) for d in draws],
         exp["core_edges"] / (eps ** 2 * n), 2.0),
        ("giant / (eps n)", [d.full.vertex_count / (eps * n) for d in draws], exp["giant_size"] / (eps * n), 2.0),
        ("longest 2-path / (log lam / eps)", [longest_2path(d) * eps / math.log(lam) for d in draws], None, 1.0),
    ]
    print(f"n={n} eps={eps} lam={lam:g} mu={params.mu:.6f} Lambda0={exp['Lambda0']:.6f}")
    print(f"{'statistic':34s} {'median':>8s} {'mean':>8s} {'model':>8s} {'limit':>8s}")
    for name, xs, model, limit in rows:
        m = "" if model is None else f"{model:8.3f}"
        print(f"{name:34s} {np.median(xs):8.3f} {np.mean(xs):8.3f} {m:>8s} {limit:8.3f}")


if __name__ == "__main__":
    main()
