"""Heuristic worst-start mixing time of the contiguous model across lambda at fixed epsilon,
with log-log fits against eps^-3 log^2(lambda).

    python3 scripts/scaling_sweep.py --epsilon 0.25 --lambdas 64 128 256 512 --replicates 5 --out sweep.csv
"""
import argparse
from pathlib import Path

import numpy as np

from nearcrit.lab import GridPoint, fit_loglog, mixing_scale, records_to_csv, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilon", type=float, default=0.25)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[64, 128, 256, 512])
    ap.add_argument("--replicates", type=int, default=5)
    ap.add_argument("--model", choices=("c1", "gnp"), default="c1")
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--cesaro", action="store_true")
    ap.add_argument("--out", type=Path)
    a = ap.parse_args()

    eps = a.epsilon
    grid = [GridPoint(round(lam / eps ** 3), eps, a.replicates, a.model) for lam in a.lambdas]
    recs = run_sweep(grid, a.seed, mixing=True, threads=a.threads, cesaro=a.cesaro)
    if a.out:
        a.out.write_text(records_to_csv(recs))
    by_n = {}
    for r in recs:
        if r.status == "ok":
            by_n.setdefault(r.n, []).append(r.tmix_heuristic)
        else:
            print(f"n={r.n} replicate {r.replicate}: {r.status}")
    print(f"{'n':>8s} {'lam':>6s} {'scale':>9s} {'median':>8s} {'mean':>9s} {'ratio':>6s}")
    for n, ts in by_n.items():
        x = mixing_scale(n, eps)
        print(f"{n:8d} {eps ** 3 * n:6.0f} {x:9.1f} {np.median(ts):8.0f} {np.mean(ts):9.1f} {np.median(ts) / x:6.2f}")
    for label, agg in (("median", np.median), ("mean", np.mean)):
        s, c, r2 = fit_loglog([(mixing_scale(n, eps), agg(ts)) for n, ts in by_n.items()])
        print(f"{label:6s} fit: slope {s:.3f}, intercept {c:.3f}, r^2 {r2:.3f}")
    s, c, r2 = fit_loglog([(mixing_scale(n, eps), t) for n, ts in by_n.items() for t in ts])
    print(f"raw    fit: slope {s:.3f}, intercept {c:.3f}, r^2 {r2:.3f}")


if __name__ == "__main__":
    main()
