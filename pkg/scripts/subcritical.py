"""Subcritical survey: exploration component counts, largest component and diameter, and
how often a tree component carries two heavy subtrees at distance r.

    python3 scripts/subcritical.py --n 1000000 --epsilon 0.05 --replicates 10
    python3 scripts/subcritical.py --n 10000000 --epsilon 0.05 --replicates 10
"""
import argparse
import math

from nearcrit.lab import subcritical_survey


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10 ** 6)
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--seed", type=int, default=20240601)
    a = ap.parse_args()
    rows = subcritical_survey(a.n, a.epsilon, a.replicates, a.seed)
    eps, lam = a.epsilon, a.epsilon ** 3 * a.n
    print(f"n={a.n} eps={eps} lam={lam:g} r={rows[0]['r']} s={rows[0]['s']} "
          f"eps^2 n/2={eps ** 2 * a.n / 2:g} eps^-2 log lam={eps ** -2 * math.log(lam):.0f}")
    print(f"{'rep':>3s} {'explored':>9s} {'max comp':>9s} {'max diam':>9s} {'B':>2s}")
    for r in rows:
        print(f"{r['replicate']:3d} {r['components_explored']:9d} {r['max_component']:9d} "
              f"{r['max_diameter']:9d} {'y' if r['b_event'] else 'n':>2s}")
    print(f"B detected in {sum(r['b_event'] for r in rows)}/{len(rows)} replicates")


if __name__ == "__main__":
    main()
