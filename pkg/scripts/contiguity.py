"""Giant component of G(n, (1+eps)/n) against the contiguous model: means, sds, ratios.

    python3 scripts/contiguity.py --n 1000000 --epsilon 0.1 --replicates 30
"""
import argparse

from nearcrit.lab import contiguity_compare


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10 ** 6)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--replicates", type=int, default=30)
    ap.add_argument("--seed", type=int, default=20240601)
    a = ap.parse_args()
    table = contiguity_compare(a.n, a.epsilon, a.replicates, a.seed)
    print(f"{'statistic':14s} {'gnp mean':>10s} {'gnp sd':>9s} {'c1 mean':>10s} {'c1 sd':>9s} {'ratio':>6s}")
    for name, row in table.rows.items():
        print(f"{name:14s} {row['gnp_mean']:10.1f} {row['gnp_sd']:9.1f} {row['c1_mean']:10.1f} "
              f"{row['c1_sd']:9.1f} {row['ratio']:6.3f}")


if __name__ == "__main__":
    main()
