"""Largest |exact - normal| Mann-Whitney p-value gap for each tie-free size pair.

Shows where the continuity-corrected normal approximation is within a
tolerance of the exact permutation distribution.

    python3 scripts/mwu_approximation_gap.py --max-total 12 --tol 0.03
"""
import argparse

import numpy as np

from gazeclust.stats import mann_whitney_u


def max_gap(n1, n2):
    # every achievable U is hit by some split of 0..n1+n2-1; U decides both p-values
    worst = 0.0
    for u in range(n1 * n2 + 1):
        a, b = _sample_with_u(n1, n2, u)
        ex = mann_whitney_u(a, b, method="exact").p
        no = mann_whitney_u(a, b, method="normal_approx").p
        worst = max(worst, abs(ex - no))
    return worst


def _sample_with_u(n1, n2, u):
    # start with a entirely below b (U=0) and raise a's largest elements one slot at a time
    a = list(range(n1))
    for _ in range(u):
        for i in reversed(range(n1)):
            nxt = a[i] + 1
            if nxt < n1 + n2 and (i == n1 - 1 or nxt < a[i + 1]):
                a[i] = nxt
                break
    b = [v for v in range(n1 + n2) if v not in a]
    return np.array(a, float), np.array(b, float)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-total", type=int, default=12)
    ap.add_argument("--tol", type=float, default=0.03)
    args = ap.parse_args()
    print(" n1  n2   max gap")
    for n1 in range(1, args.max_total):
        for n2 in range(n1, args.max_total - n1 + 1):
            g = max_gap(n1, n2)
            flag = "" if g <= args.tol else "  > tol"
            print(f"{n1:3d} {n2:3d}  {g:.4f}{flag}")


if __name__ == "__main__":
    main()
