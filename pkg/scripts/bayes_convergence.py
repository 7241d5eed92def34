"""Grid posteriors of ``theta1 < Theta <= theta2`` after n successes, against the uniform-prior limit."""

from __future__ import annotations

import argparse
from fractions import Fraction

from envctl.fixtures import bayes_convergence


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=20)
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--n", type=int, nargs="+", default=[0, 1, 2, 5])
    ap.add_argument("--theta1", type=Fraction, default=Fraction(1, 5))
    ap.add_argument("--theta2", type=Fraction, default=Fraction(1, 2))
    args = ap.parse_args()
    print(f"{'n':>3} {'k':>6} {'posterior':>10} {'limit':>10} {'error':>10} {'ratio':>6}")
    for n in args.n:
        prev = None
        for row in bayes_convergence(args.grid, n, args.theta1, args.theta2, args.levels):
            ratio = f"{float(prev / row.error):6.2f}" if prev and row.error else ""
            print(f"{n:>3} {row.k:>6} {float(row.posterior):10.6f} {float(row.limit):10.6f} {float(row.error):10.3e} {ratio}")
            prev = row.error


if __name__ == "__main__":
    main()
