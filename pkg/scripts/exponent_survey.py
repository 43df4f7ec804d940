#!/usr/bin/env python3
"""Fit approximation exponents for a few classical points.

Prints the fitted simultaneous exponent of the golden ratio from its
convergents, the dual exponent of (sqrt 2, sqrt 3) from an exact
enumeration, and the simultaneous exponent of a near-Liouville number,
each with its trivial bound and stability flag.
"""

import argparse
import sys

import mpmath as mp

from multbox.counts import (continued_fraction, convergent_qualities,
                            liouville_qualities, omega_fit,
                            omega_from_qualities)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=40,
                    help="continued fraction depth for the golden ratio")
    ap.add_argument("--q-max", type=int, default=512,
                    help="denominator horizon for the dual enumeration")
    ap.add_argument("--liouville", type=int, default=6,
                    help="factorial terms of the near-Liouville number")
    args = ap.parse_args()

    golden = lambda: (1 + mp.sqrt(5)) / 2
    pairs, exact = convergent_qualities(golden, args.depth)
    est = omega_from_qualities("simultaneous", pairs, pairs[-1][0], 1,
                               exact_hit=exact)
    print(f"golden ratio        omega  = {est.exponent:.4f} "
          f"(trivial {est.trivial_bound}, stable {est.stable})")

    est = omega_fit("dual", (mp.sqrt(2), mp.sqrt(3)), args.q_max)
    print(f"(sqrt 2, sqrt 3)    omega* = {est.exponent:.4f} "
          f"(trivial {est.trivial_bound}, stable {est.stable})")

    pairs = liouville_qualities(args.liouville)
    est = omega_from_qualities("simultaneous", pairs, pairs[-1][0], 1)
    print(f"near-Liouville      omega  = {est.exponent:.4f} "
          f"(trivial {est.trivial_bound}, stable {est.stable})")

    cf = continued_fraction(golden, 12)
    print(f"golden quotients    {cf.quotients}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
