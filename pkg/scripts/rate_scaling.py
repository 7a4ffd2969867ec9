"""Empirical rate of rho_n for a spec: log-log slope between consecutive n.

For the gap example (m = 3) the leading bound term decays like 1/n.

    python3 scripts/rate_scaling.py --n 4,8,16,32,64,128
    python3 scripts/rate_scaling.py --spec my.spec
"""

import argparse
import math

from pseudomoment_clt import dist_core, inversion
from pseudomoment_clt.example_dist import build_example


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--spec", help="spec document; defaults to the gap example")
    parser.add_argument("--epsilon", type=float, default=0.5)
    parser.add_argument("--n", default="4,8,16,32,64,128")
    args = parser.parse_args()

    spec = dist_core.load_spec(args.spec) if args.spec else build_example(args.epsilon)
    dist_core.validate(spec)
    ns = [int(v) for v in args.n.split(",")]
    rhos = [inversion.sup_cdf_distance(spec, n) for n in ns]
    print(f"{'n':>5} {'rho_n':>12} {'slope':>7}")
    prev = None
    for n, rho in zip(ns, rhos):
        slope = "" if prev is None else f"{math.log(rho / prev[1]) / math.log(n / prev[0]):7.3f}"
        print(f"{n:>5} {rho:12.5e} {slope}")
        prev = (n, rho)


if __name__ == "__main__":
    main()
