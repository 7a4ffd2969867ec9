"""Tabulate |f(t/sigma)| against the Lemma 2 envelope and omega(t) against its Lemma 1 bound.

    python3 scripts/lemma_envelopes.py --n 4 --every 40
"""

import argparse

from pseudomoment_clt import inversion
from pseudomoment_clt.example_dist import build_example


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--epsilon", type=float, default=0.5)
    parser.add_argument("--m", type=int, default=3)
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--every", type=int, default=40, help="print every k-th row")
    args = parser.parse_args()

    rows = inversion.lemma_check(build_example(args.epsilon), args.m, args.n)
    print(f"{'t':>8} {'|f|':>10} {'envelope':>10} {'omega':>10} {'bound':>10} ok")
    for r in rows[:: args.every]:
        print(f"{r.t:8.4f} {r.abs_cf:10.3e} {r.envelope:10.3e} {r.omega:10.3e} {r.omega_bound:10.3e} {r.ok}")
    print(f"{sum(not r.ok for r in rows)} violations out of {len(rows)}")


if __name__ == "__main__":
    main()
