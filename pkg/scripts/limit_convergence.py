"""Finite-B values of sum g_i C_i^2 against their large-B limit.

Equally spaced bandwidths on (h0, hu]: the second-order bias coefficient
settles quickly, so adding bandwidths on a fixed interval buys little.
"""

import argparse

from funbias.biasred import limit_sum_g_c_squared, sum_g_c_squared
from funbias.design import fixed_interval


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h0", type=float, default=1.0)
    ap.add_argument("--hu", type=float, nargs="+", default=[1.1, 1.5, 2.0, 3.0])
    args = ap.parse_args()

    Bs = [2, 5, 11, 21, 41, 101, 1001, 10_000]
    print(f"{'hu':>6}{'limit':>12}" + "".join(f"{'B=' + str(B):>12}" for B in Bs))
    for hu in args.hu:
        lim = limit_sum_g_c_squared(args.h0, hu)
        vals = [sum_g_c_squared(fixed_interval(args.h0, hu, B)) for B in Bs]
        print(f"{hu:6.2f}{lim:12.6f}" + "".join(f"{v:12.6f}" for v in vals))


if __name__ == "__main__":
    main()
