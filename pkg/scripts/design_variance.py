"""Predicted variance factors of competing bandwidth designs vs Monte Carlo.

Compares the pilot, an equidistant design and a two-cluster design on the
same interval, first through the asymptotic factor for several concentration
exponents, then through simulated variances.
"""

import argparse

from funbias.design import fixed_interval, two_cluster, variance_proxy
from funbias.kernels import make_one_sided
from funbias.sim import run_design_comparison, table10_config
from funbias.theory import SmallBallModel, predicted_variance_factor


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kernel", default="quadratic")
    ap.add_argument("--replications", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    kernel = make_one_sided(args.kernel)
    equi = fixed_interval(0.9, 1.1, 20)
    cluster = two_cluster((0.9, 0.91), (1.09, 1.1), 20)
    print(f"{'gamma':>6}{'pilot':>10}{'equi':>10}{'cluster':>10}{'equi/pilot':>12}{'cl/pilot':>10}")
    for gamma in (0.5, 1.0, 2.0, 4.0):
        tau = SmallBallModel.power(gamma)
        p = predicted_variance_factor(kernel, tau, [1.0], [1.0])
        e = variance_proxy(equi, None, tau, kernel, base=1.0)
        c = variance_proxy(cluster, None, tau, kernel, base=1.0)
        print(f"{gamma:6.1f}{p:10.4f}{e:10.4f}{c:10.4f}{e / p:12.3f}{c / p:10.3f}")

    rep = run_design_comparison(table10_config(replications=args.replications, seed=args.seed))
    p, e, c = rep["pilot"], rep["reduced"], rep["reduced_opt"]
    print(f"\nMonte Carlo (R={args.replications}): variance pilot {p.variance:.4f}, "
          f"equi {e.variance:.4f} ({e.variance / p.variance:.2f}x), cluster {c.variance:.4f} "
          f"({c.variance / p.variance:.2f}x)")
    print(f"squared bias pilot {p.sq_bias:.4f}, equi {e.sq_bias:.4f}, cluster {c.sq_bias:.4f}")


if __name__ == "__main__":
    main()
