"""Which curve distance reproduces the reference pilot squared bias?

The pilot estimator's bias at a fixed bandwidth depends on the scale of the
distance.  This script runs the pilot (and reduced) estimator under the raw
L2 distance and under the interval-normalized one, and lines both up against
reference squared-bias values for the same configurations.

    python scripts/metric_calibration.py --replications 200
"""

import argparse
from dataclasses import replace

from funbias.design import DesignSpec
from funbias.sim import ExperimentConfig, run_experiment, table_configs

# (label, config, reference pilot sq_bias, reference reduced sq_bias)
def reference_points():
    t1, t2, t3 = (next(c for c in table_configs(k) if c.n == 500) for k in (1, 2, 3))
    t5 = next(c for c in table_configs(5) if c.design.stepwidth == 0.01)
    t4 = next(c for c in table_configs(4) if c.design.stepwidth == 0.01)
    wide = ExperimentConfig(n=100, pilot_h=2.0, design=DesignSpec("centered", B=21, stepwidth=0.05))
    small = ExperimentConfig(n=500, pilot_h="3.71*n^(-1/3)")
    return [
        ("c=9.28, n=500", t1, 8.999492, 2.545537),
        ("c=8.12, n=500", t2, 7.609054, 0.1898303),
        ("c=6.96, n=500", t3, 5.33639, 1.553648),
        ("h=1.2, sw=0.01", t4, 9.208351, 3.155444),
        ("h=1.0, sw=0.01", t5, 7.262152, 0.03055685),
        ("h=2, n=100, sw=0.05", wide, 11.28986, 9.242853),
        ("c=3.71, n=500", small, 0.207, None),
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--replications", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    header = f"{'configuration':<22}{'ref pilot':>10}{'l2':>10}{'l2_norm':>10}   {'ref red.':>10}{'l2':>10}{'l2_norm':>10}"
    print(header)
    print("-" * len(header))
    for label, cfg, ref_p, ref_r in reference_points():
        got = {}
        for metric in ("l2", "l2_normalized"):
            rep = run_experiment(replace(cfg, metric=metric, replications=args.replications, seed=args.seed))
            got[metric] = (rep["pilot"].sq_bias, rep["reduced"].sq_bias)
        ref_r_txt = f"{ref_r:10.4f}" if ref_r is not None else f"{'-':>10}"
        print(f"{label:<22}{ref_p:10.4f}{got['l2'][0]:10.4f}{got['l2_normalized'][0]:10.4f}   "
              f"{ref_r_txt}{got['l2'][1]:10.4f}{got['l2_normalized'][1]:10.4f}")


if __name__ == "__main__":
    main()
