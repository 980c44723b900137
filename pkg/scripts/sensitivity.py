"""Sensitivity of the slope trends to the profile completion (tooth height, tilt rule).

For each variant, prints max|F_n| and max|F_t| over a coarse shift grid for
v = 0.5 and v = 0.3 and their ratios.

    python scripts/sensitivity.py --H 0.25 0.5 --tilt sine tangent none
"""
import argparse
import itertools

import numpy as np

from rackcasimir.force import Numerics, sweep_forces
from rackcasimir.geometry import GeometryError, RackGeometry
from rackcasimir.stress import StressConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--H", type=float, nargs="+", default=[0.25, 0.5])
    ap.add_argument("--tilt", nargs="+", default=["sine", "tangent", "none"])
    ap.add_argument("--count", type=int, default=12)
    ap.add_argument("--h", type=float, default=0.1)
    args = ap.parse_args()

    num = Numerics(target_element_size=args.h, periods_realized=5, mesh_error=False)
    grid = np.linspace(0.0, 2.0, args.count, endpoint=False)
    print("H      tilt     ratio F_n  ratio F_t")
    for H, rule in itertools.product(args.H, args.tilt):
        peak = {}
        try:
            for v in (0.5, 0.3):
                reps = sweep_forces(RackGeometry(v=v, H=H, tilt_rule=rule), grid, StressConfig(), num)
                vals = np.array([r.value[0] for r in reps])
                peak[v] = np.max(np.abs(vals), axis=0)
        except GeometryError as exc:
            print(f"{H:<6g} {rule:8s} skipped: {exc}")
            continue
        rn, rt = peak[0.3] / peak[0.5]
        print(f"{H:<6g} {rule:8s} {rn:9.3f}  {rt:9.3f}")


if __name__ == "__main__":
    main()
