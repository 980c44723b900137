"""Mesh and truncation convergence of the force for one geometry.

    python scripts/convergence.py --v 0.4 --s 0.5 --h 0.2 0.1 0.05
"""
import argparse
from dataclasses import replace

from rackcasimir.force import Numerics, compute_forces
from rackcasimir.geometry import RackGeometry
from rackcasimir.stress import StressConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--v", type=float, default=0.4)
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--h", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    ap.add_argument("--periods", type=int, default=7)
    args = ap.parse_args()

    geom = RackGeometry(v=args.v, s=args.s)
    print("h        dim  F_n            F_t            rel.mesh  rel.trunc")
    for h in args.h:
        num = Numerics(target_element_size=h, periods_realized=args.periods)
        rep = compute_forces(geom, StressConfig(), num, truncation_check=True)
        for d, dim in enumerate(("2d", "3d")):
            fn, ft = rep.refined_value[d]
            mesh = rep.parts["mesh"][d, 0] / abs(fn)
            trunc = rep.parts["truncation"][d, 0] / abs(fn)
            print(f"{h:<8g} {dim}  {fn:+.9f}  {ft:+.9f}  {mesh:.2e}  {trunc:.2e}")


if __name__ == "__main__":
    main()
