"""Force curves F_n(s), F_t(s) for the three slopes of the parameter study.

Writes CSV and SVG files through the command-line sweep and prints the
peak ratios between the steepest and the zero slope.

    python scripts/slope_sweep.py --out out/slopes [--h 0.05] [--threads 1]
"""
import argparse
import csv
import json
import tempfile
from pathlib import Path

import numpy as np

from rackcasimir import cli


def peaks(path):
    with open(path) as fh:
        rows = list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))
    out = {}
    for r in rows:
        out.setdefault(float(r["v"]), []).append((float(r["s"]), float(r["force_per_period"])))
    return {v: max(pts, key=lambda p: abs(p[1])) for v, pts in out.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/slopes")
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--mesh-error", action="store_true", help="add the refined-mesh delta to the errors")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    config = {
        "numerics": {"target_element_size": args.h, "mesh_error": args.mesh_error},
        "physics": {"dimensionality": ["2d", "3d"]},
        "sweep": {"v_list": [0.5, 0.4, 0.3], "s_grid": {"start": 0.0, "stop": 2.0, "count": 21}},
    }
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "slopes.json"
        path.write_text(json.dumps(config))
        code = cli.main(["sweep", "--config", str(path), "--out", args.out, "--threads", str(args.threads)])
    if code:
        raise SystemExit(code)

    for dim in ("2d", "3d"):
        for comp in ("normal", "tangential"):
            p = peaks(Path(args.out) / f"force_{dim}_{comp}.csv")
            desc = ", ".join(f"v={v}: {f:+.6f} at s={s:.3f}" for v, (s, f) in sorted(p.items(), reverse=True))
            ratio = abs(p[0.3][1]) / abs(p[0.5][1])
            print(f"{dim} {comp:10s} peaks {desc}; ratio v=0.3/v=0.5 {ratio:.3f}")


if __name__ == "__main__":
    np.set_printoptions(precision=6)
    main()
