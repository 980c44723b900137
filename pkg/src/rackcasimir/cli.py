"""Command-line front end.

Subcommands::

    rackcasimir schema                      print every config key with default
    rackcasimir validate --config run.json  flat-plate and path-independence checks
    rackcasimir point    --config run.json [--s S] [--v V] [--x0 X0]
    rackcasimir sweep    --config run.json --out DIR [--threads N]

Exit codes: 0 success, 1 failed check or computation, 2 invalid configuration.

Sign convention in all output: ``F_n`` is the x1 force per period on the
upper plate (negative means attraction); ``F_t`` is the x2 force on the upper
plate.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, config_to_dict, load_config, parse_config, schema
from .force import (
    COMPONENTS,
    ForcePath,
    OperatorProvider,
    PathError,
    check_path,
    compute_forces,
    path_forces,
)
from .geometry import GeometryError, RackGeometry, mesh_scene
from .oracle import ImageSeriesProvider, flat_plate_force
from .stress import DIMENSIONS, QuadratureError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
HEADER_NOTE = (
    "# F_n: x1 force per period on the upper plate (negative = attraction); "
    "F_t: x2 force on the upper plate; force_density = force_per_period / a"
)
CSV_COLUMNS = ("v", "s", "force_per_period", "force_density", "error_estimate")


def fmt(x) -> str:
    """Fixed 9-significant-digit formatting used in every CSV cell."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    return f"{x:.9g}"


def _load(args) -> RunConfig:
    if args.config is None:
        return parse_config({})
    return load_config(args.config)


# -- validate -----------------------------------------------------------------


def _check(results, name, achieved, limit):
    ok = bool(achieved <= limit)
    results.append(ok)
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {achieved:.3e} (limit {limit:.1e})")


def run_validation(cfg: RunConfig) -> bool:
    """Oracle suite at the configured numerics; returns True when all checks pass."""
    num = replace(cfg.force_numerics(), mesh_error=False)
    a = cfg.geometry.a
    l = getattr(cfg.geometry, "l", 1.0)
    flat = RackGeometry(a=a, u=0.5 * a / 2, v=0.5 * a / 2, l=l, H=0.0)
    scene = flat.scene(num.periods_realized)
    mesh = mesh_scene(scene, num.target_element_size)
    lines = [ForcePath(x0 * l, 0.0, a) for x0 in (0.3, 0.5, 0.7)]
    for p in lines:
        check_path(mesh, scene, p)
    stress = replace(cfg.stress_config("2d"), mass=0.0)
    results = []

    bem = path_forces(OperatorProvider(mesh, num.basis_degree), lines, 0.0, stress, num)
    ref = path_forces(ImageSeriesProvider(l), lines, 0.0, stress, num)
    for dim, tol in (("2d", 2e-2), ("3d", 3e-2)):
        exact = flat_plate_force(dim, l)
        per_length = bem.get(dim, "normal", 1) / a
        _check(results, f"flat plates {dim} F_n/a vs closed form", abs(per_length / exact - 1), tol)
        iso = ref.get(dim, "normal", 1) / a
        _check(results, f"flat plates {dim} image-series quadrature", abs(iso / exact - 1), 1e-3)
        _check(
            results,
            f"flat plates {dim} |F_t|/|F_n|",
            abs(bem.get(dim, "tangential", 1)) / abs(bem.get(dim, "normal", 1)),
            1e-3,
        )
        vals = bem.value[:, DIMENSIONS.index(dim), 0]
        _check(results, f"flat plates {dim} x0 spread", float(np.ptp(vals) / np.max(np.abs(vals))), 1e-3)
    return all(results)


# -- point ----------------------------------------------------------------------


def run_point(cfg: RunConfig, s=None, v=None, x0=None):
    geom = cfg.geometry
    if v is not None:
        if not isinstance(geom, RackGeometry):
            raise ConfigError("--v needs a rack geometry")
        geom = replace(geom, v=float(v))
    if s is not None:
        geom = geom.with_shift(float(s))
    num = cfg.force_numerics()
    scene = geom.scene(num.periods_realized)
    mesh = mesh_scene(scene, num.target_element_size)
    if x0 is None:
        path = cfg.path(geom, scene)
    else:
        path = ForcePath(float(x0), cfg.numerics.y0, geom.a)
    check_path(mesh, scene, path)
    t0 = time.perf_counter()
    rep = compute_forces(geom, cfg.stress_config(), num, x0=path.x0, y0=path.y0)
    elapsed = time.perf_counter() - t0
    lines = []
    for dim in cfg.physics.dimensionality:
        lines.append(
            f"dim={dim} v={fmt(geom.v)} s={fmt(geom.shift)} x0={fmt(path.x0)} m={fmt(cfg.physics.mass)} "
            f"F_n={fmt(rep.get(dim, 'normal'))} err_n={fmt(rep.err(dim, 'normal'))} "
            f"F_t={fmt(rep.get(dim, 'tangential'))} err_t={fmt(rep.err(dim, 'tangential'))} "
            f"time={elapsed:.1f}s"
        )
    return rep, lines


# -- sweep ----------------------------------------------------------------------


def _sweep_job(job):
    geom, stress, num, x0, y0 = job
    try:
        return compute_forces(geom, stress, num, x0=x0, y0=y0), None
    except (QuadratureError, ArithmeticError, RuntimeError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: RunConfig, out_dir, threads: int = 1):
    """Compute every (v, s) point and write one CSV per (dimensionality, component).

    Returns ``(paths, n_failed)``. Rows are ordered by ``(v, s)`` whatever the
    completion order of the workers.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    num = cfg.force_numerics()
    stress = cfg.stress_config()
    jobs, keys = [], []
    for geom in sorted(cfg.geometries(), key=lambda g: g.v if not math.isnan(g.v) else 0.0):
        for s in cfg.sweep.s_grid:
            g = geom.with_shift(s)
            jobs.append((g, stress, num, cfg.numerics.x0, cfg.numerics.y0))
            keys.append((g.v, g.shift, g.a))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    n_failed = sum(err is not None for _, err in results)
    written = []
    for dim in cfg.physics.dimensionality:
        for comp in cfg.sweep.components:
            rows = []
            for (v, s, a), (rep, err) in zip(keys, results):
                if rep is None:
                    row = [fmt(v), fmt(s), "nan", "nan", "nan"]
                else:
                    f = rep.get(dim, comp)
                    row = [fmt(v), fmt(s), fmt(f), fmt(f / a), fmt(rep.err(dim, comp))]
                if n_failed:
                    row.append("ok" if err is None else err.replace(",", ";").replace("\n", " "))
                rows.append(row)
            header = list(CSV_COLUMNS) + (["status"] if n_failed else [])
            path = out_dir / f"{cfg.output.prefix}_{dim}_{comp}.csv"
            with open(path, "w", newline="") as fh:
                fh.write(HEADER_NOTE + "\n")
                fh.write(",".join(header) + "\n")
                for row in rows:
                    fh.write(",".join(row) + "\n")
            written.append(path)
            if cfg.output.svg:
                written.append(write_svg(path.with_suffix(".svg"), keys, results, dim, comp))
    return written, n_failed


def write_svg(path, keys, results, dim, comp, width=640, height=400):
    """Single-file line chart, one polyline per v, with axes and legend."""
    series = {}
    for (v, s, a), (rep, _) in zip(keys, results):
        if rep is not None:
            series.setdefault(v, []).append((s, rep.get(dim, comp)))
    pad_l, pad_r, pad_t, pad_b = 70, 110, 30, 45
    all_s = [p[0] for pts in series.values() for p in pts] or [0.0, 1.0]
    all_f = [p[1] for pts in series.values() for p in pts] or [0.0, 1.0]
    s_lo, s_hi = min(all_s), max(all_s)
    f_lo, f_hi = min(all_f), max(all_f)
    if s_hi == s_lo:
        s_hi = s_lo + 1.0
    if f_hi == f_lo:
        f_lo, f_hi = f_lo - 1.0, f_hi + 1.0
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def X(s):
        return pad_l + pw * (s - s_lo) / (s_hi - s_lo)

    def Y(f):
        return pad_t + ph * (f_hi - f) / (f_hi - f_lo)

    dashes = ["", "8,4", "2,3", "12,3,2,3"]
    label = "F_n" if comp == "normal" else "F_t"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{pad_l + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">s</text>',
        f'<text x="14" y="{pad_t + ph / 2:.1f}" transform="rotate(-90 14 {pad_t + ph / 2:.1f})" '
        f'text-anchor="middle">{label} per period ({dim})</text>',
    ]
    for k in range(5):
        s = s_lo + (s_hi - s_lo) * k / 4
        f = f_lo + (f_hi - f_lo) * k / 4
        out.append(f'<text x="{X(s):.1f}" y="{pad_t + ph + 16}" text-anchor="middle">{fmt(round(s, 6))}</text>')
        out.append(f'<text x="{pad_l - 6}" y="{Y(f) + 4:.1f}" text-anchor="end">{f:.3g}</text>')
    for i, (v, pts) in enumerate(sorted(series.items(), reverse=True)):
        coords = " ".join(f"{X(s):.2f},{Y(f):.2f}" for s, f in pts)
        dash = dashes[i % len(dashes)]
        style = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline points="{coords}" fill="none" stroke="black"{style}/>')
        ly = pad_t + 18 * (i + 1)
        lx = width - pad_r + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="black"{style}/>')
        out.append(f'<text x="{lx + 36}" y="{ly + 4}">v={fmt(v)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
    return Path(path)


# -- entry point ---------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="rackcasimir",
        description="Casimir forces between periodically profiled Dirichlet plates.",
        epilog="Run 'rackcasimir schema' for every configuration key, its default and meaning.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON run configuration (defaults when omitted)")
        sp.add_argument("--out", help="output directory (overrides output.directory)")
        sp.add_argument(
            "--threads",
            type=int,
            default=os.cpu_count() or 1,
            help="worker processes for sweep points (default: available cores)",
        )

    sub.add_parser("schema", help="print the configuration schema with defaults")
    common(sub.add_parser("validate", help="run the flat-plate oracle checks"))
    sp = sub.add_parser("point", help="forces at one (v, s) configuration")
    common(sp)
    sp.add_argument("--s", type=float, help="lateral shift")
    sp.add_argument("--v", type=float, help="valley length")
    sp.add_argument("--x0", type=float, help="transverse coordinate of the integration line")
    common(sub.add_parser("sweep", help="force curves over sweep.s_grid and sweep.v_list"))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(json.dumps(schema(), indent=2))
        return EXIT_OK
    try:
        cfg = _load(args)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except (ConfigError, GeometryError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        try:
            ok = run_validation(cfg)
        except (GeometryError, PathError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK if ok else EXIT_FAIL

    if args.command == "point":
        try:
            _, lines = run_point(cfg, args.s, args.v, args.x0)
        except (ConfigError, GeometryError, PathError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (QuadratureError, RuntimeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print("\n".join(lines))
        return EXIT_OK

    out_dir = Path(args.out or cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "config.json", "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
    written, failed = run_sweep(cfg, out_dir, args.threads)
    for path in written:
        print(path)
    if failed:
        print(f"{failed} sweep point(s) failed; see the status column", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
