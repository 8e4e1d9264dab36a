"""Command-line front end.

Subcommands map one-to-one onto the lab operations; every run writes its
fully-resolved configuration next to the outputs so results can be
reproduced bit-for-bit from the manifest.  Rational parameters ("p/q") are
parsed exactly before conversion to the working precision.

Exit codes: 0 success, 2 argument error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .errors import CurvedynError

DEFAULT_PRECISION_ENV = "CURVEDYN_PRECISION"


def parse_scalar(text: str) -> float:
    """Exact rational parsing: 'p/q' or decimal strings."""
    return float(Fraction(text))


def parse_params(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("params must be 'a,b,c'")
    return tuple(parse_scalar(p) for p in parts)


def parse_range(text: str):
    lo, hi, n = text.split(":")
    lo, hi, n = parse_scalar(lo), parse_scalar(hi), int(n)
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def parse_budget(text: str) -> int:
    return int(float(text))


def load_config(path: str) -> dict:
    """Flat key = value file; '#' starts a comment."""
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def write_manifest(outdir: Path, args: argparse.Namespace):
    outdir.mkdir(parents=True, exist_ok=True)
    lines = []
    for key in sorted(vars(args)):
        if key in ("func", "config"):
            continue
        lines.append(f"{key} = {getattr(args, key)}")
    (outdir / "run-config.txt").write_text("\n".join(lines) + "\n")


def _family_map(args):
    from . import families

    if args.family == "desboves":
        return families.desboves_map(args.params)
    if args.family == "two-thirds":
        return families.desboves_map(families.two_thirds_params(args.params[1]))
    if args.family == "elementary":
        return families.desboves_map(families.elementary_params(args.params[1]))
    if args.family == "degree3":
        return families.degree3_map(*args.params)
    if args.family == "classical":
        return families.classical_desboves()
    raise CurvedynError(f"unknown family {args.family}")


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def cmd_lyap(args):
    from .exponent import lyap_complex, lyap_real

    f = _family_map(args)
    if args.field == "complex":
        est = lyap_complex(f, n_samples=args.samples, seed=args.seed,
                           method=args.method)
    else:
        est = lyap_real(f, n_iter=args.samples, seed=args.seed,
                        method=args.method, precision_bits=args.precision)
    out = {"family": args.family, "params": list(args.params),
           "field": args.field, "method": est.method, "samples": est.samples,
           "lyap": est.value, "stderr": est.stderr, "rejected": est.rejected,
           "seed": args.seed}
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    (outdir / "lyap.json").write_text(json.dumps(out, sort_keys=True, indent=1))
    print(f"lyap[{args.field}] = {est.value:+.4f} +- {est.stderr:.4f} "
          f"({est.method}, n={est.samples})")
    return 0


def cmd_sweep(args):
    from .exponent import TWO_THIRDS, ELEMENTARY, sweep, write_sweep_csv

    family = TWO_THIRDS if args.family == "two-thirds" else ELEMENTARY
    rows = sweep(family, args.b_range, n_samples=args.samples, seed=args.seed,
                 fields=tuple(args.fields.split(",")))
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    path = outdir / "sweep.csv"
    write_sweep_csv(rows, path)
    print(f"sweep: {len(rows)} rows -> {path}")
    return 0


def cmd_threshold(args):
    from .exponent import TWO_THIRDS, threshold_find

    b = threshold_find(TWO_THIRDS, (args.lo, args.hi), field=args.field,
                       n_samples=args.samples, seed=args.seed)
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    (outdir / "threshold.json").write_text(
        json.dumps({"field": args.field, "crossing": b}, sort_keys=True))
    print(f"sign change at b = {b:.4f} ({args.field})")
    return 0


def cmd_basin_stats(args):
    from .basins import basin_fractions
    from .contexts import ScalarContext

    f = _family_map(args)
    ctx = ScalarContext(args.field, 53)
    rep = basin_fractions(f, n_samples=args.samples, budget=args.budget,
                          seed=args.seed, ctx=ctx)
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    (outdir / "basins.json").write_text(rep.to_json())
    fr = {k: round(v, 4) for k, v in sorted(rep.fractions.items())}
    print(f"basin fractions (n={rep.n}): {fr}")
    return 0


def cmd_basin_image(args):
    from .basins import BasinView, render_basin

    f = _family_map(args)
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    path = outdir / "basin.ppm"
    counts = render_basin(f, BasinView(resolution=args.resolution,
                                       budget=args.budget), str(path))
    print(f"basin image -> {path} labels={counts}")
    return 0


def cmd_orbit_trace(args):
    from .basins import orbit_trace
    from .contexts import ScalarContext
    from .projective import normalize
    from .sampling import sphere_uniform, fs_uniform, stream

    f = _family_map(args)
    ctx = ScalarContext(args.field, 53)
    rng = stream(args.seed, 0)
    P0 = (fs_uniform if ctx.is_complex else sphere_uniform)(rng, 1)[0]
    tr = orbit_trace(f, normalize(tuple(P0), ctx), args.budget)
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    path = outdir / "trace.csv"
    tr.write_csv(path)
    print(f"orbit trace ({len(tr.iters)} rows) -> {path}")
    return 0


def cmd_rotation_sweep(args):
    from .circles import detect_plateaus, rotation_sweep, write_rotation_csv

    rows = rotation_sweep(args.a, args.b, args.c_range, seed=args.seed)
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    path = outdir / "rotation.csv"
    write_rotation_csv(rows, path)
    plats = detect_plateaus(rows)
    print(f"rotation sweep: {len(rows)} rows -> {path}; "
          f"plateaus: {[(p['p'], p['q']) for p in plats]}")
    return 0


def cmd_circle_find(args):
    from .circles import circle_transverse_exponent, find_attracting_circle

    f = _family_map(args)
    model = find_attracting_circle(f, seed=args.seed)
    est = circle_transverse_exponent(f, model)
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    out = {"rotation": model.rotation_number,
           "fit_residual": model.fit_residual,
           "period_of_cycle": model.period_of_cycle,
           "lyap": est.value, "stderr": est.stderr}
    (outdir / "circle.json").write_text(json.dumps(out, sort_keys=True))
    print(f"circle: rho={model.rotation_number:.5f} "
          f"period={model.period_of_cycle} lyap={est.value:+.4f}")
    return 0


def cmd_ring_profile(args):
    from .families import synthetic_ring_map
    from .rings import ring_profile

    f = synthetic_ring_map(args.alpha, 2, tuple(args.r_coeffs), scale=args.scale)
    import numpy as np
    rhos = np.geomspace(args.rho_lo, args.rho_hi, args.n_rho)
    prof = ring_profile(f, rhos)
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    path = outdir / "ring_profile.csv"
    with open(path, "w") as fh:
        fh.write("h,rho,lyap,stderr\n")
        for row in zip(prof.h, prof.rho, prof.lyap, prof.stderr):
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
    print(f"ring profile ({len(prof.h)} circles, convex={prof.convex}, "
          f"jumps={['%.3f' % j for j in prof.slope_jumps]}) -> {path}")
    return 0


def cmd_cassini_verify(args):
    from .cassini import (CassiniConfig, cassini_identity_residual,
                          contraction_check, trapping_demo, write_report)

    cfg = CassiniConfig(args.k, args.a)
    sup = contraction_check(cfg, n_samples=args.samples, seed=args.seed)
    trap = trapping_demo(cfg, n_orbits=args.orbits, seed=args.seed)
    ident = cassini_identity_residual(args.k)
    report = {**sup, "orbits": trap["orbits"], "identity_residual": ident}
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    write_report(report, outdir / "cassini.json")
    print(f"cassini k={args.k} a={args.a}: sup r-ratio {sup['sup_ratio']:.4f} "
          f"(bound {sup['bound_4k']:.3f}), orbits {trap['orbits']}")
    return 0


def cmd_identities(args):
    from . import verify

    results = verify.run_identity_suite(seed=args.seed)
    worst = max(results.values())
    outdir = Path(args.outdir)
    write_manifest(outdir, args)
    (outdir / "identities.json").write_text(
        json.dumps(results, sort_keys=True, indent=1))
    for name, resid in sorted(results.items()):
        print(f"  {name:40s} {resid:.3e}")
    print(f"identities: worst residual {worst:.3e}")
    return 0 if worst < 1e-9 else 3


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curvedyn",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, family=True):
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--outdir", default="out")
        p.add_argument("--precision", type=int,
                       default=int(os.environ.get(DEFAULT_PRECISION_ENV, 192)))
        p.add_argument("--config", default=None,
                       help="key = value file; flags override")
        p.add_argument("--workers", type=int, default=1)
        if family:
            p.add_argument("--family", default="desboves",
                           choices=["desboves", "two-thirds", "elementary",
                                    "degree3", "classical"])
            p.add_argument("--params", type=parse_params, default=(0.0, 0.0, 0.0))

    p = sub.add_parser("lyap", help="transverse exponent along the cubic")
    common(p)
    p.add_argument("--field", choices=["real", "complex"], default="complex")
    p.add_argument("--samples", type=parse_budget, default=10**6)
    p.add_argument("--method", default="torus_quadrature",
                   choices=["torus_quadrature", "birkhoff_orbit"])
    p.set_defaults(func=cmd_lyap)

    p = sub.add_parser("sweep", help="exponent vs parameter grid (CSV)")
    common(p, family=False)
    p.add_argument("--family", default="two-thirds",
                   choices=["two-thirds", "elementary"])
    p.add_argument("--b-range", type=parse_range, required=True,
                   metavar="LO:HI:N")
    p.add_argument("--samples", type=parse_budget, default=10**5)
    p.add_argument("--fields", default="real,complex")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="locate the blowout sign change")
    common(p, family=False)
    p.add_argument("--field", choices=["real", "complex"], default="real")
    p.add_argument("--lo", type=parse_scalar, required=True)
    p.add_argument("--hi", type=parse_scalar, required=True)
    p.add_argument("--samples", type=parse_budget, default=2 * 10**5)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("basin-stats", help="Monte Carlo basin fractions")
    common(p)
    p.add_argument("--field", choices=["real", "complex"], default="real")
    p.add_argument("--samples", type=parse_budget, default=1000)
    p.add_argument("--budget", type=parse_budget, default=50000)
    p.set_defaults(func=cmd_basin_stats)

    p = sub.add_parser("basin-image", help="render basins to a PPM image")
    common(p)
    p.add_argument("--resolution", type=int, default=96)
    p.add_argument("--budget", type=parse_budget, default=2000)
    p.set_defaults(func=cmd_basin_image)

    p = sub.add_parser("orbit-trace", help="per-iterate coordinate trace (CSV)")
    common(p)
    p.add_argument("--field", choices=["real", "complex"], default="complex")
    p.add_argument("--budget", type=parse_budget, default=10000)
    p.set_defaults(func=cmd_orbit_trace)

    p = sub.add_parser("rotation-sweep", help="rotation number vs c (CSV)")
    common(p, family=False)
    p.add_argument("--a", type=parse_scalar, required=True)
    p.add_argument("--b", type=parse_scalar, required=True)
    p.add_argument("--c-range", type=parse_range, required=True,
                   metavar="LO:HI:N")
    p.set_defaults(func=cmd_rotation_sweep)

    p = sub.add_parser("circle-find", help="locate the attracting circle pair")
    common(p)
    p.set_defaults(func=cmd_circle_find)

    p = sub.add_parser("ring-profile", help="Lyapunov profile of the ring family")
    common(p, family=False)
    p.add_argument("--alpha", type=parse_scalar, default=0.381966)
    p.add_argument("--r-coeffs", type=parse_scalar, nargs=3,
                   default=[1.0, 1.0, 0.3])
    p.add_argument("--scale", type=parse_scalar, default=1.0)
    p.add_argument("--rho-lo", type=parse_scalar, default=0.25)
    p.add_argument("--rho-hi", type=parse_scalar, default=4.0)
    p.add_argument("--n-rho", type=int, default=33)
    p.set_defaults(func=cmd_ring_profile)

    p = sub.add_parser("cassini-verify", help="contraction + trapping checks")
    common(p, family=False)
    p.add_argument("--k", type=parse_scalar, default=0.125)
    p.add_argument("--a", type=parse_scalar, default=0.0)
    p.add_argument("--samples", type=parse_budget, default=10**5)
    p.add_argument("--orbits", type=int, default=40)
    p.set_defaults(func=cmd_cassini_verify)

    p = sub.add_parser("identities", help="exact-identity residual suite")
    common(p, family=False)
    p.add_argument("--suite", default="all")
    p.set_defaults(func=cmd_identities)

    return ap


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Config file supplies defaults; explicit flags win (already parsed)."""
    if getattr(args, "config", None):
        conf = load_config(args.config)
        for key, val in conf.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                continue
            current = getattr(args, attr)
            if isinstance(current, bool):
                setattr(args, attr, val.lower() in ("1", "true", "yes"))
            elif isinstance(current, int):
                setattr(args, attr, int(float(val)))
            elif isinstance(current, float):
                setattr(args, attr, parse_scalar(val))
            elif isinstance(current, tuple):
                setattr(args, attr, parse_params(val))
            else:
                setattr(args, attr, val)


def _attach_negative_values(argv):
    """Glue '--flag -5/9,...' into '--flag=-5/9,...' so argparse accepts it."""
    if argv is None:
        argv = sys.argv[1:]
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok.startswith("--") and "=" not in tok and nxt
                and nxt.startswith("-") and len(nxt) > 1 and nxt[1].isdigit()):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_attach_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    _apply_config(args, parser)
    try:
        return args.func(args)
    except CurvedynError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
