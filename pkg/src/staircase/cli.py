"""Command-line entry point: ``staircase <command> ...``.

Exit status is 0 on success, 1 on a domain error, 2 on a usage error and 3
when extended precision is requested but the compiled kernels are missing.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from staircase import __version__
from staircase import flatsurf as fs
from staircase import surgery
from staircase.asymptotics import PROPS, FitError, run_expansion_check
from staircase.probe import PROBE_EXTENDED, PROBE_STANDARD, nonsmooth_scan
from staircase.sc import kernels
from staircase.sc.dd import DD
from staircase.sc.engine import (
    STANDARD,
    AccessoryConfig,
    QuadratureSettings,
    SCError,
    SideLengths,
    constants_PQ,
    forward,
    solve_accessory,
)

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_NO_EXTENDED = 0, 1, 2, 3

CONFIG_KEYS = {"rel": float, "abs": float, "max_depth": int, "max_intervals": int, "precision": str,
               "tol": float, "eps_sep": float, "jobs": int}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return '"' + repr(x) + '"'
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, DD):
        return float(obj)
    if isinstance(obj, Fraction):
        return fs._rat_str(obj)
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def to_json(obj, indent: int = 2, level: int = 0) -> str:
    """JSON with every float at 17 significant digits and keys in insertion order."""
    import json

    obj = _plain(obj)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, int) or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + ("" if text.endswith("\n") else "\n"))
    else:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))


def _write_csv(path: str, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row])
    Path(path).write_text(buf.getvalue())


def _csv_path(args, default_suffix=".csv") -> str | None:
    if getattr(args, "csv", None):
        return args.csv
    if getattr(args, "out", None):
        return str(Path(args.out).with_suffix(default_suffix))
    return None


class Manifest:
    """Reproducibility record embedded in every JSON artifact."""

    def __init__(self, argv, settings: dict):
        self.argv = list(argv)
        self.settings = settings
        self.start = time.perf_counter()
        self.errors: dict = {}

    def as_dict(self) -> dict:
        return {
            "command": self.argv,
            "version": __version__,
            "backend": kernels.BACKEND_NAME,
            "settings": self.settings,
            "wall_time_s": time.perf_counter() - self.start,
            "error_estimates": self.errors,
        }


# ---------------------------------------------------------------------------
# settings


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[staircase]\n" + Path(path).read_text())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from exc
    out = {}
    for key, raw in parser["staircase"].items():
        if key not in CONFIG_KEYS:
            raise UsageError(f"--config: unknown key {key!r}; expected one of {', '.join(CONFIG_KEYS)}")
        try:
            out[key] = CONFIG_KEYS[key](raw.strip().strip('"').strip("'"))
        except ValueError as exc:
            raise UsageError(f"--config: bad value for {key}: {raw!r}") from exc
    return out


def _settings(args, base: QuadratureSettings = STANDARD) -> QuadratureSettings:
    cfg = args.config_values
    precision = getattr(args, "precision", None) or cfg.get("precision", base.precision)
    if precision == "extended":
        if not kernels.has_extended():
            raise kernels.ExtendedPrecisionUnavailable("extended precision needs the compiled kernels")
        base = PROBE_EXTENDED if base is PROBE_STANDARD else QuadratureSettings.extended()
    rel = getattr(args, "rel", None) or cfg.get("rel", base.rel)
    abs_ = getattr(args, "abs_tol", None) or cfg.get("abs", base.abs)
    return QuadratureSettings(
        rel=rel,
        abs=abs_,
        max_depth=cfg.get("max_depth", base.max_depth),
        max_intervals=cfg.get("max_intervals", base.max_intervals),
        precision=precision,
    )


def _jobs(args) -> int:
    return args.jobs if args.jobs is not None else args.config_values.get("jobs", 1)


def _parse_rational_list(text: str):
    try:
        return [fs.as_rational(x.strip()) for x in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"expected a comma-separated list of rationals, got {text!r}") from exc


# ---------------------------------------------------------------------------
# commands


def _lengths_dict(L: SideLengths) -> dict:
    return {
        "a": L.a, "b": L.b, "c": L.c, "p": L.p, "q": L.q,
        "residuals": {"closure_vertical": L.closure_vertical, "closure_horizontal": L.closure_horizontal},
        "errors": L.errors,
        "converged": L.converged,
    }


def cmd_forward(args, man: Manifest):
    settings = _settings(args)
    man.settings.update(settings.as_dict())
    cfg = AccessoryConfig(args.xi1, args.xi2, args.xi3, args.s, args.t)
    L = forward(cfg, settings, eps_sep=args.config_values.get("eps_sep", 1e-12))
    man.errors = L.errors
    return _lengths_dict(L)


def cmd_solve(args, man: Manifest):
    settings = _settings(args)
    tol = args.tol or args.config_values.get("tol", 1e-8)
    man.settings.update(settings.as_dict(), tol=tol)
    target = SideLengths(args.a, args.b, args.c, args.p, args.q)
    res = solve_accessory(target, settings, tol=tol, eps_sep=args.config_values.get("eps_sep", 1e-12))
    man.errors = res.lengths.errors
    return {"config": res.config.as_floats(), "residual": res.residual, "iterations": res.iterations,
            "lengths": _lengths_dict(res.lengths)}


def cmd_coeffs(args, man: Manifest):
    settings = _settings(args)
    man.settings.update(settings.as_dict())
    P, Q = constants_PQ(AccessoryConfig(args.xi1, args.xi2, args.xi3), settings)
    return {"P_const": P, "Q_const": Q}


def cmd_fit(args, man: Manifest):
    settings = _settings(args)
    man.settings.update(settings.as_dict(), kmin=args.kmin, kmax=args.kmax, jobs=_jobs(args))
    base = AccessoryConfig(args.xi1, args.xi2, args.xi3)
    rep = run_expansion_check(args.prop, base, args.kmin, args.kmax, settings, n_jobs=_jobs(args))
    path = _csv_path(args)
    if path:
        _write_csv(path, ("quantity", "axis", "s_or_t", "value", "model"), rep.csv_rows())
    return rep.as_dict()


def cmd_probe(args, man: Manifest):
    settings = _settings(args, PROBE_STANDARD)
    man.settings.update(settings.as_dict(), kmin=args.kmin, kmax=args.kmax, jobs=_jobs(args))
    scan = nonsmooth_scan(args.a0, args.p0, args.q0, args.kmin, args.kmax, settings, n_jobs=_jobs(args),
                          tol=args.tol or args.config_values.get("tol"), with_delta=not args.no_delta)
    path = _csv_path(args)
    if path:
        _write_csv(path, ("h", "F", "D", "D_over_h2", "model"), scan.csv_rows())
    return scan.as_dict()


def _read_surface(path: str) -> fs.FlatSurface:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"--input: cannot read {path}: {exc}") from exc
    return fs.loads(text)


def cmd_surface(args, man: Manifest):
    op = args.surface_cmd
    if op == "build":
        if args.kind == "staircase":
            dims = [getattr(args, k) for k in "abcpq"]
            if None in dims:
                raise UsageError("surface build staircase needs --a --b --c --p --q")
            surf = fs.build_staircase(fs.StaircaseSpec(*(fs.as_rational(x) for x in dims)))
        elif args.kind == "rect":
            if None in (args.a, args.p, args.q):
                raise UsageError("surface build rect needs --a --p --q")
            surf = fs.build_rect_marked(*(fs.as_rational(x) for x in (args.a, args.p, args.q)))
        else:
            if not args.widths or not args.heights:
                raise UsageError(f"surface build {args.kind} needs --widths and --heights")
            surf = fs.build_pillowcase(args.kind[-1], _parse_rational_list(args.widths),
                                       _parse_rational_list(args.heights))
        return fs.to_json_obj(surf)
    surf = _read_surface(args.input)
    if op == "act":
        return fs.to_json_obj(fs.polydisk_act(surf, args.cyl, (fs.as_rational(args.re), fs.as_rational(args.im))))
    if op == "rot":
        return fs.to_json_obj(fs.rot(surf))
    if op == "trace":
        dec = fs.trace_vertical(surf)
        if isinstance(dec, fs.NonPeriodic):
            raise fs.VerticalNotPeriodic(dec)
        return {
            "circumferences": dec.circumferences,
            "area": dec.area,
            "cylinders": [{"circumference": c.circumference, "width": c.width,
                           "chain": [list(link) for link in c.chain]} for c in dec.cylinders],
            "rectangles": [{"circle": r.cyl, "left": r.left, "width": r.width, "height": r.height}
                           for r in dec.rectangles],
        }
    # stratum
    return {"stratum": list(fs.stratum(surf)), "area": fs.area_total(surf), "invariants": fs.check_invariants(surf)}


def cmd_surgery(args, man: Manifest):
    surf = _read_surface(args.input)
    out, trace = surgery.run(args.script, surf)
    obj = trace.to_json()
    obj["is_staircase"] = surgery.is_staircase(out)
    obj["scale_factor"] = trace.scale_factor()
    return obj


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="staircase", description="Staircase surfaces, Schwarz-Christoffel side lengths and probes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--jobs", type=int, default=None, help="worker processes for grid sweeps")
    p.add_argument("--config", help="key=value file presetting tolerances (flags override)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def quad(sp, tol=False):
        sp.add_argument("--precision", choices=("standard", "extended"))
        sp.add_argument("--rel", type=float, help="relative quadrature tolerance")
        sp.add_argument("--abs-tol", dest="abs_tol", type=float, help="absolute quadrature tolerance")
        if tol:
            sp.add_argument("--tol", type=float, help="solver tolerance")
        sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = sub.add_parser("forward", help="side lengths from prevertices")
    for k in ("xi1", "xi2", "xi3"):
        sp.add_argument(f"--{k}", type=float, required=True)
    sp.add_argument("--s", type=float, default=0.0)
    sp.add_argument("--t", type=float, default=0.0)
    quad(sp)
    sp.set_defaults(func=cmd_forward)

    sp = sub.add_parser("solve", help="prevertices from side lengths")
    for k in "abcpq":
        sp.add_argument(f"--{k}", type=float, required=True)
    quad(sp, tol=True)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("coeffs", help="P and Q constants at a rectangle base")
    for k in ("xi1", "xi2", "xi3"):
        sp.add_argument(f"--{k}", type=float, required=True)
    quad(sp)
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("fit", help="asymptotic coefficient extraction")
    sp.add_argument("--prop", required=True, type=str.upper, choices=PROPS)
    sp.add_argument("--xi1", type=float, default=-0.5)
    sp.add_argument("--xi2", type=float, default=0.0)
    sp.add_argument("--xi3", type=float, default=0.5)
    sp.add_argument("--kmin", type=int, default=10)
    sp.add_argument("--kmax", type=int, default=30)
    sp.add_argument("--csv", help="CSV of (s_or_t, value, model); default next to --out")
    quad(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("probe", help="second differences of the area along the rectangle family")
    sp.add_argument("--a0", type=float, default=1.0)
    sp.add_argument("--p0", type=float, default=1 / 3)
    sp.add_argument("--q0", type=float, default=1 / 3)
    sp.add_argument("--kmin", type=int, default=8)
    sp.add_argument("--kmax", type=int, default=16)
    sp.add_argument("--no-delta", action="store_true", help="skip the two-variable polynomial fit")
    sp.add_argument("--csv", help="CSV of (h, F, D, D/h^2, model); default next to --out")
    quad(sp, tol=True)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("surface", help="flat-surface operations")
    ssub = sp.add_subparsers(dest="surface_cmd", required=True, parser_class=_Parser)
    b = ssub.add_parser("build")
    b.add_argument("kind", choices=("staircase", "rect", "pillow-b", "pillow-c"))
    for k in "abcpq":
        b.add_argument(f"--{k}")
    b.add_argument("--widths", help="comma-separated, e.g. 1,1/2,3/4")
    b.add_argument("--heights")
    b.add_argument("--out")
    a = ssub.add_parser("act")
    a.add_argument("--input", required=True)
    a.add_argument("--cyl", type=int, required=True)
    a.add_argument("--re", default="0")
    a.add_argument("--im", default="1")
    a.add_argument("--out")
    for name in ("rot", "trace", "stratum"):
        x = ssub.add_parser(name)
        x.add_argument("--input", required=True)
        x.add_argument("--out")
    sp.set_defaults(func=cmd_surface)

    sp = sub.add_parser("surgery", help="scripted pillowcase reductions")
    gsub = sp.add_subparsers(dest="surgery_cmd", required=True, parser_class=_Parser)
    r = gsub.add_parser("run")
    r.add_argument("script", choices=("fig4", "fig5"))
    r.add_argument("--input", required=True)
    r.add_argument("--out")
    sp.set_defaults(func=cmd_surgery)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.config_values = _load_config(args.config)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    man = Manifest(["staircase", *argv], {})
    try:
        result = args.func(args, man)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except kernels.ExtendedPrecisionUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_EXTENDED
    except (SCError, fs.FlatSurfaceError, FitError, ValueError, IndexError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    result = dict(result)
    result["manifest"] = man.as_dict()
    _write(to_json(result), getattr(args, "out", None))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
