"""Command-line front end.

Every subcommand reads the map parameters from flags, a TOML config file, or
the canonical defaults (p=3, a=3, b=1/3), in that order of priority.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import acceptance
from .dimension import box_count, dimension_estimate, slope_within, theoretical_dimension
from .dynamics import backward_orbit, forward_orbit
from .errors import ConfigInvalid, InsufficientPrecision, InvalidParameters, PadicError
from .measure import equidistribution_report
from .padic import FieldParams, Point, format_digits
from .symbolic import (
    ItineraryWindow,
    conjugacy_residual,
    decode,
    decode_radius,
    encode,
    iter_windows,
    random_window,
)

DEFAULTS = {"p": 3, "a": "3", "b": "1/3", "precision": 40, "seed": 0, "format": None, "out": None}
COMMON_KEYS = tuple(DEFAULTS)


@dataclass
class RunConfig:
    p: int = 3
    a: str = "3"
    b: str = "1/3"
    precision: int = 40
    seed: int = 0
    out: str | None = None
    format: str | None = None
    acceptance: bool = False
    options: dict = field(default_factory=dict)

    def params(self) -> FieldParams:
        try:
            return FieldParams.from_literals(self.p, str(self.a), str(self.b), self.precision)
        except InvalidParameters as exc:
            raise ConfigInvalid(f"{exc} (the map needs 0 < |a| < 1 and |b| = p)") from None
        except (PadicError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from None


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"bad TOML in {path}: {exc}") from None


def merge_config(args: argparse.Namespace, file_cfg: dict) -> RunConfig:
    """Defaults, then the config file (top level, then the subcommand's table), then flags."""
    merged = dict(DEFAULTS)
    section = file_cfg.get(args.command, {}) if args.command else {}
    for source in (file_cfg, section):
        for key, value in source.items():
            if not isinstance(value, dict):
                merged[key.replace("-", "_")] = value
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config", "func"):
            merged[key] = value
    unknown_type = [k for k in ("p", "precision", "seed") if not isinstance(merged.get(k), int)]
    if unknown_type:
        raise ConfigInvalid(f"{', '.join(unknown_type)} must be integers")
    common = {k: merged.pop(k) for k in COMMON_KEYS}
    flag = bool(merged.pop("acceptance", False))
    return RunConfig(**common, acceptance=flag, options=merged)


# -- output -------------------------------------------------------------------


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(cfg: RunConfig, default: str) -> str:
    return cfg.format or default


def _scalar_text(u, digits: int | None = None) -> str:
    if u.is_exact and digits is None:
        return str(u.to_fraction())
    k = u.abs_prec if digits is None else digits
    return format_digits(u, k)


def embed_real(pt: Point, d: int) -> tuple[Fraction, Fraction]:
    """Read the first d digits of each coordinate as a base-p fraction in [0, 1)."""
    if pt.in_unit_polydisc() is not True:
        raise InsufficientPrecision("embedding needs a point certified in R^2")
    p = pt.p
    out = []
    for c in (pt.x, pt.y):
        if c.abs_prec is not None and c.abs_prec < d:
            raise InsufficientPrecision(f"need {d} digits, have {c.abs_prec}")
        out.append(sum((Fraction(c.digit(i), p ** (i + 1)) for i in range(d)), Fraction(0)))
    return out[0], out[1]


def scatter_svg(points, size: int = 512) -> str:
    dots = "\n".join(
        f'<circle cx="{float(u) * size:.3f}" cy="{(1 - float(v)) * size:.3f}" r="1.2"/>' for u, v in points)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">\n<rect width="{size}" height="{size}" fill="white"/>\n'
            f'<g fill="black">\n{dots}\n</g>\n</svg>\n')


def _parse_point(text: str, params: FieldParams, prec: int) -> Point:
    try:
        return Point.parse(text, params.p, prec)
    except (PadicError, ValueError) as exc:
        raise ConfigInvalid(f"bad point {text!r}: {exc}") from None


def _parse_range(text) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    text = str(text)
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


# -- subcommands --------------------------------------------------------------


def cmd_orbit(cfg: RunConfig) -> int:
    params = cfg.params()
    opts = cfg.options
    pt = _parse_point(opts.get("point") or "0,0", params, cfg.precision)
    back = int(opts.get("backward") or 0)
    seg = backward_orbit(pt, back, params) if back else forward_orbit(pt, int(opts.get("steps") or 10), params)
    if _fmt(cfg, "json") == "json":
        emit(cfg, seg.to_jsonl())
    else:
        rows = [(seg.k_min + i, _scalar_text(q.x), _scalar_text(q.y), q.prec) for i, q in enumerate(seg.points)]
        emit(cfg, _csv(rows, ["k", "x", "y", "prec"]))
    return 0


def cmd_encode(cfg: RunConfig) -> int:
    params = cfg.params()
    opts = cfg.options
    pt = _parse_point(opts.get("point") or "0,0", params, cfg.precision)
    w = encode(pt, int(opts.get("m") or 0), int(opts.get("n") or 0), params)
    if _fmt(cfg, "json") == "json":
        emit(cfg, json.dumps({"window": w.format(), "m": w.m, "n": w.n}) + "\n")
    else:
        emit(cfg, _csv([(w.format(), w.m, w.n)], ["window", "m", "n"]))
    return 0


def cmd_decode(cfg: RunConfig) -> int:
    params = cfg.params()
    opts = cfg.options
    text = opts.get("window")
    if not text:
        raise ConfigInvalid("decode needs --window")
    w = ItineraryWindow.parse(text, params.p)
    prec = opts.get("digits")
    d = decode(w, params, int(prec) if prec else None, method=opts.get("method") or "gs")
    rec = {"window": w.format(), "x": _scalar_text(d.point.x), "y": _scalar_text(d.point.y),
           "prec": d.point.prec, "radius": str(d.radius), "point": d.point.to_json()}
    if _fmt(cfg, "json") == "json":
        emit(cfg, json.dumps(rec, sort_keys=True) + "\n")
    else:
        emit(cfg, _csv([(rec["window"], rec["x"], rec["y"], rec["radius"])], ["window", "x", "y", "radius"]))
    return 0


def cmd_check_conjugacy(cfg: RunConfig) -> int:
    params = cfg.params()
    count = int(cfg.options.get("windows") or 500)
    depth = int(cfg.options.get("depth") or 6)
    rng = random.Random(cfg.seed)
    rows = []
    ok = True
    for i in range(count):
        w = random_window(rng, depth, depth, params.p)
        res = conjugacy_residual(w, params)
        bound = max(decode_radius(w.m, w.n, params), decode_radius(w.m + 1, w.n - 1, params))
        rows.append((i, w.format(), str(res), str(bound), int(res <= bound)))
        ok = ok and res <= bound
    worst = max((Fraction(r[2]) for r in rows), default=Fraction(0))
    if _fmt(cfg, "csv") == "json":
        emit(cfg, json.dumps({"windows": count, "depth": depth, "max_residual": str(worst), "passed": ok,
                              "rows": [dict(zip(["index", "window", "residual", "bound", "pass"], r))
                                       for r in rows]}, sort_keys=True) + "\n")
    else:
        emit(cfg, _csv(rows, ["index", "window", "residual", "bound", "pass"]))
    print(f"max residual {worst}; {'all within' if ok else 'NOT all within'} declared radii", file=sys.stderr)
    return 1 if cfg.acceptance and not ok else 0


def cmd_equidistribution(cfg: RunConfig) -> int:
    params = cfg.params()
    opts = cfg.options
    seeds = _parse_range(opts["seeds"]) if opts.get("seeds") else [cfg.seed]
    lengths = _parse_range(opts.get("word_lengths") or "1,2")
    tolerances = None
    if opts.get("tolerances"):
        tolerances = {L: float(t) for L, t in zip(lengths, str(opts["tolerances"]).split(","))}
    report = equidistribution_report(params, seeds, int(opts.get("N") or 10_000), lengths,
                                     float(opts.get("z_max") or 4.0), tolerances,
                                     basin=not opts.get("no_basin"))
    emit(cfg, report.to_json() if _fmt(cfg, "csv") == "json" else report.to_csv())
    print(f"equidistribution bands {'pass' if report.passed else 'FAIL'}", file=sys.stderr)
    return 1 if cfg.acceptance and not report.passed else 0


def cmd_dimension(cfg: RunConfig) -> int:
    params = cfg.params()
    depths = _parse_range(cfg.options.get("depths") or "1..4")
    cap = cfg.options.get("max_windows")
    series = box_count(depths, params, int(cap) if cap else None)
    alpha = theoretical_dimension(params)
    slope = dimension_estimate(series) if len(depths) >= 3 else None
    if _fmt(cfg, "csv") == "json":
        rec = series.to_json()
        rec["estimate"] = slope
        emit(cfg, json.dumps(rec, sort_keys=True) + "\n")
    else:
        emit(cfg, series.to_csv())
    msg = f"slope {slope:.4f}" if slope is not None else "slope n/a"
    print(f"{msg}; theoretical {float(alpha):.4f}", file=sys.stderr)
    ok = slope is not None and slope_within(series, alpha, Fraction(1, 10))
    return 1 if cfg.acceptance and not ok else 0


def cmd_embed(cfg: RunConfig) -> int:
    params = cfg.params()
    m = int(cfg.options.get("m") or 2)
    n = int(cfg.options.get("n") or 3)
    d = int(cfg.options.get("digits") or 4)
    pts = []
    for w in iter_windows(m, n, params.p):
        pt = decode(w, params, verify=False).point
        pts.append(embed_real(pt, d))
    pts = sorted(set(pts))
    if _fmt(cfg, "csv") == "svg":
        emit(cfg, scatter_svg(pts))
    elif cfg.format == "json":
        emit(cfg, json.dumps([[str(u), str(v)] for u, v in pts]) + "\n")
    else:
        emit(cfg, _csv([(f"{float(u):.10f}", f"{float(v):.10f}") for u, v in pts], ["u", "v"]))
    return 0


def cmd_acceptance(cfg: RunConfig) -> int:
    only = cfg.options.get("only")
    numbers = _parse_range(only) if only else None
    results = []
    for k in numbers or sorted(acceptance.CRITERIA):
        r = acceptance.run_criterion(k)
        print(r.line(), flush=True)
        results.append(r)
    if cfg.out:
        Path(cfg.out).write_text(json.dumps([r.__dict__ for r in results], indent=2) + "\n")
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "orbit": cmd_orbit,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "check-conjugacy": cmd_check_conjugacy,
    "equidistribution": cmd_equidistribution,
    "dimension": cmd_dimension,
    "embed": cmd_embed,
    "acceptance": cmd_acceptance,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--p", type=int, default=S, help="residue characteristic (prime)")
    common.add_argument("--a", default=S, help="parameter a, with 0 < |a| < 1")
    common.add_argument("--b", default=S, help="parameter b, with |b| = p")
    common.add_argument("--precision", type=int, default=S, help="default absolute precision in digits")
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--out", default=S, help="write output here instead of stdout")
    common.add_argument("--format", choices=["csv", "json", "svg"], default=S)
    common.add_argument("--acceptance", action="store_true", default=S,
                        help="exit nonzero when a contract band fails")
    common.add_argument("--config", default=S, help="TOML config file")

    parser = argparse.ArgumentParser(prog="padic-henon", parents=[common],
                                     description="Experiments with p-adic Henon maps and their attractors.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", parents=[common], help="forward or backward orbit dump")
    p.add_argument("--point", default=S, help='"x,y" as p-adic literals')
    p.add_argument("--steps", type=int, default=S)
    p.add_argument("--backward", type=int, default=S, help="backward steps instead of forward")

    p = sub.add_parser("encode", parents=[common], help="point to itinerary window")
    p.add_argument("--point", default=S)
    p.add_argument("--m", type=int, default=S)
    p.add_argument("--n", type=int, default=S)

    p = sub.add_parser("decode", parents=[common], help="itinerary window to point and radius")
    p.add_argument("--window", default=S, help='e.g. "21.0102"')
    p.add_argument("--digits", type=int, default=S, help="working precision")
    p.add_argument("--method", choices=["gs", "curves"], default=S)

    p = sub.add_parser("check-conjugacy", parents=[common], help="residual sweep over random windows")
    p.add_argument("--windows", type=int, default=S)
    p.add_argument("--depth", type=int, default=S)

    p = sub.add_parser("equidistribution", parents=[common], help="orbit word-frequency report")
    p.add_argument("--seeds", default=S, help='e.g. "1..10" or "1,4,9"')
    p.add_argument("--N", type=int, default=S, help="orbit length")
    p.add_argument("--word-lengths", dest="word_lengths", default=S)
    p.add_argument("--z-max", dest="z_max", type=float, default=S)
    p.add_argument("--tolerances", default=S, help="absolute bands per word length, e.g. 0.02,0.015")
    p.add_argument("--no-basin", dest="no_basin", action="store_true", default=S)

    p = sub.add_parser("dimension", parents=[common], help="ball counts and slope")
    p.add_argument("--depths", default=S, help='e.g. "1..4"')
    p.add_argument("--max-windows", dest="max_windows", type=int, default=S)

    p = sub.add_parser("embed", parents=[common], help="real scatter of decoded attractor points")
    p.add_argument("--m", type=int, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--digits", type=int, default=S)

    p = sub.add_parser("acceptance", parents=[common], help="run the acceptance criteria")
    p.add_argument("--only", default=S, help='criterion numbers, e.g. "1,2,7"')
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args, load_config(getattr(args, "config", None)))
        return COMMANDS[args.command](cfg)
    except ConfigInvalid as exc:
        print(f"padic-henon {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except PadicError as exc:
        print(f"padic-henon {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
