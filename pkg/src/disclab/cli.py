"""Command-line front end: construction, verification, norms, and studies.

Outputs are deterministic for a fixed configuration (seed included): no
timestamps, sorted JSON keys, and every artifact embeds the tool version
plus a hash of the resolved configuration.

Exit codes: 0 pass, 1 assertion failure, 2 usage error, 3 resource
budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .discrepancy import DEFAULT_STAR_BUDGET, l2_warnock, star_discrepancy
from .errors import DomainError, ParseError, ResourceLimitError
from .families import BUILTIN_NAMES, builtin_spec
from .gf2net import (
    DEFAULT_RANK_BUDGET,
    DigitalNetSpec,
    PointSet,
    box_point_counts,
    digital_points,
    minimal_t,
    read_matrices,
    read_point_set,
    write_point_set,
)
from .haar import DEFAULT_TABLE_BUDGET, coefficient_table, parseval_l2
from .norms import (
    DEFAULT_LP_BUDGET,
    DEFAULT_P_GRID,
    BmoFamily,
    OrliczSpec,
    bmo_proxy,
    lp_norm_exact,
    orlicz_norm_direct,
    orlicz_norm_proxy,
)
from .verify import check_empty_boxes, scaling_study

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _config_hash(args: argparse.Namespace) -> str:
    payload = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    blob = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _meta(args: argparse.Namespace) -> dict:
    meta = {"tool": f"disclab {__version__}", "config_hash": _config_hash(args)}
    if getattr(args, "seed", None) is not None:
        meta["seed"] = args.seed
    return meta


def _csv_header(args: argparse.Namespace) -> str:
    return f"# disclab {__version__} config={_config_hash(args)}\n"


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_spec(source: str, n: int | None, d: int, sigma: int) -> DigitalNetSpec:
    if os.path.exists(source):
        return read_matrices(Path(source).read_text())
    if n is None:
        raise DomainError("builtin constructions need --n")
    return builtin_spec(source, n, d, sigma)


def _load_points(source: str, args) -> PointSet:
    if os.path.exists(source):
        text = Path(source).read_text()
        first = text.split("\n", 1)[0].split()
        # matrix files have a 3-field header too; try point set first
        try:
            return read_point_set(text)
        except ParseError:
            return digital_points(read_matrices(text))
    spec = _load_spec(source, args.n, args.d, args.sigma)
    return digital_points(spec)


# -- subcommands -------------------------------------------------------------

def cmd_gen(args) -> int:
    spec = _load_spec(args.source, args.n, args.d, args.sigma)
    ps = digital_points(spec)
    _write(args.out, write_point_set(ps))
    info = {
        "meta": _meta(args),
        "N": ps.n_points,
        "d": ps.d,
        "precision_bits": ps.precision_bits,
        "sigma": spec.sigma,
    }
    try:
        info["minimal_t"] = minimal_t(spec, budget=args.budget or DEFAULT_RANK_BUDGET)
    except ResourceLimitError:
        info["minimal_t"] = None
        info["minimal_t_note"] = "verification budget exceeded"
    print(json.dumps(info, sort_keys=True))
    return EXIT_PASS


def cmd_verify(args) -> int:
    verdict: dict = {"meta": _meta(args)}
    spec = None
    if os.path.exists(args.source):
        text = Path(args.source).read_text()
        try:
            ps = read_point_set(text)
        except ParseError:
            spec = read_matrices(text)
            ps = digital_points(spec)
    else:
        spec = _load_spec(args.source, args.n, args.d, args.sigma)
        ps = digital_points(spec)

    budget = args.budget or DEFAULT_RANK_BUDGET
    partial = False
    if spec is not None:
        try:
            if args.t is not None:
                verdict["passes_at_t"] = {
                    str(args.t): verify_net_order(spec, spec.sigma, args.t, budget=budget)
                }
            verdict["minimal_t"] = minimal_t(spec, budget=budget)
        except ResourceLimitError:
            verdict["minimal_t"] = None
            partial = True
    else:
        verdict["minimal_t"] = None
        verdict["note"] = "point-set input: net property needs generating matrices"

    n = ps.n_points.bit_length() - 1 if ps.n_points & (ps.n_points - 1) == 0 else None
    if n:
        max_counts = {}
        for shape in enumerate_shapes(ps.d, n):
            counts = box_point_counts(ps, shape)
            max_counts["|".join(map(str, shape))] = max(counts.values())
        verdict["max_box_counts_at_order_n"] = max_counts
    empty = check_empty_boxes(ps)
    verdict["empty_boxes_pass"] = empty["pass"]
    verdict["empty_boxes_n"] = empty["n"]
    verdict["partial"] = partial
    print(json.dumps(verdict, sort_keys=True))
    if not empty["pass"]:
        return EXIT_FAIL
    if args.t is not None and spec is not None:
        if not verdict["passes_at_t"][str(args.t)]:
            return EXIT_FAIL
    return EXIT_PASS


def cmd_coeffs(args) -> int:
    ps = _load_points(args.source, args)
    max_level = args.max_level if args.max_level is not None else ps.precision_bits
    dump_budget = args.budget or 10**6
    entries = (max_level + 2) ** ps.d * (1 << max(0, max_level)) ** 0  # shapes only
    table = coefficient_table(ps, max_level, budget=DEFAULT_TABLE_BUDGET)
    d = ps.d
    lines = [_csv_header(args).rstrip("\n")]
    cols = [f"j_{k + 1}" for k in range(d)] + [f"m_{k + 1}" for k in range(d)]
    cols += ["counting_num", "counting_exp", "linear_num", "linear_exp"]
    lines.append(",".join(cols))
    total = 0
    for shape in table.shapes():
        lin = table.linear_coeff(shape)
        exp, block = table._block(shape)
        bits = [max(j, 0) for j in shape]
        for m in itertools.product(*(range(1 << b) for b in bits)):
            packed = 0
            for mk, b in zip(m, bits):
                packed = (packed << b) | mk
            num = block.get(packed, 0)
            cnt = DyadicRational(num, exp) if num else DyadicRational(0)
            row = list(shape) + list(m) + [cnt.num, cnt.exp, lin.num, lin.exp]
            lines.append(",".join(map(str, row)))
            total += 1
            if total > dump_budget:
                raise ResourceLimitError("coefficient dump exceeds budget")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_PASS


def cmd_norms(args) -> int:
    which = [w.strip() for w in args.which.split(",") if w.strip()]
    if not which:
        raise UsageError("no norms requested (--which)")
    ps = _load_points(args.source, args)
    p_grid = _parse_p_grid(args.p_grid)
    results: dict[str, dict] = {}
    errors: dict[str, str] = {}
    for name in which:
        try:
            results[name] = _compute_norm(name, ps, args, p_grid).to_dict()
        except ResourceLimitError as exc:
            errors[name] = str(exc)
    out = {"meta": _meta(args), "norms": results}
    if errors:
        out["resource_errors"] = errors
    if "l2-warnock" in results and "l2-parseval" in results:
        out["parseval_warnock_delta"] = abs(
            results["l2-warnock"]["value"] - results["l2-parseval"]["value"]
        )
    text = json.dumps(out, sort_keys=True, indent=2) + "\n"
    _write(args.out, text)
    if args.format == "csv":
        rows = [_csv_header(args).rstrip("\n"), "norm,value,method,error_bound"]
        for name, rep in results.items():
            rows.append(f"{name},{rep['value']!r},{rep['method']},{rep['error_bound']}")
        _write(args.out + ".csv" if args.out and args.out != "-" else None,
               "\n".join(rows) + "\n")
    return EXIT_PASS


def _compute_norm(name: str, ps: PointSet, args, p_grid):
    budget = args.budget
    if name == "l2-warnock":
        return l2_warnock(ps)
    if name == "l2-parseval":
        return parseval_l2(coefficient_table(ps, budget=budget or DEFAULT_TABLE_BUDGET))
    if name == "star":
        return star_discrepancy(ps, budget=budget or DEFAULT_STAR_BUDGET)
    if name.startswith("lp:"):
        return lp_norm_exact(ps, int(name[3:]), budget=budget or DEFAULT_LP_BUDGET)
    if name == "orlicz-proxy":
        return orlicz_norm_proxy(ps, args.alpha, p_grid, budget=budget or DEFAULT_LP_BUDGET)
    if name == "orlicz-direct":
        return orlicz_norm_direct(ps, OrliczSpec(args.alpha), seed=args.seed)
    if name == "bmo-proxy":
        table = coefficient_table(ps, budget=budget or DEFAULT_TABLE_BUDGET)
        return bmo_proxy(table, BmoFamily(order_cap=args.order_cap))
    raise UsageError(f"unknown norm {name!r}")


def cmd_study(args) -> int:
    n_range = _parse_range(args.n_range)
    if len(n_range) < 4:
        raise UsageError("study needs an n-range of length >= 4 (e.g. 4..8)")
    study = scaling_study(args.construction, args.d, n_range, args.norm, seed=args.seed)
    csv_lines = [_csv_header(args).rstrip("\n"), "n,N,value,method"]
    for row in study.rows:
        csv_lines.append(f"{row['n']},{row['N']},{row['value']!r},{row['method']}")
    _write(args.out + ".csv" if args.out else None, "\n".join(csv_lines) + "\n")
    window_pass = True
    if args.window:
        lo, hi = (float(x) for x in args.window.split(","))
        window_pass = lo <= study.exponent <= hi
    summary = {
        "meta": _meta(args),
        "construction": study.construction,
        "d": study.d,
        "norm": study.norm,
        "exponent": study.exponent,
        "residual": study.residual,
        "window": args.window,
        "pass": window_pass,
    }
    _write(args.out + ".json" if args.out else None,
           json.dumps(summary, sort_keys=True, indent=2) + "\n")
    if not args.out:
        print(json.dumps(summary, sort_keys=True))
    return EXIT_PASS if window_pass else EXIT_FAIL


class UsageError(Exception):
    pass


def _parse_p_grid(text: str | None):
    if not text:
        return DEFAULT_P_GRID
    try:
        grid = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad p-grid {text!r}") from None
    if not grid:
        raise UsageError("empty p-grid")
    return grid


def _parse_range(text: str):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disclab",
        description="digital nets, exact discrepancy analysis, and norm studies",
    )
    parser.add_argument("--version", action="version", version=f"disclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=False):
        p.add_argument("--d", type=int, default=2, help="dimension for builtins")
        p.add_argument("--n", type=int, default=None, help="bit depth for builtins")
        p.add_argument("--sigma", type=int, default=1, help="order for builtins")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=None, help="work budget override")
        p.add_argument("--out", default=None if not needs_out else "-")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("gen", help="construct a point set and write it to a file")
    p.add_argument("source", help=f"matrix file or builtin ({', '.join(BUILTIN_NAMES)})")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="net-property and box-count verdict")
    p.add_argument("source", help="matrix file, point-set file, or builtin name")
    p.add_argument("--t", type=int, default=None, help="check this quality parameter")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coeffs", help="dump the exact Haar coefficient table as CSV")
    p.add_argument("source")
    p.add_argument("--max-level", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("norms", help="compute norms of the discrepancy function")
    p.add_argument("source")
    p.add_argument("--which", required=True,
                   help="comma list: l2-warnock,l2-parseval,star,lp:<p>,"
                        "orlicz-proxy,orlicz-direct,bmo-proxy")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--p-grid", default=None)
    p.add_argument("--order-cap", type=int, default=2)
    common(p)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("study", help="scaling study over a net family")
    p.add_argument("--construction", required=True)
    p.add_argument("--n-range", required=True, help="e.g. 4..10 or 4,6,8,10")
    p.add_argument("--norm", required=True,
                   choices=("l2", "star", "bmo_proxy", "bmo_lower", "orlicz_proxy"))
    p.add_argument("--window", default=None, help="pass window for the exponent: lo,hi")
    common(p)
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
