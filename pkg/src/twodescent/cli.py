"""Command-line entry point: ``twodescent {selmer,coverings,search,descend}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import is_prime
from .curve import CurveE2, CurveError, NotFullTwoTorsion, normalize
from .report import class_json, curve_json, descent_json, dumps, selmer_json
from .search import build_class, full_descent, search_quartic
from .selmer import compute_selmer

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_SCOPE = 2


@dataclass
class JobConfig:
    command: str
    curve: list
    height: int = 10_000
    precision: int = 20
    adjoin_primes: list[int] = field(default_factory=list)
    seed: int = 0
    fmt: str = "json"
    workers: int = 1

    def __post_init__(self):
        if self.height < 0:
            raise ValueError("height must be >= 0")
        bad = [p for p in self.adjoin_primes if not is_prime(p)]
        if bad:
            raise ValueError(f"not prime: {bad}")


def parse_curve(text: str) -> list[Fraction]:
    """Parse ``[a, b, ...]`` where entries are integers or ``"p/q"`` strings."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [t.strip().strip("'\"") for t in text.strip().strip("[]").split(",")]
    if not isinstance(data, list) or not data:
        raise CurveError(f"malformed curve: {text!r}")
    try:
        return [Fraction(str(v).strip()) for v in data]
    except (ValueError, ZeroDivisionError) as exc:
        raise CurveError(f"malformed curve: {text!r}") from exc


def _prime_list(text: str) -> list[int]:
    text = text.strip().strip("[]")
    return [int(t) for t in text.replace(",", " ").split()] if text else []


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twodescent", description="2-descent on elliptic curves with full rational 2-torsion")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("selmer", "local images and the 2-Selmer group"),
                        ("coverings", "conic pairs and reduced quartics for each Selmer class"),
                        ("search", "point search on each covering quartic"),
                        ("descend", "the full descent and rank bounds")):
        p = sub.add_parser(name, help=help_)
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--curve", help='a-invariants, e.g. "[0,0,0,-25,0]"')
        g.add_argument("--roots", help='roots of the cubic, e.g. "[0,5,-5]"')
        p.add_argument("--height", type=int, default=10_000)
        p.add_argument("--precision", type=int, default=20, help="p-adic working precision")
        p.add_argument("--adjoin-primes", type=_prime_list, default=[], help="extra primes for S")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--workers", type=int, default=1, help="threads for the point search")
    return ap


def config_from_args(args) -> JobConfig:
    curve = parse_curve(args.curve if args.curve is not None else args.roots)
    if args.curve is not None and len(curve) != 5:
        raise CurveError("--curve needs 5 a-invariants")
    if args.roots is not None and len(curve) != 3:
        raise CurveError("--roots needs 3 roots")
    return JobConfig(args.command, curve, args.height, args.precision, list(args.adjoin_primes),
                     args.seed, args.format, args.workers)


def _header(cfg: JobConfig):
    E, change = normalize(cfg.curve)
    sel = compute_selmer(E, seed=cfg.seed, extra_primes=cfg.adjoin_primes, precision=cfg.precision)
    out = {"curve": curve_json(E, change, cfg.curve)}
    out.update(selmer_json(sel))
    return E, sel, out


def cmd_selmer(cfg: JobConfig) -> dict:
    return _header(cfg)[2]


def cmd_coverings(cfg: JobConfig) -> dict:
    E, sel, out = _header(cfg)
    classes = []
    for xi in sel.elements():
        if not xi.is_identity:
            classes.append(class_json(build_class(E, xi, sel.ambient.places)))
    out["classes"] = classes
    return out


def cmd_search(cfg: JobConfig) -> dict:
    E, sel, out = _header(cfg)
    classes = []
    for xi in sel.elements():
        if xi.is_identity:
            continue
        res = build_class(E, xi, sel.ambient.places)
        if res.quartic_red is not None:
            res.search = search_quartic(res.quartic_red, cfg.height, workers=cfg.workers)
            res.search.mapped_points = [res.covering_point_to_curve(pt) for pt in res.search.points]
            res.status = "point_found" if res.search.points else "no_point"
        classes.append(class_json(res))
    out["classes"] = classes
    out["height"] = str(cfg.height)
    return out


def cmd_descend(cfg: JobConfig) -> dict:
    E, sel, out = _header(cfg)
    result = full_descent(E, H=cfg.height, seed=cfg.seed, extra_primes=cfg.adjoin_primes,
                          workers=cfg.workers, precision=cfg.precision, selmer=sel)
    verdict = descent_json(result)
    out["classes"] = [class_json(c) for c in result.classes]
    out["verdict"] = verdict
    for key in ("rank_lower", "rank_upper"):
        out[key] = verdict[key]
    return out


COMMANDS = {"selmer": cmd_selmer, "coverings": cmd_coverings, "search": cmd_search, "descend": cmd_descend}


def render_text(report: dict) -> str:
    lines = []
    c = report["curve"]
    lines.append(f"curve: {CurveE2(*(int(e) for e in c['roots']))}")
    lines.append("S: " + ", ".join(report["S"]))
    for place, img in report["local_images"].items():
        lines.append(f"  local image at {place}: dim {img['dim']}")
    lines.append(f"Selmer dim: {report['selmer_dim']}  basis: " +
                 " ".join(f"({a}, {b})" for a, b in report["selmer_basis"]))
    for cls in report.get("classes", []):
        line = f"  class ({cls['d1']}, {cls['d2']}): {cls['status']}"
        if "quartic_red" in cls:
            line += "  quartic " + " ".join(cls["quartic_red"])
        if cls.get("search"):
            line += f"  points {len(cls['search']['points'])}"
        lines.append(line)
    v = report.get("verdict")
    if v:
        lines.append(f"rank: {v['rank_lower']} <= r <= {v['rank_upper']}  unresolved classes: {v['unresolved']}")
        for P in v["generators"]:
            lines.append(f"  generator ({P[0]}, {P[1]})")
    else:
        lines.append(f"rank <= {report['rank_upper']}")
    return "\n".join(lines) + "\n"


def run(argv=None) -> tuple[int, str, str]:
    """Run the CLI; return (exit code, stdout text, stderr text)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        return EXIT_SCOPE, "", f"malformed curve or configuration: {exc}\n"
    try:
        report = COMMANDS[cfg.command](cfg)
    except NotFullTwoTorsion as exc:
        return EXIT_SCOPE, "", f"curve out of scope: {exc}\n"
    except CurveError as exc:
        return EXIT_SCOPE, "", f"malformed curve: {exc}\n"
    except Exception as exc:  # noqa: BLE001
        return EXIT_INTERNAL, "", f"internal error: {type(exc).__name__}: {exc}\n"
    text = dumps(report) if cfg.fmt == "json" else render_text(report)
    code = EXIT_INTERNAL if report.get("verdict", {}).get("partial") else EXIT_OK
    return code, text, ""


def main(argv=None) -> int:
    code, out, err = run(argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
