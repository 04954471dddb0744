"""JSON-ready reports.  Every number is emitted as a decimal string."""

from __future__ import annotations

import json
from fractions import Fraction

from .curve import CoordinateChange, CurveE2, PointE
from .search import ClassResult, DescentResult, SearchReport, height_ratio
from .selmer import SelmerResult


def num(v) -> str:
    return str(Fraction(v)) if isinstance(v, Fraction) else str(v)


def point_json(P: PointE):
    return "O" if P.is_infinity else [num(P.x), num(P.y)]


def curve_json(E: CurveE2, change: CoordinateChange | None = None, source=None) -> dict:
    out = {
        "roots": [num(e) for e in E.roots],
        "a_invariants": [num(a) for a in E.a_invariants()],
        "discriminant": num(E.discriminant),
    }
    if source is not None:
        out["input"] = [num(Fraction(v)) for v in source]
    if change is not None:
        out["coordinate_change"] = {k: num(getattr(change, k)) for k in ("u", "r", "s", "t")}
    return out


def selmer_json(sel: SelmerResult) -> dict:
    diag = sel.diagnostics()
    return {
        "S": [str(v) for v in sel.ambient.places],
        "ambient_generators": [[num(c), num(b)] for c, b in diag["ambient_generators"]],
        "local_images": {
            place: {
                "dim": num(info["dim"]),
                "samples": num(info["samples"]),
                "points": num(info["points"]),
                "basis": [[num(b) for b in vec] for vec in info["basis"]],
            }
            for place, info in diag["local_images"].items()
        },
        "selmer_basis": [[num(a), num(b)] for a, b in diag["selmer_basis"]],
        "selmer_dim": num(sel.dim),
        "rank_upper": num(sel.dim - 2),
    }


def search_json(report: SearchReport, cls: ClassResult | None = None) -> dict:
    out = {
        "model": report.model,
        "height": num(report.height),
        "points": [[num(c) for c in pt] for pt in report.points],
        "pairs_examined": num(report.pairs_examined),
        "candidates": num(report.candidates),
    }
    if report.mapped_points:
        out["height_ratios"] = [f"{height_ratio(pt, P):.6f}" for pt, P in zip(report.points, report.mapped_points)]
    return out


def class_json(res: ClassResult) -> dict:
    m = res.conic_pair
    out = {
        "d1": num(res.element.d1.value),
        "d2": num(res.element.d2.value),
        "status": res.status,
        "conic_pair": {
            "d": [num(m.d1), num(m.d2), num(m.d3)],
            "t": num(m.t),
            **{k: [[num(i), num(j), num(c)] for i, j, c in v] for k, v in m.forms().items()},
        },
    }
    if res.error:
        out["error"] = res.error
    if res.covering is not None:
        cov = res.covering
        out["correspondence"] = {
            "base_point": [num(c) for c in cov.base_point],
            "u_of_st": [[num(c) for c in row] for row in cov.params],
            "u3": "y/d3",
        }
        out["quartic_raw"] = [num(c) for c in cov.quartic.coeffs]
        out["quartic_min"] = [num(c) for c in res.quartic_min.coeffs]
        out["quartic_red"] = [num(c) for c in res.quartic_red.coeffs]
        out["witnesses"] = {"minimize": res.witness_min.to_json(), "reduce": res.witness_red.to_json()}
        out["local_solubility"] = {k: bool(v) for k, v in res.local_solubility.items()}
    out["search"] = None if res.search is None else search_json(res.search, res)
    out["mapped_points"] = [] if res.search is None else [point_json(P) for P in res.search.mapped_points]
    return out


def descent_json(result: DescentResult) -> dict:
    v = result.verdict
    return {
        "selmer_dim": num(v.selmer_dim),
        "rank_lower": num(v.rank_lower),
        "rank_upper": num(v.rank_upper),
        "unresolved": num(v.unresolved_count),
        "unresolved_classes": [[num(x.d1.value), num(x.d2.value)] for x in v.unresolved],
        "generators": [point_json(P) for P in v.generators],
        "height": num(result.height),
        "partial": v.partial,
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
