"""Deterministic JSON/CSV writers and schema validation for reports."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .circle_map import ExpandingMap

FLOAT_FMT = ".17g"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _emit(obj, indent, out):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, k in enumerate(sorted(obj)):
            out.append(f"{pad}  {json.dumps(k)}: ")
            _emit(obj[k], indent + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad + "  ")
            _emit(v, indent + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, float):
        out.append(format(obj, FLOAT_FMT))
    else:
        out.append(json.dumps(obj))


def dumps(obj):
    """Canonical JSON: sorted keys, two-space indent, floats to 17 significant digits."""
    out = []
    _emit(_plain(obj), 0, out)
    return "".join(out) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def fmt(x):
    return format(float(x), FLOAT_FMT)


def write_csv(path, header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_schema(name):
    text = resources.files("lyapmin").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(obj, name):
    """Validate a JSON-ready object against a shipped schema."""
    import jsonschema

    jsonschema.validate(_plain(obj), load_schema(name))


# map files ---------------------------------------------------------------

def map_to_json(m):
    return dumps(m.to_dict())


def load_map(source):
    """An :class:`ExpandingMap` from a dict, a JSON string or a file path."""
    if isinstance(source, ExpandingMap):
        return source
    if isinstance(source, dict):
        d = source
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        d = json.loads(source)
    else:
        d = read_json(source)
    validate(d, "map")
    return ExpandingMap.from_dict(d)


# report payloads ----------------------------------------------------------

def catalog_rows(catalog):
    for o, gap, lyap in catalog.rows():
        yield [o.period, o.code_str, ";".join(fmt(p) for p in o.points), fmt(gap), fmt(lyap)]


def catalog_to_dict(catalog):
    return {
        "map_id": catalog.map_id,
        "max_period": catalog.max_period,
        "orbits": [
            {"period": o.period, "code": o.code_str, "points": list(o.points),
             "gap": gap, "lyap_avg": lyap}
            for o, gap, lyap in catalog.rows()
        ],
    }


def write_catalog(outdir, catalog):
    outdir = Path(outdir)
    write_csv(outdir / "orbits.csv", ["period", "code", "points", "gap", "lyap_avg"],
              catalog_rows(catalog))
    write_json(outdir / "orbits.json", catalog_to_dict(catalog))


def subaction_header(sub):
    return {"alpha": sub.alpha, "defect": sub.defect, "lip_f": sub.lip_f, "n": sub.n,
            "alpha_bracket": list(sub.alpha_bracket), "alpha_orbit": sub.alpha_orbit,
            "iterations": sub.iterations, "converged": sub.converged,
            "notes": list(sub.notes)}


def write_subaction(outdir, m, sub):
    outdir = Path(outdir)
    x = sub.f.grid
    F = sub.F(m)
    write_csv(outdir / "subaction.csv", ["x", "f", "F"],
              ([fmt(a), fmt(b), fmt(c)] for a, b, c in zip(x, sub.f.values, F)))
    write_json(outdir / "subaction.json", subaction_header(sub))


def orbit_to_dict(o):
    return {"period": o.period, "code": o.code_str, "points": list(o.points)}


def layer_to_dict(layer):
    return {"kind": layer.kind, "centers": list(layer.centers),
            "half_width": layer.half_width, "gammas": list(layer.gammas),
            "amplitude_scale": layer.amplitude_scale, "mollify_delta": layer.mollify_delta}


def plan_to_dict(plan):
    led = plan.ledger
    checks = [{"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds}
              for c in led.checks()]
    props = {k: v for k, v in plan.properties.items() if k != "relaxed"}
    return {
        "plan_id": plan.plan_id,
        "regime": plan.regime,
        "base_map": plan.base_map.to_dict(),
        "base_map_id": plan.base_map.map_id,
        "perturbed_map": plan.perturbed_map.to_dict(),
        "perturbed_map_id": plan.perturbed_map.map_id,
        "orbit": orbit_to_dict(plan.orbit),
        "ledger": led.to_dict(),
        "checks": checks,
        "relaxed": list(led.relaxed()),
        "bump": layer_to_dict(plan.bump),
        "bump_knots": list(plan.bump.knots()),
        "mollified_bump": layer_to_dict(plan.mollified_bump) if plan.mollified_bump else None,
        "subaction": subaction_header(plan.subaction),
        "E_size": plan.E_size,
        "identity_residual": plan.identity_residual,
        "properties": props,
    }


def error_to_dict(err):
    if hasattr(err, "to_dict"):
        return err.to_dict()
    return {"error": type(err).__name__, "message": str(err), "exit_status": 1, "details": {}}
