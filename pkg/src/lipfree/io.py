"""JSON readers and writers for spaces, molecules, subsets and certificates.

Space files come in two flavours::

    {"points": ["a", "b", ...], "basepoint": "a", "dist": [[...], ...]}
    {"grid": {"dim": 2, "norm": "sup", "points": [[0, 0], ...], "basepoint": [0, 0]}}

Molecule files are ``{"terms": [{"point": "b", "coef": 1.5}, ...]}`` where a
point is a label or an integer coordinate list.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .krnorm import FlowCertificate
from .metric import Molecule, PointedMetricSpace, grid_space, norm_tag, validate_metric


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def _load(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _number(v):
    if isinstance(v, bool):
        raise InputError(f"not a number: {v!r}")
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v) if "/" in v else float(v)
        except ValueError as exc:
            raise InputError(f"not a number: {v!r}") from exc
    raise InputError(f"not a number: {v!r}")


def space_from_json(data: dict) -> PointedMetricSpace:
    if "grid" in data:
        g = data["grid"]
        try:
            dim = int(g["dim"])
            pts = [tuple(int(c) for c in p) for p in g["points"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad grid space: {exc}") from exc
        if any(len(p) != dim for p in pts):
            raise InputError(f"grid points must have dimension {dim}")
        base = tuple(int(c) for c in g.get("basepoint", (0,) * dim))
        if base not in pts:
            raise InputError(f"basepoint {base} is not among the points")
        try:
            return grid_space(pts, norm_tag(g.get("norm", "sup")), basepoint=base)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    try:
        labels = [str(p) for p in data["points"]]
        dist = data["dist"]
    except (KeyError, TypeError) as exc:
        raise InputError("space needs 'points' and 'dist' (or 'grid')") from exc
    if len(set(labels)) != len(labels):
        raise InputError("point labels must be distinct")
    base = str(data.get("basepoint", labels[0]))
    if base not in labels:
        raise InputError(f"basepoint {base!r} is not among the points")
    D = np.array([[float(_number(v)) for v in row] for row in dist])
    if D.shape != (len(labels), len(labels)):
        raise InputError(f"dist must be {len(labels)}x{len(labels)}, got {D.shape}")
    if np.all(D == np.round(D)):
        D = D.astype(np.int64)
    space = PointedMetricSpace(tuple(labels), D, basepoint=labels.index(base))
    rep = validate_metric(space)
    if not rep.passed:
        bad = rep.failures()[0]
        raise InputError(f"not a metric: {bad.check} fails at {bad.witness}")
    return space


def molecule_from_json(data: dict, space: PointedMetricSpace | None = None) -> Molecule:
    try:
        terms = data["terms"]
        pairs = []
        for t in terms:
            p = t["point"]
            key = tuple(int(c) for c in p) if isinstance(p, list) else str(p)
            pairs.append((key, _number(t["coef"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad molecule: {exc}") from exc
    mol = Molecule(tuple(pairs))
    if space is not None:
        for k, _ in pairs:
            try:
                space.index(k)
            except (KeyError, ValueError, IndexError) as exc:
                raise InputError(f"molecule point {k!r} is not in the space") from exc
    return mol


def _keys(raw) -> list:
    return [tuple(int(c) for c in p) if isinstance(p, list) else str(p) for p in raw]


def subset_from_json(data, space: PointedMetricSpace) -> list[int]:
    raw = data["points"] if isinstance(data, dict) else data
    try:
        return sorted({space.index(k) for k in _keys(raw)})
    except (KeyError, ValueError, IndexError) as exc:
        raise InputError(f"subset point not in the space: {exc}") from exc


def clusters_from_json(data, space: PointedMetricSpace):
    """``{"clusters": [{"points": [...], "molecule": {...}}, ...]}``."""
    try:
        items = data["clusters"]
        clusters = [sorted({space.index(k) for k in _keys(c["points"])}) for c in items]
        molecules = [molecule_from_json(c["molecule"], space) for c in items]
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"bad clusters file: {exc}") from exc
    return clusters, molecules


def load_space(path) -> PointedMetricSpace:
    return space_from_json(_load(path))


def load_molecule(path, space=None) -> Molecule:
    return molecule_from_json(_load(path), space)


def load_subset(path, space) -> list[int]:
    return subset_from_json(_load(path), space)


def load_clusters(path, space):
    return clusters_from_json(_load(path), space)


def _plain(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def certificate_to_json(cert: FlowCertificate, space: PointedMetricSpace) -> dict:
    label = lambda i: list(space.points[i]) if isinstance(space.points[i], tuple) else space.points[i]
    return {
        "value": _plain(cert.value),
        "dual_value": _plain(cert.dual_value),
        "gap": _plain(cert.gap),
        "exact": bool(cert.exact),
        "plan": [{"from": label(i), "to": label(j), "amount": _plain(m)}
                 for (i, j), m in sorted(cert.plan.items())],
        "potentials": [{"point": label(i), "value": _plain(v)}
                       for i, v in enumerate(cert.potentials)],
        "slack": [label(i) for i in sorted(cert.slack)],
        "dropped": [label(i) for i in cert.dropped],
    }


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def space_to_json(space: PointedMetricSpace) -> dict:
    if space.coords is not None:
        return {"grid": {"dim": int(space.coords.shape[1]), "norm": space.norm,
                         "points": space.coords.tolist(),
                         "basepoint": space.coords[space.basepoint].tolist()}}
    return {"points": [str(p) for p in space.points],
            "basepoint": str(space.points[space.basepoint]),
            "dist": space.dist.tolist()}
