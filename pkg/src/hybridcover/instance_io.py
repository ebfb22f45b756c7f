"""Instance and solution documents, random instance generation, CSV ingestion.

Documents are JSON with a versioned schema; unknown fields are rejected so
that typos fail loudly.  The generator is pinned to numpy's PCG64 so that a
seed identifies an instance across platforms.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import InputError
from .geometry import L2, NormSpec
from .model import (
    Assignment,
    ContinuousTypeSpec,
    DiscreteTypeSpec,
    Instance,
    Solution,
    make_instance,
)
from .solvers import SolveReport

INSTANCE_FORMAT = "hybridcover-instance"
SOLUTION_FORMAT = "hybridcover-solution"
SCHEMA_VERSION = 1


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise InputError(f"{where}: unknown fields {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InputError(f"{where}: missing fields {sorted(missing)}")


def _norm_from_doc(doc: dict, where: str) -> NormSpec:
    if not isinstance(doc, dict):
        raise InputError(f"{where}: norm must be an object")
    _require_keys(doc, {"kind", "tau"}, {"kind"}, where)
    return NormSpec(doc["kind"], doc.get("tau"))


def _norm_to_doc(norm: NormSpec) -> dict:
    doc = {"kind": norm.kind}
    if norm.tau is not None:
        doc["tau"] = norm.tau
    return doc


def parse_instance(text: str | dict) -> Instance:
    """Parse an instance document (JSON text or an already-decoded dict)."""
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"instance document is not valid JSON: {exc}") from exc
    else:
        doc = text
    if not isinstance(doc, dict):
        raise InputError("instance document must be a JSON object")
    _require_keys(
        doc,
        {"format", "version", "name", "seed", "dimension", "demand",
         "discrete_types", "continuous_types"},
        {"format", "version", "dimension", "demand", "discrete_types",
         "continuous_types"},
        "instance",
    )
    if doc["format"] != INSTANCE_FORMAT:
        raise InputError(f"unexpected document format {doc['format']!r}")
    if doc["version"] != SCHEMA_VERSION:
        raise InputError(f"unsupported schema version {doc['version']!r}")

    demand = []
    for i, entry in enumerate(doc["demand"]):
        where = f"demand[{i}]"
        if not isinstance(entry, dict):
            raise InputError(f"{where}: expected an object")
        _require_keys(entry, {"coords", "weight"}, {"coords", "weight"}, where)
        demand.append((entry["coords"], entry["weight"]))

    d_specs = []
    for t, entry in enumerate(doc["discrete_types"]):
        where = f"discrete_types[{t}]"
        _require_keys(entry, {"sites", "count"}, {"sites", "count"}, where)
        sites, radii = [], []
        for j, site in enumerate(entry["sites"]):
            _require_keys(site, {"coords", "radius"}, {"coords", "radius"}, f"{where}.sites[{j}]")
            sites.append(tuple(site["coords"]))
            radii.append(site["radius"])
        d_specs.append(DiscreteTypeSpec(tuple(sites), tuple(radii), entry["count"]))

    c_specs = []
    for t, entry in enumerate(doc["continuous_types"]):
        where = f"continuous_types[{t}]"
        _require_keys(entry, {"norm", "radius", "count"}, {"norm", "radius", "count"}, where)
        c_specs.append(
            ContinuousTypeSpec(_norm_from_doc(entry["norm"], f"{where}.norm"),
                               entry["radius"], entry["count"])
        )

    return make_instance(
        demand,
        d_specs,
        c_specs,
        name=doc.get("name", ""),
        seed=doc.get("seed"),
    )


def instance_to_document(instance: Instance) -> dict:
    doc = {
        "format": INSTANCE_FORMAT,
        "version": SCHEMA_VERSION,
    }
    if instance.name:
        doc["name"] = instance.name
    if instance.seed is not None:
        doc["seed"] = instance.seed
    doc["dimension"] = instance.dimension
    doc["demand"] = [
        {"coords": list(p), "weight": w}
        for p, w in zip(instance.points, instance.weights)
    ]
    doc["discrete_types"] = [
        {
            "count": spec.count,
            "sites": [
                {"coords": list(s), "radius": r}
                for s, r in zip(spec.sites, spec.radii)
            ],
        }
        for spec in instance.discrete_types
    ]
    doc["continuous_types"] = [
        {"norm": _norm_to_doc(spec.norm), "radius": spec.radius, "count": spec.count}
        for spec in instance.continuous_types
    ]
    return doc


def emit_instance(instance: Instance) -> str:
    return json.dumps(instance_to_document(instance), indent=2) + "\n"


def generate_instance(
    seed: int,
    n: int,
    box=((0.0, 1.0), (0.0, 1.0)),
    discrete=((2, 0.2),),
    continuous=((2, 0.1, L2),),
    name: str | None = None,
) -> Instance:
    """Uniform demand points in a box from a seeded PCG64 stream, unit
    weights, and discrete candidate sites defaulting to the demand points.

    ``discrete`` entries are ``(count, radius)`` pairs (sites = demand
    points); ``continuous`` entries are ``(count, radius, norm)`` triples.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if any(hi <= lo for lo, hi in box):
        raise InputError("box bounds must satisfy lo < hi")
    rng = np.random.default_rng(seed)
    d = len(box)
    raw = rng.random((n, d))
    lows = np.array([lo for lo, _ in box])
    spans = np.array([hi - lo for lo, hi in box])
    pts = lows + raw * spans
    demand = [(tuple(float(c) for c in row), 1.0) for row in pts]

    d_specs = [
        DiscreteTypeSpec(
            sites=tuple(p for p, _ in demand),
            radii=tuple(float(radius) for _ in demand),
            count=int(count),
        )
        for count, radius in discrete
    ]
    c_specs = [
        ContinuousTypeSpec(norm=norm, radius=float(radius), count=int(count))
        for count, radius, norm in continuous
    ]
    if name is None:
        name = f"rand-s{seed}-n{n}-d{d}"
    return make_instance(demand, d_specs, c_specs, name=name, seed=seed)


def demand_from_csv(text: str) -> list[tuple[tuple[float, ...], float]]:
    """Raw point lists: one ``x,y[,weight]`` row per line, optional header."""
    import csv as _csv
    import io as _io

    rows = [r for r in _csv.reader(_io.StringIO(text)) if r and any(f.strip() for f in r)]
    if not rows:
        raise InputError("empty CSV document")

    def is_float(s: str) -> bool:
        try:
            float(s)
            return True
        except ValueError:
            return False

    if not all(is_float(f) for f in rows[0]):
        rows = rows[1:]  # header row
    demand = []
    for k, row in enumerate(rows):
        if len(row) not in (2, 3):
            raise InputError(f"CSV row {k}: expected 'x,y[,weight]', got {row!r}")
        if not all(is_float(f) for f in row):
            raise InputError(f"CSV row {k}: non-numeric field in {row!r}")
        coords = (float(row[0]), float(row[1]))
        weight = float(row[2]) if len(row) == 3 else 1.0
        demand.append((coords, weight))
    return demand


def instance_from_csv(
    text: str,
    discrete=((2, 0.2),),
    continuous=((2, 0.1, L2),),
    name: str = "",
) -> Instance:
    """Wrap a raw CSV point list into an instance; discrete sites default to
    the demand points themselves."""
    demand = demand_from_csv(text)
    d_specs = [
        DiscreteTypeSpec(
            sites=tuple(p for p, _ in demand),
            radii=tuple(float(radius) for _ in demand),
            count=int(count),
        )
        for count, radius in discrete
    ]
    c_specs = [
        ContinuousTypeSpec(norm=norm, radius=float(radius), count=int(count))
        for count, radius, norm in continuous
    ]
    return make_instance(demand, d_specs, c_specs, name=name)


def solution_to_document(report: SolveReport, instance: Instance) -> dict:
    """Serialize a solve report.  Wall-clock timings are deliberately left
    out so that identical runs yield byte-identical documents."""
    asg = report.solution.assignment
    doc = {
        "format": SOLUTION_FORMAT,
        "version": SCHEMA_VERSION,
        "instance": instance.name,
        "method": report.method,
        "status": report.status,
        "objective": report.objective,
        "bound": report.bound,
        "gap": report.gap,
        "discrete": [
            {
                "open_sites": list(asg.open_sites[t]),
                "covered": [i for i, f in enumerate(asg.discrete_cover[t]) if f],
            }
            for t in range(len(instance.discrete_types))
        ],
        "continuous": [
            {
                "centers": [list(c) for c in report.solution.continuous_centers[t]],
                "covered": [
                    [i for i, f in enumerate(slot) if f]
                    for slot in asg.continuous_cover[t]
                ],
            }
            for t in range(len(instance.continuous_types))
        ],
        "counters": {
            "constraints": report.stats.constraint_count,
            "cuts": report.stats.cut_count,
            "nodes": report.stats.node_count,
            "callback_calls": report.stats.callback_calls,
        },
    }
    return doc


def emit_solution(report: SolveReport, instance: Instance) -> str:
    return json.dumps(solution_to_document(report, instance), indent=2) + "\n"


def parse_solution(text: str | dict, instance: Instance) -> tuple[Solution, dict]:
    """Rebuild a :class:`Solution` from a solution document; the second
    return value carries the metadata (method, status, bound, gap, counters)."""
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"solution document is not valid JSON: {exc}") from exc
    else:
        doc = text
    _require_keys(
        doc,
        {"format", "version", "instance", "method", "status", "objective",
         "bound", "gap", "discrete", "continuous", "counters"},
        {"format", "version", "method", "status", "objective", "discrete",
         "continuous"},
        "solution",
    )
    if doc["format"] != SOLUTION_FORMAT:
        raise InputError(f"unexpected document format {doc['format']!r}")
    if doc["version"] != SCHEMA_VERSION:
        raise InputError(f"unsupported schema version {doc['version']!r}")
    if len(doc["discrete"]) != len(instance.discrete_types):
        raise InputError("solution/instance mismatch: discrete type count")
    if len(doc["continuous"]) != len(instance.continuous_types):
        raise InputError("solution/instance mismatch: continuous type count")

    asg = Assignment.empty(instance)
    centers: list[list[tuple[float, ...]]] = []
    for t, entry in enumerate(doc["discrete"]):
        _require_keys(entry, {"open_sites", "covered"}, {"open_sites", "covered"},
                      f"discrete[{t}]")
        asg.open_sites[t] = sorted(int(j) for j in entry["open_sites"])
        for i in entry["covered"]:
            asg.discrete_cover[t][int(i)] = True
    for t, entry in enumerate(doc["continuous"]):
        _require_keys(entry, {"centers", "covered"}, {"centers", "covered"},
                      f"continuous[{t}]")
        centers.append([tuple(float(c) for c in p) for p in entry["centers"]])
        slots = entry["covered"]
        if len(slots) != len(asg.continuous_cover[t]):
            raise InputError(f"continuous[{t}]: wrong slot count")
        for k, members in enumerate(slots):
            for i in members:
                asg.continuous_cover[t][k][int(i)] = True

    objective = float(doc["objective"])
    if not math.isfinite(objective):
        raise InputError("solution objective must be finite")
    meta = {
        "method": doc["method"],
        "status": doc["status"],
        "bound": doc.get("bound"),
        "gap": doc.get("gap"),
        "counters": doc.get("counters", {}),
        "instance": doc.get("instance", ""),
    }
    return Solution(asg, centers, objective), meta
