"""Serialization of census results and incidence structures (JSON, CSV, DOT)."""

from __future__ import annotations

import csv
import io
import json

from .gf import FieldTable
from .modspace import ModPair, submodule_contains
from .planes import IncidenceStructure, check_affine_axioms, describe_pair
from .projline import LineCensus
from .trimat import TriMatrix

SCHEMA_VERSION = 1

# GF(2)-linear labels of the matrix units used by the reference drawing of T(2)
FIGURE1_UNITS = {(1, 1): 1, (2, 1): 6, (2, 2): 3}

PALETTE = [
    "red", "blue", "green3", "orange", "purple", "brown", "magenta", "cyan4",
    "gold3", "navy", "darkgreen", "deeppink", "sienna", "steelblue", "olivedrab", "gray40",
]


def figure1_label(m: TriMatrix) -> int:
    """Integer label of a matrix of T(2) as used in the figure."""
    if m.n != 2 or m.field.q != 2:
        raise ValueError("figure labels exist only for T(2) = T_2(2)")
    out = 0
    for cell, bit in FIGURE1_UNITS.items():
        if m[cell]:
            out ^= bit
    return out


def figure1_pair_label(g) -> tuple[int, int]:
    return (figure1_label(g.x), figure1_label(g.y))


def is_figure1_case(census: LineCensus) -> bool:
    return census.n == 2 and census.q == 2


def element_label(census: LineCensus, sid: int) -> str:
    """Short node label: the figure label of the nonzero element at q=2, n=2."""
    sub = census.registry[sid]
    if is_figure1_case(census) and sub.order == 2:
        nonzero = [int(c) for c in sub.elements if c]
        return str(figure1_pair_label(ModPair.from_code(census.ctx, nonzero[0]))).replace(" ", "")
    return str(sub.canonical_generator)


# -- JSON ---------------------------------------------------------------------------


def entity_record(census: LineCensus, sid: int, role: str, labels: dict | None = None) -> dict:
    g = census.registry[sid].canonical_generator
    rec = {"id": int(sid), "role": role, "canonical_generator": describe_pair(g), "labels": dict(labels or {})}
    if is_figure1_case(census):
        rec["labels"]["figure1"] = list(figure1_pair_label(g))
    return rec


def structure_record(s: IncidenceStructure, report=None) -> dict:
    return {
        "id": s.name,
        "points": list(s.points),
        "lines": [{"id": line, "point_ids": list(s.incidence[line])} for line in s.lines],
        "axiom_report": report.as_dict() if report is not None else None,
        "labels": {str(k): v for k, v in s.labels.items()},
    }


def structure_from_record(rec: dict) -> IncidenceStructure:
    lines = tuple(l["id"] for l in rec["lines"])
    inc = {l["id"]: tuple(l["point_ids"]) for l in rec["lines"]}
    labels = {int(k): v for k, v in rec.get("labels", {}).items()}
    return IncidenceStructure(rec["id"], tuple(rec["points"]), lines, inc, labels)


def document(census: LineCensus, kind: str, entities: list, structures: list, counts: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "n": census.n,
        "q": census.q,
        "kind": kind,
        "entities": entities,
        "structures": structures,
        "counts": counts,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(obj):
    # numpy scalars
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def load_document(text: str) -> dict:
    doc = json.loads(text)
    missing = {"schema_version", "n", "q", "kind", "entities", "structures", "counts"} - set(doc)
    if missing:
        raise ValueError(f"document lacks keys {sorted(missing)}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {doc['schema_version']}")
    return doc


def load_structures(text: str) -> list[IncidenceStructure]:
    return [structure_from_record(r) for r in load_document(text)["structures"]]


def pair_from_record(field: FieldTable, rec: dict) -> ModPair:
    g = rec["canonical_generator"]
    return ModPair.from_rows(field, g["x"], g["y"])


# -- CSV ----------------------------------------------------------------------------------


def counts_csv(counts: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "formula", "enumerated", "match"])
    for name, row in counts.items():
        w.writerow([name, "" if row["formula"] is None else row["formula"], row["enumerated"], row["match"]])
    return buf.getvalue()


# -- DOT ----------------------------------------------------------------------------------


def _q(text: str) -> str:
    return '"' + text.replace('"', r"\"") + '"'


def dot_graph(census: LineCensus, planes: list, closures: list) -> str:
    """Points of the line and non-unimodular FCS joined to the order-q submodules they contain.

    Lines of the same parallel class share a color; the non-unimodular FCS are black.
    """
    reg = census.registry
    color = {}
    k = 0
    for plane in planes:
        for cls in check_affine_axioms(plane).parallel_classes:
            for line in cls:
                color.setdefault(line, PALETTE[k % len(PALETTE)])
            k += 1
    targets = set()
    for plane, closure in zip(planes, closures):
        targets.update(closure.points)
    line_nodes = sorted(set(census.points) | set(census.nonuni_fcs))
    out = ["graph trimat {", "  graph [overlap=false];", "  node [fontsize=10];"]
    for sid in sorted(targets):
        inf = sid not in census.shielded
        out.append(f"  e{sid} [label={_q(element_label(census, sid))}, shape=point, xlabel={_q(element_label(census, sid))}{', color=black' if inf else ''}];")
    for sid in line_nodes:
        role = "nonuni" if sid in census.nonuni_fcs else "point"
        c = "black" if role == "nonuni" else color.get(sid, "gray")
        out.append(f"  l{sid} [label={_q(str(sid))}, shape=box, color={c}, tooltip={_q(str(reg[sid].canonical_generator))}];")
    for sid in line_nodes:
        c = "black" if sid in census.nonuni_fcs else color.get(sid, "gray")
        for t in sorted(targets):
            if submodule_contains(reg[sid], reg[t]):
                out.append(f"  l{sid} -- e{t} [color={c}];")
    out.append("}")
    return "\n".join(out) + "\n"
