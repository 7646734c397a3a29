"""Command line front end: ``trimat-geom <command> --n N --q Q [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass

from . import export, planes
from .errors import DimensionUnsupported, IoError, SelectorInvalid, SubsetInvalid, TrimatGeomError
from .gf import field_make
from .projline import (
    LineCensus,
    closed_forms,
    fast_path_report,
    line_census,
    outlier_report,
    parse_set_key,
    set_key,
    theorem_family_check,
)
from .trimat import ring_context

log = logging.getLogger("trimat_geom")

COMMANDS = ("counts", "enumerate", "planes", "verify", "export")
KINDS = ("points", "nonuni-fcs", "shielded", "planes", "2affine")
FORMATS = ("json", "csv", "dot", "text")

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    n: int
    q: int
    kind: str | None = None
    set_label: object = None
    subset: tuple | None = None
    fmt: str = "text"
    workers: int | None = None
    out: str | None = None


class Result:
    def __init__(self, text: str, code: int = EXIT_OK):
        self.text = text
        self.code = code


# -- shared computations ---------------------------------------------------------------


def build_census(cfg: RunConfig) -> LineCensus:
    ctx = ring_context(cfg.n, field_make(cfg.q))
    return line_census(ctx, workers=cfg.workers)


def _require_theorem_dims(cfg: RunConfig):
    if cfg.n not in (2, 3):
        raise DimensionUnsupported(f"'{cfg.command}' covers the theorems for n = 2 and 3 only (got n={cfg.n})")


def count_table(census: LineCensus) -> dict:
    n, q = census.n, census.q
    forms = closed_forms(n, q)
    enumerated = {
        "points": len(census.points),
        "nonuni_fcs": len(census.nonuni_fcs),
        "shielded": len(census.shielded),
        "outlier_generators": outlier_report(census)["outlier_generators_of_nonuni_fcs"],
    }
    if n in (2, 3):
        nplanes = len(planes.plane_selectors(census))
        enumerated["affine_planes"] = nplanes
        enumerated["abstract_planes"] = nplanes
    if n == 3:
        enumerated["two_affine_planes"] = len(planes.subset_labels(census))
    table = {}
    for name, value in enumerated.items():
        formula = forms.get(name)
        table[name] = {"formula": formula, "enumerated": value, "match": None if formula is None else formula == value}
    table["submodules"] = {"formula": None, "enumerated": len(census.registry), "match": None}
    return table


def selected_selectors(census: LineCensus, cfg: RunConfig) -> list:
    sels = planes.plane_selectors(census)
    if cfg.set_label is not None:
        sels = [s for s in sels if s[0] == cfg.set_label]
    if cfg.subset is not None:
        if census.n != 3:
            raise DimensionUnsupported("--subset applies to n = 3")
        sels = [s for s in sels if s[1] == cfg.subset]
    if not sels:
        raise SelectorInvalid("no affine plane matches the given --set/--subset")
    return sels


def selected_subsets(census: LineCensus, cfg: RunConfig) -> list:
    subs = planes.subset_labels(census)
    if cfg.set_label is not None:
        subs = [s for s in subs if s[0] == cfg.set_label]
    if cfg.subset is not None:
        subs = [s for s in subs if s[1] == cfg.subset]
    if not subs:
        raise SubsetInvalid("no subset matches the given --set/--subset")
    return subs


def _roles(census: LineCensus) -> dict:
    roles = {sid: "point" for sid in census.points}
    roles.update({sid: "nonuni-fcs" for sid in census.nonuni_fcs})
    roles.update({sid: "shielded" for sid in census.shielded})
    return roles


def entity_ids(census: LineCensus, kind: str) -> list[int]:
    return {"points": census.points, "nonuni-fcs": census.nonuni_fcs, "shielded": census.shielded}[kind]


def _entity_labels(census: LineCensus, sid: int) -> dict:
    part = census.point_partition.get(sid) or census.shielded_partition.get(sid)
    labels = {}
    if part is not None:
        labels["set"] = set_key(part[0])
        if part[1] is not None:
            labels["subset"] = list(part[1])
    return labels


def build_document(census: LineCensus, cfg: RunConfig) -> dict:
    kind = cfg.kind or "planes"
    structures, ids = [], set()
    if kind in ("points", "nonuni-fcs", "shielded"):
        ids.update(entity_ids(census, kind))
    elif kind == "planes":
        _require_theorem_dims(cfg)
        for sel in selected_selectors(census, cfg):
            plane = planes.build_affine_plane(census, sel)
            closure = planes.projective_closure(plane, census)
            structures.append(export.structure_record(plane, planes.check_affine_axioms(plane)))
            structures.append(export.structure_record(closure, planes.check_projective_axioms(closure)))
            ids.update(closure.points)
            ids.update(closure.lines)
    elif kind == "2affine":
        if census.n != 3:
            raise DimensionUnsupported("2-affine planes exist for n = 3 only")
        for sub in selected_subsets(census, cfg):
            s = planes.build_2affine_plane(census, sub)
            structures.append(export.structure_record(s, planes.check_affine_axioms(s)))
            for lab in s.labels.values():
                ids.update(lab["members"])
    else:
        raise ValueError(f"unknown kind {kind!r}")
    roles = _roles(census)
    entities = [
        export.entity_record(census, sid, roles.get(sid, "submodule"), _entity_labels(census, sid)) for sid in sorted(ids)
    ]
    return export.document(census, kind, entities, structures, count_table(census))


# -- commands ------------------------------------------------------------------------------


def _fmt_count_rows(table: dict) -> str:
    lines = [f"{'quantity':<20} {'formula':>10} {'enumerated':>12}  match"]
    for name, row in table.items():
        formula = "-" if row["formula"] is None else str(row["formula"])
        match = "-" if row["match"] is None else ("yes" if row["match"] else "NO")
        lines.append(f"{name:<20} {formula:>10} {row['enumerated']:>12}  {match}")
    return "\n".join(lines) + "\n"


def cmd_counts(cfg: RunConfig) -> Result:
    census = build_census(cfg)
    table = count_table(census)
    code = EXIT_MISMATCH if any(r["match"] is False for r in table.values()) else EXIT_OK
    if cfg.fmt == "json":
        return Result(export.dumps({"schema_version": export.SCHEMA_VERSION, "n": cfg.n, "q": cfg.q, "counts": table}), code)
    if cfg.fmt == "csv":
        return Result(export.counts_csv(table), code)
    if cfg.fmt == "dot":
        raise ValueError("counts cannot be rendered as DOT")
    return Result(f"T_{cfg.n}({cfg.q})\n" + _fmt_count_rows(table), code)


def cmd_enumerate(cfg: RunConfig) -> Result:
    kind = cfg.kind or "points"
    if kind not in ("points", "nonuni-fcs", "shielded"):
        raise ValueError("enumerate takes --kind points, nonuni-fcs or shielded")
    census = build_census(cfg)
    ids = entity_ids(census, kind)
    if cfg.fmt == "json":
        roles = _roles(census)
        doc = export.document(
            census,
            kind,
            [export.entity_record(census, sid, roles[sid], _entity_labels(census, sid)) for sid in ids],
            [],
            count_table(census),
        )
        return Result(export.dumps(doc))
    rows = []
    for sid in ids:
        g = census.registry[sid].canonical_generator
        lab = _entity_labels(census, sid)
        rows.append((sid, str(g.x), str(g.y), lab.get("set", ""), ",".join(map(str, lab.get("subset", [])))))
    if cfg.fmt == "csv":
        text = "id,x,y,set,subset\n" + "".join(f'{r[0]},"{r[1]}","{r[2]}",{r[3]},"{r[4]}"\n' for r in rows)
        return Result(text)
    if cfg.fmt == "dot":
        raise ValueError("enumerate cannot be rendered as DOT; use export")
    text = f"{len(rows)} {kind} in 2T_{cfg.n}({cfg.q})\n" + "".join(f"{r[0]:>6}  ({r[1]}, {r[2]})  {r[3]} {r[4]}\n" for r in rows)
    return Result(text)


def cmd_planes(cfg: RunConfig) -> Result:
    _require_theorem_dims(cfg)
    census = build_census(cfg)
    if cfg.fmt == "json":
        return Result(export.dumps(build_document(census, cfg)))
    out, ok = [], True
    if cfg.kind == "2affine":
        for sub in selected_subsets(census, cfg):
            s = planes.build_2affine_plane(census, sub)
            rep = planes.check_affine_axioms(s)
            ok &= rep.holds
            out.append(f"{s.name}: {len(s.points)} points, {len(s.lines)} lines, order {rep.order}, axioms {'ok' if rep.holds else 'FAIL'}")
    else:
        for sel in selected_selectors(census, cfg):
            plane = planes.build_affine_plane(census, sel)
            rep = planes.check_affine_axioms(plane)
            closure = planes.projective_closure(plane, census) if rep.holds else None
            prep = planes.check_projective_axioms(closure) if closure else None
            good = rep.holds and prep is not None and prep.holds
            ok &= good
            out.append(
                f"{plane.name}: {len(plane.points)} points, {len(plane.lines)} lines, order {rep.order}; "
                f"closure {len(closure.points) if closure else '-'} points, projective {'ok' if good else 'FAIL'}"
            )
    return Result("\n".join(out) + "\n", EXIT_OK if ok else EXIT_MISMATCH)


def run_verification(census: LineCensus) -> list[tuple[str, bool, str]]:
    """(name, passed, detail) for every check; fast-path printed-table issues are warnings."""
    checks = []
    table = count_table(census)
    for name, row in table.items():
        if row["match"] is not None:
            checks.append((f"count {name}", row["match"], f"{row['enumerated']} vs {row['formula']}"))
    fam = theorem_family_check(census)
    checks.append(("generator families = brute force", fam["equal"], f"{fam['distinct_submodules']} vs {fam['brute_force']}"))
    aff = proj = 0
    sels = planes.plane_selectors(census)
    for sel in sels:
        plane = planes.build_affine_plane(census, sel)
        rep = planes.check_affine_axioms(plane)
        aff += rep.holds and rep.order == census.q
        if rep.holds:
            cl = planes.projective_closure(plane, census)
            prep = planes.check_projective_axioms(cl)
            proj += prep.holds and len(cl.points) == census.q**2 + census.q + 1
    checks.append(("affine axioms", aff == len(sels), f"{aff}/{len(sels)} planes"))
    checks.append(("projective closures", proj == len(sels), f"{proj}/{len(sels)} closures"))
    if census.n == 3:
        subs = planes.subset_labels(census)
        good = sum(planes.check_affine_axioms(planes.build_2affine_plane(census, s)).holds for s in subs)
        checks.append(("2-affine axioms", good == len(subs), f"{good}/{len(subs)} planes"))
    cor = planes.check_corollaries(census)
    checks.append(("corollaries", cor["all_hold"], ", ".join(k for k, v in cor.items() if not v) or "all"))
    if census.n == 2:
        inf = planes.check_infinity_n2(census)
        checks.append(("closure uniqueness", all(inf.values()), ", ".join(k for k, v in inf.items() if not v) or "all"))
        fp = fast_path_report(census)
        checks.append(("fast path n=2", fp["disagreements"] == 0, f"agreement {fp['agreement']:.4f}"))
    else:
        cl = planes.closure_line_formula_report(census)
        checks.append(("closure line formula", not cl["failures_in_used_cases"], f"{len(cl['failures'])} failing (x22,y22) cases overall"))
        fixed = fast_path_report(census, table="corrected")
        checks.append(("fast path n=3 (corrected table)", fixed["disagreements"] == 0, f"agreement {fixed['agreement']:.4f}"))
    return checks


def cmd_verify(cfg: RunConfig) -> Result:
    _require_theorem_dims(cfg)
    census = build_census(cfg)
    checks = run_verification(census)
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}: {detail}" for name, ok, detail in checks]
    if cfg.n == 3:
        printed = fast_path_report(census, table="printed")
        lines.append(
            f"WARN  fast path n=3 (printed table): agreement {printed['agreement']:.4f}, "
            f"{printed['disagreements']} disagreements by branch {printed['by_branch']}"
        )
    code = EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_MISMATCH
    if cfg.fmt == "json":
        doc = {"n": cfg.n, "q": cfg.q, "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in checks]}
        if cfg.n == 3:
            doc["fast_path_printed"] = printed
        return Result(export.dumps(doc), code)
    return Result("\n".join(lines) + "\n", code)


def cmd_export(cfg: RunConfig) -> Result:
    census = build_census(cfg)
    if cfg.fmt == "csv":
        return Result(export.counts_csv(count_table(census)))
    _require_theorem_dims(cfg)
    if cfg.fmt == "dot":
        sels = selected_selectors(census, cfg)
        ps = [planes.build_affine_plane(census, s) for s in sels]
        return Result(export.dot_graph(census, ps, [planes.projective_closure(p, census) for p in ps]))
    if cfg.fmt in ("json", "text"):
        return Result(export.dumps(build_document(census, cfg)))
    raise ValueError(f"unknown format {cfg.fmt!r}")


HANDLERS = {"counts": cmd_counts, "enumerate": cmd_enumerate, "planes": cmd_planes, "verify": cmd_verify, "export": cmd_export}


# -- argument handling --------------------------------------------------------------------------


def parse_subset(text: str) -> tuple:
    parts = [p for p in text.strip().strip("()[]").replace(" ", "").split(",") if p]
    if len(parts) != 4:
        raise ValueError("--subset expects four field elements x32,x33,y32,y33")
    return tuple(int(p) for p in parts)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trimat-geom", description="Projective lines over triangular matrix rings.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--q", type=int, required=True)
    parser.add_argument("--kind", choices=KINDS)
    parser.add_argument("--set", dest="set_label", help="first | k:<element>")
    parser.add_argument("--subset", help="x32,x33,y32,y33 (n = 3)")
    parser.add_argument("--format", dest="fmt", choices=FORMATS, default="text")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        n=args.n,
        q=args.q,
        kind=args.kind,
        set_label=parse_set_key(args.set_label) if args.set_label else None,
        subset=parse_subset(args.subset) if args.subset else None,
        fmt=args.fmt,
        workers=args.workers,
        out=args.out,
    )


def run(cfg: RunConfig) -> Result:
    if cfg.workers is not None and cfg.workers < 1:
        raise ValueError("--workers must be at least 1")
    return HANDLERS[cfg.command](cfg)


def write_output(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        result = run(cfg)
        write_output(result.text, cfg.out)
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrimatGeomError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return result.code


if __name__ == "__main__":
    sys.exit(main())
