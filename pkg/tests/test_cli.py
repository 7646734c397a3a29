from __future__ import annotations

import csv
import io
import json

import pytest

from trimat_geom import cli, export
from trimat_geom import planes as P


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_counts_text(capsys):
    code, out, _ = run(capsys, "counts", "--n", "2", "--q", "2")
    assert code == 0
    rows = {line.split()[0]: line.split() for line in out.splitlines()[2:]}
    assert rows["points"][1:] == ["18", "18", "yes"]
    assert rows["nonuni_fcs"][1:] == ["3", "3", "yes"]


def test_counts_csv_and_json(capsys):
    code, out, _ = run(capsys, "counts", "--n", "3", "--q", "2", "--format", "csv")
    assert code == 0
    table = {r["quantity"]: r for r in csv.DictReader(io.StringIO(out))}
    for name, value in [("nonuni_fcs", "99"), ("shielded", "288"), ("affine_planes", "72"), ("two_affine_planes", "18")]:
        assert table[name]["formula"] == table[name]["enumerated"] == value
        assert table[name]["match"] == "True"
    code, out, _ = run(capsys, "counts", "--n", "2", "--q", "3", "--format", "json")
    assert json.loads(out)["counts"]["shielded"] == {"formula": 36, "enumerated": 36, "match": True}


@pytest.mark.parametrize(
    "argv",
    [
        ("counts", "--n", "2", "--q", "6"),
        ("verify", "--n", "4", "--q", "2"),
        ("planes", "--n", "4", "--q", "2"),
        ("counts", "--n", "5", "--q", "2"),
        ("counts", "--n", "2", "--q", "32"),
        ("planes", "--n", "2", "--q", "2", "--set", "k:7"),
        ("planes", "--n", "2", "--q", "2", "--set", "second"),
        ("planes", "--n", "3", "--q", "2", "--kind", "2affine", "--subset", "1,2"),
        ("counts", "--n", "2", "--q", "2", "--workers", "0"),
    ],
)
def test_configuration_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err.startswith("error:")


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--n", "2", "--q", "3")
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(capsys, "verify", "--n", "3", "--q", "2")
    assert code == 0 and "FAIL" not in out
    assert "WARN  fast path n=3 (printed table)" in out


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "--n", "3", "--q", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and all(c["passed"] for c in doc["checks"])
    assert doc["fast_path_printed"]["disagreements"] == len(doc["fast_path_printed"]["diff"])


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--n", "2", "--q", "2", "--kind", "nonuni-fcs")
    assert code == 0 and out.startswith("3 nonuni-fcs")
    code, out, _ = run(capsys, "enumerate", "--n", "2", "--q", "2", "--kind", "points", "--format", "csv")
    assert len(out.splitlines()) == 19
    code, out, _ = run(capsys, "enumerate", "--n", "3", "--q", "2", "--kind", "shielded", "--format", "json")
    doc = json.loads(out)
    assert len(doc["entities"]) == 288 and {e["role"] for e in doc["entities"]} == {"shielded"}


def test_planes_command(capsys):
    code, out, _ = run(capsys, "planes", "--n", "2", "--q", "3", "--set", "first")
    assert code == 0 and out.count("\n") == 1 and "projective ok" in out
    code, out, _ = run(capsys, "planes", "--n", "3", "--q", "2", "--kind", "2affine", "--set", "k:1", "--subset", "(0,1,0,0)")
    assert code == 0 and "4 points, 6 lines" in out


def test_export_json_schema_and_roundtrip(capsys, tmp_path, census):
    path = tmp_path / "planes.json"
    code, _, _ = run(capsys, "export", "--n", "2", "--q", "2", "--format", "json", "--out", str(path))
    assert code == 0
    doc = export.load_document(path.read_text())
    assert doc["schema_version"] == export.SCHEMA_VERSION and doc["kind"] == "planes"
    for ent in doc["entities"]:
        assert set(ent) == {"id", "role", "canonical_generator", "labels"}
        assert set(ent["canonical_generator"]) == {"x", "y"}
    structures = export.load_structures(path.read_text())
    c = census(2, 2)
    expected = []
    for sel in P.plane_selectors(c):
        plane = P.build_affine_plane(c, sel)
        expected += [plane, P.projective_closure(plane, c)]
    assert structures == expected
    # every generator in the document regenerates its entity
    reg = c.registry
    for ent in doc["entities"]:
        g = export.pair_from_record(c.ctx.field, ent)
        assert reg.id_of_pair(g) == ent["id"]


def test_export_2affine(capsys):
    code, out, _ = run(capsys, "export", "--n", "3", "--q", "2", "--format", "json", "--kind", "2affine")
    doc = json.loads(out)
    assert code == 0 and len(doc["structures"]) == 18
    assert all(len(s["points"]) == 4 and len(s["lines"]) == 6 for s in doc["structures"])
    assert all(s["axiom_report"]["holds"] for s in doc["structures"])
    rebuilt = export.load_structures(out)
    assert all(P.check_affine_axioms(s).holds for s in rebuilt)


def test_export_dot(capsys):
    code, out, _ = run(capsys, "export", "--n", "2", "--q", "2", "--format", "dot")
    assert code == 0 and out.startswith("graph trimat {")
    assert out.count("shape=box") == 18 + 3
    assert out.count(" -- ") == 18 * 3 + 3 * 3
    for label in ["(6,0)", "(6,6)", "(0,6)", "(3,0)", "(5,5)"]:
        assert f'label="{label}"' in out


def test_export_csv(capsys):
    code, out, _ = run(capsys, "export", "--n", "2", "--q", "4", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "quantity,formula,enumerated,match"


def test_output_is_deterministic_across_workers(capsys):
    outs = []
    for workers in ("1", "2", "3"):
        code, out, _ = run(capsys, "export", "--n", "3", "--q", "2", "--format", "json", "--workers", workers, "--set", "first")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "counts", "--n", "2", "--q", "2", "--out", str(tmp_path / "missing" / "x.txt"))
    assert code == 2 and "cannot write" in err
