import json
from pathlib import Path

import pytest

from simphom.cli import SpecError, main, parse_group_spec

DEMOS = Path(__file__).resolve().parents[1] / "demos"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_group_specs():
    assert parse_group_spec("cyclic:5")[1].order == 5
    assert parse_group_spec("sym:3")[1].order == 6
    assert parse_group_spec("trivial")[1].order == 1
    kind, P = parse_group_spec("free:2")
    assert kind == "presentation" and len(P.generators) == 2
    for bad in ("cyclic:0", "cyclic:x", "sym:-1", "foo:3", "trivial:2", "presentation:"):
        with pytest.raises(SpecError):
            parse_group_spec(bad)


def test_homology_both(capsys):
    code, rep, err = run(capsys, "homology", "--group", "cyclic:2", "--max-degree", "3", "--method", "both")
    assert code == 0
    assert [(h["betti"], h["torsion"]) for h in rep["homology"]] == [(0, [2]), (0, []), (0, [2])]
    assert rep["oracle"]["match"] is True
    assert "match=true" in err


def test_homology_trivial(capsys):
    code, rep, _ = run(capsys, "homology", "--group", "trivial", "--max-degree", "4")
    assert code == 0
    assert all(h["betti"] == 0 and not h["torsion"] for h in rep["homology"])


def test_homology_torus(capsys):
    code, rep, _ = run(capsys, "homology", "--group", f"presentation:{DEMOS / 'torus.json'}", "--max-degree", "2",
                       "--method", "e")
    assert code == 0
    assert [(h["betti"], h["torsion"]) for h in rep["homology"]] == [(2, []), (1, [])]


def test_bar_needs_finite_group(capsys):
    code, rep, err = run(capsys, "homology", "--group", "free:1", "--method", "bar")
    assert code == 2 and "finite" in err


def test_verify_cube(capsys):
    code, rep, _ = run(capsys, "verify", "--suite", "cube", "--seed", "7", "--trials", "10")
    assert code == 0 and rep["suites"]["cube"]["ok"]


def test_verify_retraction_reports_identity_counts(capsys):
    code, rep, _ = run(capsys, "verify", "--suite", "retraction", "--seed", "1", "--trials", "10")
    assert code == 0
    counts = rep["suites"]["retraction"]["word_identity"]
    assert counts["Z/2 n=1"] == {"pass": 10, "fail": 0}
    assert counts["Z/2 n=2"] == {"pass": 10, "fail": 0}
    assert set(counts) >= {f"Z/{m} n={n}" for m in (2, 3) for n in range(1, 5)}


def test_inject_fault_fails_deterministically(capsys):
    code1, rep1, _ = run(capsys, "verify", "--suite", "cube", "--seed", "3", "--trials", "2", "--inject-fault")
    code2, rep2, _ = run(capsys, "verify", "--suite", "cube", "--seed", "3", "--trials", "2", "--inject-fault")
    assert code1 == code2 == 1
    assert rep1 == rep2
    assert "violated" in rep1["suites"]["cube"]["failures"][0]["functor"]
    code, rep, _ = run(capsys, "verify", "--suite", "moore", "--trials", "2", "--inject-fault")
    assert code == 1 and "violated" in rep["suites"]["moore"]["failures"][0]


def test_reports_are_reproducible(capsys):
    main(["verify", "--suite", "barseq", "--seed", "9", "--trials", "3"])
    a = capsys.readouterr().out
    main(["verify", "--suite", "barseq", "--seed", "9", "--trials", "3"])
    assert capsys.readouterr().out == a


def test_pairing_cup_and_zero(capsys):
    code, rep, _ = run(capsys, "pairing", "--group", f"presentation:{DEMOS / 'torus.json'}",
                       "--cocycle", str(DEMOS / "cup.json"), "--cocycle", str(DEMOS / "zero2.json"), "--degree", "2")
    assert code == 0
    assert [[abs(int(x)) for x in row] for row in rep["matrix"]] == [[1], [0]]


def test_pairing_exponent(capsys):
    code, rep, _ = run(capsys, "pairing", "--group", "free:1", "--cocycle", str(DEMOS / "exponent.json"),
                       "--degree", "1")
    assert code == 0 and rep["matrix"] == [["1"]]


def test_malformed_cocycle(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"degree": 2, "bilinear": [[1]]}))
    code, _, err = run(capsys, "pairing", "--group", "free:1", "--cocycle", str(p), "--degree", "2")
    assert code == 2 and "normalized" in err


def test_filtration_commands(capsys):
    code, rep, _ = run(capsys, "filtration", "--functor", "constant", "--degree", "0", "--kmax", "2")
    assert code == 0 and rep["dims"]["1"] == rep["filtration"]["dim"]
    code, rep, _ = run(capsys, "filtration", "--functor", "designed", "--degree", "0", "--kmax", "2")
    assert rep["dims"] == {"1": 0, "2": 1} and rep["oracle_agrees"]
    code, rep, _ = run(capsys, "filtration", "--functor", "random:4", "--degree", "1", "--kmax", "2")
    assert code == 0 and rep["monotone"]


def test_out_and_timings(capsys, tmp_path):
    out = tmp_path / "r.json"
    code = main(["--out", str(out), "--timings", "homology", "--group", "cyclic:3", "--max-degree", "2"])
    assert code == 0
    rep = json.loads(out.read_text())
    assert "seconds" in rep and rep["homology"][0]["torsion"] == [3]
