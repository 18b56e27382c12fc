import json
from pathlib import Path

import pytest

from ckh.cli import build_parser, emit, run

DIAGRAMS = Path(__file__).resolve().parent.parent / "diagrams"


def call(capsys, *argv):
    code = run(list(argv))
    return code, capsys.readouterr().out


def call_json(capsys, *argv):
    code, out = call(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def diagram(name):
    return str(DIAGRAMS / f"{name}.tangle")


# kh


def test_kh_json_hopf(capsys):
    code, out = call_json(capsys, "kh", "--input", diagram("hopf"))
    assert code == 0 and out["spec"] == "even"
    assert [(e["t"], e["q"], e["rank"]) for e in out["homology"]] == [(0, -2, 1), (0, 0, 1), (2, -6, 1), (2, -4, 1)]


def test_kh_table_shows_torsion(capsys):
    code, out = call(capsys, "kh", "--input", diagram("trefoil"))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split() == ["t", "q", "rank", "torsion"]
    assert any(ln.split() == ["3", "-7", "0", "Z/2"] for ln in lines)


def test_kh_is_deterministic(capsys):
    _, a = call(capsys, "kh", "--input", diagram("figure_eight"), "--spec", "odd", "--format", "json")
    _, b = call(capsys, "kh", "--input", diagram("figure_eight"), "--spec", "odd", "--format", "json")
    assert a == b


def test_kh_crossing_order(capsys):
    _, a = call_json(capsys, "kh", "--input", diagram("trefoil"), "--spec", "odd")
    _, b = call_json(capsys, "kh", "--input", diagram("trefoil"), "--spec", "odd", "--crossing-order", "2 0 1")
    assert a == b


def test_kh_covering_simplified(capsys):
    code, out = call_json(capsys, "kh", "--input", diagram("hopf"), "--spec", "covering-simplified")
    assert code == 0
    assert set(out) == {"spec", "complex"}
    assert sum(len(v) for v in out["complex"]["objects"].values()) == 4


def test_kh_open_tangle_gives_complex(tmp_path, capsys):
    code, out = call_json(capsys, "kh", "--input", write(tmp_path, "t.tangle", "bottom u d\nx+1\n"))
    assert code == 0 and "complex" in out


def test_kh_stdin(monkeypatch, capsys):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO("cup1; cap1\n"))
    code, out = call_json(capsys, "kh", "--input", "-")
    assert code == 0 and len(out["homology"]) == 2


# oracle, compare, euler


def test_oracle_matches_kh(capsys):
    for spec in ("even", "odd"):
        _, a = call_json(capsys, "kh", "--input", diagram("trefoil"), "--spec", spec)
        _, b = call_json(capsys, "oracle", "--input", diagram("trefoil"), "--spec", spec, "--flip-arc", "1")
        assert a["homology"] == b["homology"]


def test_oracle_needs_even_or_odd(capsys):
    code, out = call_json(capsys, "oracle", "--input", diagram("hopf"), "--spec", "covering-simplified")
    assert code == 2 and out["error"] == "ParseError"


def test_compare_match(capsys):
    code, out = call(capsys, "compare", "--input", diagram("figure_eight"), "--spec", "odd")
    assert code == 0 and out.strip() == "MATCH"


def test_compare_mismatch_exit_code(monkeypatch, capsys):
    from ckh import pipeline
    from ckh.complexes import BigradedHomology

    monkeypatch.setattr(pipeline, "compute_ckh", lambda d, s, order=None: BigradedHomology({(0, 0): (1, ())}))
    code, out = call_json(capsys, "compare", "--input", diagram("hopf"))
    assert code == 1
    assert out["status"] == "MISMATCH" and out["diff"]


def test_euler(capsys):
    code, out = call(capsys, "euler", "--input", diagram("figure_eight"))
    assert code == 0 and out.strip() == "q^-5 + q^5"
    _, js = call_json(capsys, "euler", "--input", diagram("figure_eight"))
    assert js["coefficients"] == {"-5": 1, "5": 1}


# basis and normalize


def test_basis(tmp_path, capsys):
    code, out = call_json(capsys, "basis", "--input", write(tmp_path, "w", "22;s1,m1,s3,m3\n"))
    assert code == 0
    assert sorted(e["qdeg"] for e in out["basis"]) == [-2, 0, 0, 2]


def test_basis_rejects_three_webs(tmp_path, capsys):
    code, out = call_json(capsys, "basis", "--input", write(tmp_path, "w", "2\n2\n2\n"))
    assert code == 2 and out["error"] == "ParseError"


def test_normalize_bubble(tmp_path, capsys):
    code, out = call(capsys, "normalize", "--input", write(tmp_path, "f", "11;;cupA1@0,capB1@0\n"))
    assert code == 0
    assert out.strip().splitlines() == ["Z * rep{0}", "X*Y*Z * rep{1}"]
    _, js = call_json(capsys, "normalize", "--input", str(tmp_path / "f"))
    assert [(t["coef"], t["delta"]) for t in js["vector"]["terms"]] == [("Z", [0]), ("X*Y*Z", [1])]


def test_normalize_coefficients_cancel(tmp_path, capsys):
    text = "X | 2;;cupB1@0,dot1@1,capA1@0\n-X | 2;;cupB1@0,dot2@1,capA1@0\n"
    code, out = call_json(capsys, "normalize", "--input", write(tmp_path, "f", text))
    assert code == 0 and out["vector"]["terms"] == []


# check


def test_check_small(capsys):
    code, out = call_json(capsys, "check", "--seed", "3", "--size", "4", "--count", "5")
    assert code == 0 and out["ok"]
    assert set(out["suites"]) == {"confluence", "homogeneity", "cochain", "d_squared"}


# errors


def test_width_error_json(tmp_path, capsys):
    code, out = call(capsys, "kh", "--input", write(tmp_path, "bad", "x+1\n"))
    assert code == 2
    assert json.loads(out)["error"] == "WidthError"


def test_missing_input(capsys):
    code, out = call(capsys, "kh")
    assert code == 2 and json.loads(out)["error"] == "ParseError"


def test_missing_file(capsys):
    code, out = call(capsys, "kh", "--input", "/nonexistent/file")
    assert code == 2 and json.loads(out)["error"] == "FileNotFoundError"


def test_bad_verb_exits():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["frobnicate"])


def test_emit_formats():
    res = {"a": 1, "table": "T"}
    assert emit(res, "table") == "T"
    assert json.loads(emit(res, "json")) == {"a": 1}
    assert json.loads(emit({"a": 1}, "table")) == {"a": 1}
