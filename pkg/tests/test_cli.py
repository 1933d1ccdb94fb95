import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from amnesiac.cli import main

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"


def invoke(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def lines(out):
    return [json.loads(l) for l in out.splitlines()]


def test_run_c6(capsys):
    code, out, _ = invoke(capsys, "run", SCENARIOS / "c6.json")
    assert code == 0
    objs = lines(out)
    assert objs[-1] == {"verdict": "terminated", "lastRound": 3}
    assert objs[1]["delivered"] == [["v0", "v1", "M"], ["v0", "v5", "M"]]


def test_run_triangle_adversary(capsys):
    code, out, _ = invoke(capsys, "run", SCENARIOS / "triangle-adversary.json", "--fingerprints")
    assert code == 20
    objs = lines(out)
    assert objs[-1]["verdict"] == "non-terminating"
    assert all("fingerprint" in o for o in objs[:-1])


def test_run_budget(capsys):
    code, out, _ = invoke(capsys, "run", SCENARIOS / "triangle-adversary.json", "--budget", 2)
    assert code == 30
    assert lines(out)[-1] == {"verdict": "budget-exhausted", "budget": 2}


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        '{"graph": "a b"}',
        '{"graph": "a b", "initiations": [{"node": "q", "round": 0}]}',
        '{"graph": "a b", "initiations": [{"node": "a", "round": 0}, {"node": "b", "round": 1}]}',
    ],
)
def test_run_bad_input(capsys, monkeypatch, text):
    code, out, err = invoke(capsys, "run", "-", stdin=text, monkeypatch=monkeypatch)
    assert code == 1 and out == "" and err.startswith("error:")


def test_missing_file(capsys):
    code, _, err = invoke(capsys, "run", "/nonexistent.json")
    assert code == 1 and "error" in err


def test_analyze_examples(capsys, monkeypatch):
    code, out, _ = invoke(capsys, "analyze", SCENARIOS / "c5.txt", "--source", "a")
    r = json.loads(out)
    assert code == 0
    assert (r["e"], r["d"], r["bipartite"], r["ecBipartite"]) == (2, 2, False, False)

    c4 = "a b\nb c\nc d\nd a\n"
    _, out, _ = invoke(capsys, "analyze", "-", "--sources", "a,b", stdin=c4, monkeypatch=monkeypatch)
    r = json.loads(out)
    assert r["bipartite"] is True and r["ecBipartite"] is False

    _, out, _ = invoke(capsys, "analyze", "-", "--source", "a", stdin="a b\nb c\n", monkeypatch=monkeypatch)
    r = json.loads(out)
    assert (r["e"], r["d"], r["ecBipartite"], r["ecNodes"]) == (2, 2, True, [])


def test_analyze_disconnected(capsys, monkeypatch):
    code, out, err = invoke(capsys, "analyze", "-", "--source", "a", stdin="a b\nc d\n", monkeypatch=monkeypatch)
    r = json.loads(out)
    assert code == 0 and r["e"] is None and r["d"] is None
    assert "warning" in err


def test_analyze_unknown_source(capsys, monkeypatch):
    code, _, _ = invoke(capsys, "analyze", "-", "--source", "z", stdin="a b\n", monkeypatch=monkeypatch)
    assert code == 1


def test_verify_basic(capsys):
    code, out, _ = invoke(capsys, "verify", SCENARIOS / "c6.json")
    report = json.loads(out)
    assert code == 0 and report["ok"]
    statuses = {c["check"]: c["status"] for c in report["checks"]}
    assert statuses["bounds"] == statuses["receive-counts"] == statuses["reverse-duality"] == "pass"


def test_verify_ranked_stream(capsys):
    code, out, _ = invoke(capsys, "verify", SCENARIOS / "ranked-stream.json")
    statuses = {c["check"]: c["status"] for c in json.loads(out)["checks"]}
    assert code == 0 and statuses["broadcast-delivery"] == "pass"


def test_verify_ranked_order_violation(capsys, monkeypatch):
    doc = {
        "graph": "a b\nb c\n",
        "variant": "ranked",
        "messages": ["m1", "m2"],
        "initiations": [
            {"node": "a", "message": "m2", "round": 0},
            {"node": "c", "message": "m1", "round": 2},
        ],
    }
    code, _, err = invoke(capsys, "verify", "-", stdin=json.dumps(doc), monkeypatch=monkeypatch)
    assert code == 1 and "initiations" in err


def test_search_writes_witnesses(capsys, tmp_path):
    for family in ("fixed-delay", "unranked", "edge-addition"):
        code, out, _ = invoke(capsys, "search", family, "--out", tmp_path)
        report = json.loads(out)
        assert code == 0 and report["found"] and report["reverified"]
        path = tmp_path / f"{family}.json"
        code, out, _ = invoke(capsys, "run", path, "--fingerprints")
        assert code == 20
        assert lines(out)[-1] == report["verdict"]
        code, out, _ = invoke(capsys, "verify", path)
        statuses = {c["check"]: c["status"] for c in json.loads(out)["checks"]}
        assert code == 0 and statuses["certificate"] == "pass"
        assert statuses["receive-counts"] == "not-applicable"


def test_search_sharp_and_enumerate(capsys, tmp_path):
    code, out, _ = invoke(capsys, "search", "sharp", "--max-n", 5, "--out", tmp_path)
    report = json.loads(out)
    assert code == 0
    assert report["upper"]["lastRound"] == report["upper"]["e"] + report["upper"]["d"] + 1
    assert report["lower"]["lastRound"] == report["lower"]["e"] + 1
    assert (tmp_path / "sharp-lower.json").exists()
    code, out, _ = invoke(capsys, "search", "enumerate", "--n", 3)
    assert json.loads(out) == {"n": 3, "classes": 2, "labelled": 4, "labelledEnumerated": 4}


def test_search_random_is_seeded(capsys):
    _, a, _ = invoke(capsys, "search", "random", "--variant", "ranked", "--count", 50, "--seed", 9)
    _, b, _ = invoke(capsys, "search", "random", "--variant", "ranked", "--count", 50, "--seed", 9)
    assert a == b and json.loads(a)["counterexamples"] == []


def test_search_bad_limits(capsys):
    code, _, _ = invoke(capsys, "search", "unranked", "--max-n", 12)
    assert code == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "amnesiac", "run", "-"],
        input=(SCENARIOS / "c6.json").read_text(),
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[-1])["lastRound"] == 3
