import json
import subprocess
import sys

import pytest

from quadcert.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 and out else None)


def test_cfrac_with_unit(capsys):
    code, doc = run(capsys, "cfrac", "--d", "73", "--n", "4", "--unit")
    assert code == 0
    assert doc["period"] == [1, 1, 5, 5, 1, 1, 16]
    assert doc["fundamental_unit"]["element"] == ["943", "250"]
    assert doc["fundamental_unit"]["norm"] == -1
    assert len(doc["convergents"]) == 4


def test_family_records(capsys):
    code, doc = run(capsys, "family", "--u", "2", "--l", "3", "--t-max", "10")
    assert code == 0
    assert [r["t"] for r in doc] == [1, 3, 4, 5, 7, 8, 9]
    rec = next(r for r in doc if r["t"] == 4)
    assert rec["D"] == "646"


def test_family_certify(capsys):
    code, doc = run(capsys, "family", "--u", "2", "--l", "7", "--t-max", "1", "--certify")
    assert code == 0 and doc[0]["certificate"]["valid"] and doc[0]["certificate"]["M"] == 3


def test_sieve(capsys):
    code, doc = run(capsys, "sieve", "--f", "1,0,1", "--g", "2,1", "--x", "10")
    assert code == 0 and doc["count"] == 8 and doc["ratio"] == 0.8
    code, doc = run(capsys, "sieve", "--f", "1,0,1", "--x", "1000", "--euler", "1000")
    lo, hi = doc["euler_enclosure"]["lo"], doc["euler_enclosure"]["hi"]
    assert 0.85 < lo < hi < 0.95


def test_escalate_paper_queue(capsys):
    code, doc = run(capsys, "escalate", "--queue", "paper73", "--max-depth", "5")
    assert code == 0 and doc["bound"] == 5 and doc["exhaustive"]


def test_escalate_queue_file(capsys, tmp_path):
    q = tmp_path / "queue.txt"
    q.write_text("1,0\n4,1\n83,22\n")
    code, doc = run(capsys, "escalate", "--d", "73", "--queue", str(q), "--emit-tree")
    assert code == 0 and doc["bound"] == 3 and len(doc["tree"]) == 4


def test_certify_and_verify_round_trip(capsys, tmp_path):
    out = tmp_path / "cert.json"
    code = main(["certify", "--d", "73", "--elements", "1,0;4,1;83,22", "-o", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["valid"] and doc["M"] == 3
    code, res = run(capsys, "certify", "--verify", str(out))
    assert code == 0 and res["verified"]
    # tamper with a recorded verdict
    doc["conditions"][-1]["verdict"] = not doc["conditions"][-1]["verdict"]
    out.write_text(json.dumps(doc))
    code, res = run(capsys, "certify", "--verify", str(out))
    assert code == 0 and not res["verified"] and res["mismatches"]


def test_certify_seed_list(capsys):
    code, doc = run(capsys, "certify", "--seed-list", "--u", "2", "--l", "7", "--t-max", "3")
    assert code == 0 and doc[0]["D"] == "42195" and doc[0]["M"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["cfrac", "--d", "49"],
        ["cfrac", "--d", "12", "--unit"],
        ["family", "--u", "4", "--l", "3", "--t-max", "5"],
        ["sieve", "--f", "1,0,0", "--x", "10"],
        ["escalate", "--queue", "paper73", "--d", "5"],
        ["certify", "--d", "73"],
        ["nonsense"],
        ["cfrac"],
    ],
)
def test_invalid_input_exit_code(capsys, argv):
    assert main(argv) == 2


def test_unresolved_exit_code(capsys, monkeypatch):
    from quadcert import sieve
    from quadcert.errors import UnresolvedFactorization

    def boom(spec, X):
        raise UnresolvedFactorization("budget exhausted", n=7)

    monkeypatch.setattr(sieve, "count_simultaneous", boom)
    assert main(["sieve", "--f", "1,0,1", "--x", "10"]) == 3


def test_output_is_byte_identical(capsys):
    outs = []
    for _ in range(2):
        main(["escalate", "--queue", "paper73", "--max-depth", "5", "--emit-tree", "--json-pretty"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_console_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "quadcert.cli", "cfrac", "--d", "2"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["period"] == [2]
