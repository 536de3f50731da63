import json
import subprocess
import sys

import pytest

from qfano.cli import BAD_INPUT, FAILED, OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_hilbert_valid(capsys):
    code, out, _ = run(capsys, "hilbert", "--q", "7", "--basket", "(2,3,13:6)", "--a3", "1/78", "--format", "json")
    assert code == OK
    d = json.loads(out)
    assert d["h0"][1:7] == [1, 1, 1, 1, 1, 2] and d["df"] == 1


def test_hilbert_invalid_exits_one(capsys):
    code, out, _ = run(capsys, "hilbert", "--q", "7", "--basket", "(2,3,13:6)", "--a3", "1/77")
    assert code == FAILED
    assert "chi(1A)" in out


@pytest.mark.parametrize("argv", [
    ["hilbert", "--q", "7", "--basket", "1/5(1,1,2)", "--a3", "1"],
    ["hilbert", "--q", "4", "--basket", "(2)", "--a3", "1"],
    ["hilbert", "--q", "7", "--a3", "one"],
    ["hilbert"],
    ["nonsense"],
    ["search", "--q-min", "5", "--q-max", "4"],
    ["link", "--case", "file"],
])
def test_bad_input_exits_two(capsys, argv):
    assert run(capsys, *argv)[0] == BAD_INPUT


def test_calibrate(capsys):
    code, out, _ = run(capsys, "calibrate")
    assert code == OK
    assert out.count("PASS") == 7


def test_search_export_diff_roundtrip(capsys, tmp_path):
    rep = tmp_path / "r.json"
    code, out, _ = run(capsys, "search", "--q-min", "7", "--q-max", "7", "--out", str(rep))
    assert code == OK and rep.exists()
    cat = tmp_path / "c.csv"
    assert run(capsys, "catalog", "export", "--report", str(rep), "--pins", "1,6", "--out", str(cat))[0] == OK
    assert run(capsys, "catalog", "import", str(cat))[0] == OK
    assert run(capsys, "catalog", "diff", str(cat), "--report", str(rep))[0] == OK

    lines = cat.read_text().splitlines()
    row = next(i for i, ln in enumerate(lines) if "1/13(1,12,6)" in ln and ",1/78," in ln)
    lines[row] = lines[row].replace("6=2", "6=1")
    cat.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "catalog", "diff", str(cat), "--report", str(rep), "--format", "json")
    assert code == FAILED
    assert json.loads(out)["pin_mismatches"][0]["pinned"] == 1


def test_catalog_import_errors(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,q,a3,basket\nx,5,1/2,1/5(1,1,2)\n")
    code, _, err = run(capsys, "catalog", "import", str(bad))
    assert code == BAD_INPUT and "line 2" in err
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert run(capsys, "catalog", "import", str(empty))[0] == OK
    assert run(capsys, "catalog", "import", str(tmp_path / "missing.csv"))[0] == BAD_INPUT


def test_link_41478(capsys):
    code, out, _ = run(capsys, "link", "--case", "41478", "--trace")
    assert code == OK
    assert "NON_BIRATIONAL" in out and "alpha=1/13" in out


def test_link_scenario_file(capsys, tmp_path):
    doc = {"name": "q=4 index 11", "q": 4, "df": 3,
           "worlds": [{"candidate": {"basket": "(11:2)", "a3": "2/11"}}], "expect": "CONTRADICTION"}
    f = tmp_path / "s.json"
    f.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "link", "--file", str(f), "--format", "json")
    assert code == OK
    assert json.loads(out)["scenarios"][0]["outcome"] == "CONTRADICTION"
    doc["expect"] = "FEASIBLE"
    f.write_text(json.dumps(doc))
    assert run(capsys, "link", "--file", str(f))[0] == FAILED
    doc["worlds"][0]["candidate"]["basket"] = "(11)"
    f.write_text(json.dumps(doc))
    assert run(capsys, "link", "--file", str(f))[0] == BAD_INPUT
    f.write_text("{not json")
    assert run(capsys, "link", "--file", str(f))[0] == BAD_INPUT


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qfano", "hilbert", "--q", "4", "--a3", "1"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == OK
    assert "h0(1A)" in proc.stdout
