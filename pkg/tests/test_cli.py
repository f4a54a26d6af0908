import csv
import io
import json
import subprocess
import sys

import pytest

from uslope import cli, suites


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def all_leaves(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from all_leaves(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from all_leaves(v)
    else:
        yield obj


def test_series_text(capsys):
    code, out, _ = run(capsys, "series", "--name", "h", "--prec", "4", "--format", "text")
    assert code == 0 and out.strip() == "1 - 48q + 1104q^2 - 16192q^3"


def test_series_json_has_no_floats(capsys):
    code, out, _ = run(capsys, "series", "--name", "hs", "--s", "1/2+1/4*sqrt2", "--prec", "6", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["prec"] == 6
    assert not any(isinstance(x, float) for x in all_leaves(data))


def test_series_csv(capsys):
    code, out, _ = run(capsys, "series", "--name", "f", "--prec", "3", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["n", "a", "b"] and rows[2] == ["1", "1/1", "0/1"]


def test_matrix_json(capsys):
    code, out, _ = run(capsys, "matrix", "--kind", "U", "--s", "0", "--r", "0", "--size", "3")
    data = json.loads(out)
    assert code == 0 and data["kind"] == "U" and data["size"] == 3
    assert {"i": 1, "j": 1, "coef": {"a": "24/1"}, "exp2": "0/1"} in data["entries"]


def test_charpoly_text_and_json(capsys):
    code, out, _ = run(capsys, "charpoly", "--kind", "U", "--s", "0", "--size", "2", "--format", "text")
    assert code == 0 and out.strip() == "1 - 25T + 24T^2"
    code, out, _ = run(capsys, "charpoly", "--kind", "U", "--s", "0", "--size", "2")
    assert json.loads(out)["newton"]["segments"] == [["0/1", 1], ["3/1", 1]]


def test_slopes_stable_and_unstable(capsys):
    code, out, _ = run(capsys, "slopes", "--s", "0", "--size", "12", "--bound", "8")
    assert code == 0 and out.splitlines()[0].startswith("kind,s_a,s_b,N")
    code, out, _ = run(capsys, "slopes", "--s", "0", "--size", "4", "--bound", "30", "--format", "text")
    assert code == 1 and "UNSTABLE" in out


def test_classify_formats(capsys):
    code, out, _ = run(capsys, "classify", "--s", "1/2")
    assert code == 0 and "ExcludedUnit" in out and "2/3" in out
    code, out, _ = run(capsys, "classify", "--s", "1+sqrt2", "--format", "json")
    assert json.loads(out)["r_critical"] == "29/96"


def test_kernel_small(capsys):
    code, out, _ = run(capsys, "kernel", "--s", "0", "--size", "20", "--odd-prec", "16", "--n-max", "6")
    data = json.loads(out)
    assert code == 0 and data["residual_zero"] is True and data["odd_support"] is True
    assert "nondecay" in data


@pytest.mark.parametrize("argv", [
    ["charpoly", "--s", "abc", "--size", "3"],
    ["charpoly", "--s", "0", "--size", "0"],
    ["matrix", "--s", "0", "--size", "3", "--r", "x"],
    ["series", "--name", "bogus", "--prec", "3"],
    ["series", "--name", "hs", "--prec", "3"],
    ["nosuchcommand"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


@pytest.mark.parametrize("argv,needle", [
    (["classify", "--s", "1/4+1/4*sqrt2"], "v(s) > -2"),
    (["matrix", "--kind", "U", "--s", "0", "--r", "1", "--size", "3"], "r < 1/2"),
    (["charpoly", "--kind", "W", "--s", "0", "--r", "1/3", "--size", "3"], "12r < 3"),
    (["kernel", "--s", "1/2", "--size", "20"], "2-adic unit"),
])
def test_precondition_exit_3(capsys, argv, needle):
    code, out, err = run(capsys, *argv)
    assert code == 3 and needle in err and not out


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("USLOPE_THREADS", "zero")
    code, _, err = run(capsys, "verify", "--suite", "kernel")
    assert code == 2 and "USLOPE_THREADS" in err
    monkeypatch.setenv("USLOPE_THREADS", "0")
    assert run(capsys, "verify", "--suite", "kernel")[0] == 2


def test_verify_ledger_parallel(capsys, monkeypatch):
    monkeypatch.setenv("USLOPE_THREADS", "2")
    code, out, _ = run(capsys, "verify", "--suite", "combinatorial", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["suite"] == "combinatorial"
    assert [it["id"] for it in data["items"]] == [it.id for it in suites.items_for("combinatorial")]
    assert all(set(it) == {"id", "desc", "status", "detail"} and it["status"] == "pass" for it in data["items"])


def test_verify_failure_exit_1(capsys, monkeypatch):
    monkeypatch.setenv("USLOPE_THREADS", "1")
    bad = suites.Item("X1", "kernel", "always fails", lambda opts: ("fail", "forced"))
    monkeypatch.setattr(suites, "items_for", lambda suite: [bad])
    code, out, _ = run(capsys, "verify", "--suite", "kernel", "--format", "csv")
    assert code == 1 and "X1,always fails,fail,forced" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "uslope.cli", "classify", "--s", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "SInZ2Generic" in proc.stdout


def test_verify_all_reduced_size(capsys, monkeypatch):
    # --size shrinks the oracle blocks and the witness so the whole ledger runs quickly
    monkeypatch.setenv("USLOPE_THREADS", "1")
    code, out, _ = run(capsys, "verify", "--suite", "all", "--size", "64", "--format", "json")
    data = json.loads(out)
    failed = [(it["id"], it["detail"]) for it in data["items"] if it["status"] != "pass"]
    assert code == 0 and not failed
    assert {it["id"] for it in data["items"]} == {it.id for it in suites.ITEMS}
