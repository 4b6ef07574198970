import io
import json
import subprocess
import sys

import pytest

from dclip.cli import run

ABS = '{"dim":1,"pieces":[{"a":[1],"b":0},{"a":[-1],"b":0}]}'
ZERO = '{"dim":1,"pieces":[{"a":[0],"b":0}]}'
BAD_H = '{"dim":1,"pieces":[{"a":[1],"b":1},{"a":[-1],"b":0}]}'
GRID = '{"dim":1,"points":[[-2],[-1],[0],[1],[2]]}'
BIG = json.dumps({"dim": 1, "pieces": [{"a": [k / 64], "b": 0} for k in range(65)]})


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in [("abs", ABS), ("zero", ZERO), ("bad_h", BAD_H), ("grid", GRID), ("big", BIG)]:
        p = tmp_path / f"{name}.json"
        p.write_text(text)
        out[name] = str(p)
    return out


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), out=buf)
    text = buf.getvalue()
    assert text.endswith("\n") and text.count("\n") == 1
    return code, json.loads(text), text


def test_check_true(files):
    code, doc, _ = call("check", "--f", files["abs"], "--g", files["zero"], "--K", "1",
                        "--x", "[1]", "--eps", "0.5", "--cond", "II")
    assert code == 0 and doc["verdict"] is True


def test_certify_refutes(files):
    code, doc, _ = call("certify", "--f", files["abs"], "--g", files["zero"], "--K", "0.5",
                        "--grid", files["grid"], "--eps", "1e-6,0.01")
    assert code == 1
    assert doc["overall"] == "Refuted"
    assert doc["refutation"]["x"] == [-2.0]
    assert any(r["x"] == [1.0] and r["epsilon"] == 1e-6 and not r["verdict"] for r in doc["results"])


def test_certify_box_and_exact(files):
    code, doc, _ = call("certify", "--f", files["abs"], "--g", files["zero"], "--K", "1",
                        "--box=-2,2", "--per-dim", "5", "--eps", "0.1", "--exact")
    assert code == 0 and doc["scope"] == "global" and doc["exact_constant"] == 1.0
    code, doc, _ = call("certify", "--f", files["abs"], "--g", files["zero"], "--h", files["abs"],
                        "--grid", files["grid"], "--eps", "0.1", "--cond", "II,IV")
    assert code == 0 and doc["overall"] == "Certified"


@pytest.mark.parametrize(
    "argv",
    [
        ("check", "--f", "{abs}", "--K", "1"),
        ("check", "--f", "{abs}", "--g", "{zero}", "--K", "1", "--h", "{abs}", "--x", "[1]",
         "--eps", "1", "--cond", "II"),
        ("check", "--f", "{abs}", "--g", "{zero}", "--K", "1", "--x", "[1]", "--eps", "1",
         "--cond", "II", "--bogus"),
        ("check", "--f", "{abs}", "--g", "{zero}", "--K", "1", "--x", "[1, 2]", "--eps", "1",
         "--cond", "II"),
        ("check", "--f", "{abs}", "--g", "{zero}", "--K", "1", "--x", "[1]", "--eps", "-1",
         "--cond", "II"),
        ("check", "--f", "{abs}", "--g", "{zero}", "--h", "{abs}", "--x", "[1]", "--eps", "1",
         "--cond", "VI"),
        ("check", "--f", "{abs}", "--g", "{zero}", "--h", "{bad_h}", "--x", "[1]", "--eps", "1",
         "--cond", "II"),
        ("check", "--f", "missing.json", "--g", "{zero}", "--K", "1", "--x", "[1]", "--eps", "1",
         "--cond", "II"),
        ("certify", "--f", "{abs}", "--g", "{zero}", "--K", "1", "--eps", "0.1"),
        ("estimate", "--f", "{abs}", "--g", "{zero}"),
        ("frobnicate",),
    ],
)
def test_input_errors_exit_2(files, argv):
    code, doc, _ = call(*[a.format(**files) for a in argv])
    assert code == 2 and "error" in doc


def test_capacity_error_exit_3(files):
    code, doc, _ = call("subdiff", "--f", files["big"], "--x", "[0]", "--eps", "0.1", "--vertices")
    assert code == 3 and doc["error"] == "numerical"


def test_subdiff_vertices(files):
    code, doc, _ = call("subdiff", "--f", files["abs"], "--x", "[1]", "--eps", "0.5", "--vertices")
    assert code == 0
    assert list(doc) == ["vertices", "epsilon", "point"]
    assert sorted(v[0] for v in doc["vertices"]) == [0.5, 1.0]
    code, doc, _ = call("subdiff", "--f", files["abs"], "--x", "1", "--eps", "0.5")
    assert doc["bounds"] == [[0.5, 1.0]]


def test_chain_estimate_constancy(files):
    code, doc, _ = call("chain", "--f", files["abs"], "--g", files["zero"], "--K", "0",
                        "--x", "[0]", "--y", "[2]", "--m", "10", "--eps", "1e-6")
    assert code == 1 and doc["feasible"] is False
    code, doc, _ = call("chain", "--f", files["abs"], "--g", files["zero"], "--K", "1",
                        "--x", "[0]", "--y", "[2]", "--m", "100", "--eps", "0.01")
    assert code == 0 and doc["holds"] is True
    code, doc, _ = call("estimate", "--f", files["abs"], "--g", files["zero"], "--exact")
    assert code == 0 and doc["K"] == 1.0
    code, doc, _ = call("estimate", "--f", files["abs"], "--g", files["zero"], "--samples", "1000",
                        "--seed", "4", "--box=-2,2")
    assert code == 0 and 0.9 < doc["K"] <= 1.0
    code, doc, _ = call("constancy", "--f", files["abs"], "--g", files["abs"], "--grid", files["grid"],
                        "--eps", "0.1", "--tol", "1e-9")
    assert code == 0 and doc["constant"] is True and doc["c"] == 0.0
    code, doc, _ = call("constancy", "--f", files["abs"], "--g", files["zero"], "--grid", files["grid"],
                        "--eps", "1e-6")
    assert code == 1


def test_output_is_byte_identical(files):
    argv = ("certify", "--f", files["abs"], "--g", files["zero"], "--K", "0.7",
            "--grid", files["grid"], "--eps", "1e-6,0.3", "--norm", "linf")
    assert call(*argv)[2] == call(*argv)[2]


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "dclip", "check", "--f", files["abs"], "--g", files["zero"],
         "--K", "0.9", "--x", "[1]", "--eps", "1e-6", "--cond", "IV"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["verdict"] is False
