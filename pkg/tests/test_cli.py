import csv
import io
import subprocess
import sys

import pytest

from hopfheat import cli, validation
from hopfheat.validation import SuiteResult


def run(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:   # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_axis():
    assert cli.parse_axis("0.5") == [0.5]
    assert cli.parse_axis("0.1, 0.5") == [0.1, 0.5]
    assert cli.parse_axis("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    for bad in ("", "a", "0:1:0", "0:1"):
        with pytest.raises(cli.ConfigError):
            cli.parse_axis(bad)


def test_kernel_sphere_routes_agree(capsys):
    base = ["kernel-sphere", "--n", "1", "--t", "0.5", "--r", "0,0.7", "--eta", "0.3,2.0"]
    c1, spec_out, _ = run(base + ["--method", "spectral"], capsys)
    c2, int_out, _ = run(base + ["--method", "integral"], capsys)
    assert c1 == c2 == 0
    a, b = rows(spec_out), rows(int_out)
    assert list(a[0]) == ["r", "eta", "t", "value", "error_estimate", "method", "terms_or_evals"]
    assert len(a) == len(b) == 4
    for x, y in zip(a, b):
        assert (x["r"], x["eta"]) == (y["r"], y["eta"])
        assert float(x["value"]) == pytest.approx(float(y["value"]), rel=1e-6)
    assert {x["method"] for x in a} == {"spectral"}


def test_auto_switch(capsys):
    code, out, _ = run(["kernel-sphere", "--n", "1", "--t", "0.05,0.5", "--r", "0.3", "--eta", "1"], capsys)
    assert code == 0
    assert [x["method"] for x in rows(out)] == ["integral", "spectral"]


def test_deterministic(capsys):
    argv = ["kernel-cp", "--n", "1", "--t", "0.5", "--r", "0.4", "--phi", "0.2,0.6"]
    assert run(argv, capsys)[1] == run(argv, capsys)[1]


def test_kernel_cp_golden(capsys):
    code, out, _ = run(["kernel-cp", "--n", "1", "--t", "0.5", "--r", "0.4", "--phi", "0.6"], capsys)
    assert code == 0
    assert float(rows(out)[0]["value"]) == pytest.approx(0.01624249824940799, rel=1e-10)


def test_green_distance_asymptotics(capsys, tmp_path):
    dest = tmp_path / "g.csv"
    assert run(["green", "--n", "1", "--r", "1.5", "--eta", "0", "--out", str(dest)], capsys)[0] == 0
    assert len(rows(dest.read_text())) == 1
    code, out, _ = run(["distance", "--r", "0.3", "--eta", "0"], capsys)
    assert code == 0 and float(rows(out)[0]["value"]) == pytest.approx(0.3, abs=1e-6)
    code, out, _ = run(["asymptotics", "--n", "1", "--regime", "vertical", "--t", "0.02", "--eta", "1.5",
                        "--form", "paper"], capsys)
    assert code == 0 and rows(out)[0]["regime"] == "vertical"


@pytest.mark.parametrize("argv", [
    ["kernel-sphere", "--n", "1", "--t", "0", "--r", "0", "--eta", "0"],
    ["kernel-sphere", "--n", "0", "--t", "1", "--r", "0", "--eta", "0"],
    ["kernel-sphere", "--n", "1", "--t", "1", "--r", "2", "--eta", "0"],
    ["kernel-sphere", "--n", "1", "--t", "1", "--r", "x", "--eta", "0"],
    ["kernel-sphere", "--n", "1", "--t", "1", "--r", "0", "--eta", "0", "--method", "intertwined"],
    ["green", "--n", "1", "--r", "0", "--eta", "0"],
    ["validate", "--suite", "nope"],
])
def test_config_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert "error:" in err


def test_validate_exit_codes(capsys, monkeypatch):
    code, out, _ = run(["validate", "--suite", "orthopoly"], capsys)
    assert code == 0 and "ALL PASS" in out
    monkeypatch.setitem(validation.SUITES, "broken", lambda ns=None: SuiteResult("broken", False, 2.0, 1.0))
    code, out, _ = run(["validate", "--suite", "broken"], capsys)
    assert code == 1 and out.startswith("FAIL")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hopfheat", "distance", "--r", "0", "--eta", "3.141592653589793"],
                         capture_output=True, text=True, check=True)
    assert float(rows(res.stdout)[0]["value"]) == pytest.approx(3.141592653589793, abs=1e-9)
