import csv
import io
import json
import math

import pytest

from heatlab.cli import ConfigError, main, parse_times


def _run(tmp_path, *args, name="out"):
    out, summ = tmp_path / f"{name}.csv", tmp_path / f"{name}.json"
    code = main(["run", *args, "--out", str(out), "--summary", str(summ)])
    return code, out.read_text(), json.loads(summ.read_text())


def _rows(text):
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def test_kernel_eval_matches_closed_form(tmp_path):
    code, text, summary = _run(tmp_path, "kernel-eval", "--space", "Hr:3", "--t", "1", "--r", "2")
    assert code == 0 and summary["passed"]
    (row,) = _rows(text)
    exact = (4 * math.pi) ** -1.5 * (2 / math.sinh(2)) * math.exp(-1 - 1)
    assert float(row["h_t"]) == pytest.approx(exact, rel=1e-6)
    header = json.loads(text.splitlines()[0][2:])
    assert header["config"]["space"] == "Hr:3"
    assert header["engine"]["space"] == "Hr:3"


def test_rerun_is_byte_identical(tmp_path):
    args = ("kernel-eval", "--space", "Hr:2", "--t", "1,4", "--r", "0.5,3")
    a = _run(tmp_path, *args, name="a")[1]
    b = _run(tmp_path, *args, name="b")[1]
    assert a == b


def test_stamp_only_changes_header(tmp_path):
    args = ("kernel-eval", "--space", "Hr:2", "--t", "2", "--r", "1")
    a = _run(tmp_path, *args, name="a")[1]
    b = _run(tmp_path, *args, "--stamp", name="b")[1]
    assert a.splitlines()[1:] == b.splitlines()[1:]
    assert a.splitlines()[0] != b.splitlines()[0]


@pytest.mark.parametrize("argv", [
    ["run", "kernel-eval", "--space", "Xx:9", "--t", "1", "--r", "1"],
    ["run", "concentration", "--space", "Hr:2", "--t", "3,2"],
    ["run", "thm12", "--space", "Hr:3", "--t", "10:40:dyadic", "--center", "1"],
    ["space", "Hr:1"],
])
def test_invalid_config_exits_2(argv, capsys):
    assert main(argv) == 2
    assert "heatlab" in capsys.readouterr().err


def test_parse_times():
    assert parse_times("10:80:dyadic") == [10.0, 20.0, 40.0, 80.0]
    assert parse_times("1:3:3") == [1.0, 2.0, 3.0]
    assert parse_times("0.5") == [0.5]
    with pytest.raises(ConfigError):
        parse_times("2,1")
    with pytest.raises(ConfigError):
        parse_times("a:b")


def test_space_command(capsys):
    assert main(["space", "A2c"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["rank"] == 2 and info["dimension"] == 8 and info["weyl_order"] == 6


def test_dump_c(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["dump", "c", "--space", "Hr:2", "--n", "3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    lam = float(rows[-1]["lam"])
    assert float(rows[-1]["plancherel"]) == pytest.approx(math.pi * lam * math.tanh(math.pi * lam), rel=1e-9)


def test_dump_phi_error_column(tmp_path):
    out = tmp_path / "phi.csv"
    assert main(["dump", "phi", "--space", "Hr:3", "--n", "4", "--r-max", "4", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert rows and all(float(r["est_error"]) < 1e-7 for r in rows)


def test_unit_suite(tmp_path):
    verdict = tmp_path / "v.json"
    assert main(["check", "unit", "--json", str(verdict)]) == 0
    data = json.loads(verdict.read_text())
    assert data["passed"]
