import subprocess
import sys
from fractions import Fraction as F

import pytest

from envycake import cli
from envycake.cli import format_valuations, main, parse_rational, parse_report, parse_template, parse_valuations
from envycake.errors import ContradictionError, InputError

UNIFORM3 = "agents: 3\nagent ann: 0 1 1\nagent bob: 0 1 1  # flat\nagent cat: 0 1 1\n"
FOUR = """agents: 4
agent ann: 0 1 1
agent bob: 0 2 1/2 0 1
agent cat: 0 1/2 1/2 3/2 1
agent dan: 0 3/2 1/3 3/4 1
"""


def write(tmp_path, text, name="v.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_rational():
    assert parse_rational("3/4") == F(3, 4)
    assert parse_rational(" -2 ") == -2
    for bad in ("1.5", "1/0", "a/b", "1//2", ""):
        with pytest.raises(InputError):
            parse_rational(bad)


def test_valuation_round_trip():
    names, ms = parse_valuations(FOUR)
    assert names == ["ann", "bob", "cat", "dan"]
    assert ms[1].value(((F(0), F(1, 4)),)) == F(1, 2)
    assert parse_valuations(format_valuations(names, ms)) == (names, ms)


@pytest.mark.parametrize("text", [
    "",
    "agent a: 0 1 1\n",
    "agents: 2\nagent a: 0 1 1\n",
    "agents: 1\nagent a: 0 1\n",
    "agents: 1\nagent a: 0 1 1/2 1 1/2\n",
    "agents: 1\nagent a: 0 -1 1\n",
    "agents: 1\nagent a: 0 1 1/2 1 1/4\n",
    "agents: 2\nagent a: 0 1 1\nagent a: 0 1 1\n",
])
def test_bad_valuation_files(text):
    with pytest.raises(InputError):
        parse_valuations(text)


def test_normalize_flag():
    names, ms = parse_valuations("agents: 1\nagent a: 0 2 1/2 4 1\n", normalize=True)
    assert ms[0].total == 1
    assert ms[0].value(((F(0), F(1, 2)),)) == F(1, 3)


def test_three_uniform_agents(tmp_path, capsys):
    code, out, _ = run(capsys, "divide", "--input", write(tmp_path, UNIFORM3), "--mode", "connected-3",
                       "--report", "machine")
    assert code == 0
    rep = parse_report(out)
    assert [rep[f"agent.{i}.value"] for i in range(3)] == [F(1, 3)] * 3
    assert all(rep[f"envy.{i}.{j}"] == F(1, 3) for i in range(3) for j in range(3))


def test_connected_4_report_bounds(tmp_path, capsys):
    code, out, _ = run(capsys, "divide", "--input", write(tmp_path, FOUR), "--mode", "connected-4",
                       "--vip", "cat")
    assert code == 0
    assert "pieces<=7 ok" in out and "vip>=1/4 ok" in out and "floor>=1/7 ok" in out
    assert "vip: cat" in out


def test_disconnected_n_inner_runs(tmp_path, capsys):
    code, out, _ = run(capsys, "divide", "--input", write(tmp_path, FOUR), "--mode", "disconnected-n",
                       "--epsilon", "1/10", "--report", "machine")
    assert code == 0
    rep = parse_report(out)
    assert rep["check.floor"] == "ok"
    assert rep["bound.floor"] == F(9, 40)
    assert rep["inner_runs"] == 12
    assert rep["floor"] >= F(9, 40)


def test_entire_report(tmp_path, capsys):
    code, out, _ = run(capsys, "divide", "--input", write(tmp_path, FOUR), "--mode", "entire",
                       "--report", "machine")
    assert code == 0
    rep = parse_report(out)
    assert rep["remainder"] == []
    assert all(rep[f"remainder.{i}"] == 0 for i in range(4))


def test_machine_report_round_trip(tmp_path, capsys):
    code, out, _ = run(capsys, "divide", "--input", write(tmp_path, FOUR), "--mode", "connected-4",
                       "--report", "machine")
    assert code == 0
    rep = parse_report(out)
    names, ms = parse_valuations(FOUR)
    for i, m in enumerate(ms):
        cells = tuple(rep[f"agent.{i}.pieces"])
        assert m.value(cells) == rep[f"agent.{i}.value"]
        for j in range(4):
            assert m.value(tuple(rep[f"agent.{j}.pieces"])) == rep[f"envy.{i}.{j}"]
    assert rep["format"] == "envycake-report-1"
    assert rep["pieces"] <= 7


def test_machine_report_is_deterministic(tmp_path):
    path = write(tmp_path, FOUR)
    argv = [sys.executable, "-m", "envycake", "divide", "--input", path, "--mode", "disconnected-n",
            "--report", "machine"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second and first


def test_seeded_profile(capsys):
    code, out, _ = run(capsys, "divide", "--seed", "4", "--mode", "connected-n", "--agents", "5")
    assert code == 0 and "agents: 5" in out


@pytest.mark.parametrize("argv", [
    ["divide", "--mode", "connected-3"],
    ["divide", "--mode", "connected-4", "--input", "UNIFORM"],
    ["divide", "--mode", "connected-3", "--input", "UNIFORM", "--vip", "zed"],
    ["divide", "--mode", "disconnected-n", "--input", "UNIFORM", "--epsilon", "0.1"],
    ["divide", "--mode", "disconnected-n", "--input", "UNIFORM", "--epsilon", "3/2"],
    ["divide", "--mode", "entire", "--input", "/no/such/file"],
])
def test_input_errors_exit_2(tmp_path, capsys, argv):
    path = write(tmp_path, UNIFORM3)
    code, _, err = run(capsys, *[path if a == "UNIFORM" else a for a in argv])
    assert code == 2 and "error" in err


@pytest.mark.parametrize("argv", [["divide", "--mode", "nope"], ["prove4", "--case", "0"],
                                  ["prove4", "--case", "25"], []])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_violated_guarantee_exits_3(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "checks", lambda *a: [("envy-free", False)])
    code, out, err = run(capsys, "divide", "--input", write(tmp_path, UNIFORM3), "--mode", "connected-3")
    assert code == 3 and "contradiction" in err
    assert "envy-free FAILED" in out


def test_prove4_case_17(capsys):
    code, out, _ = run(capsys, "prove4", "--case", "17")
    assert code == 0
    assert out.startswith("CASE 17 OF 24") and "CASE 16" not in out
    assert "4bb<4cc 3bb<3cc" in out


def test_unprovable_case_exits_3(capsys, monkeypatch):
    def boom(only=None):
        raise ContradictionError("unprovable case")
    monkeypatch.setattr(cli, "prove_4agent", boom)
    code, _, err = run(capsys, "prove4")
    assert code == 3 and "unprovable" in err


def test_template_parsing():
    n, tpl = parse_template("agents: 4\n# comment\nb:Equalize(2); c:Equalize(3)\n")
    assert n == 4 and tpl[0].steps == ((1, "equalize", 2), (2, "equalize", 3))
    assert parse_template("") == (5, [])
    for bad in ("b:Equalize*(2)", "b:Mark(2)", "a:Equalize(2)", "agents: 4\ne:Equalize(2)", "b:Equalize(1)",
                "b:Equalize(2)\nagents: 4"):
        with pytest.raises(InputError):
            parse_template(bad)


def test_search5_four_agent_template(tmp_path, capsys):
    text = ("agents: 4\nb:Equalize(2); c:Equalize(2)\nc:Equalize(2); b:Equalize(2)\n"
            "b:Equalize(3); c:Equalize(2)\nc:Equalize(3); b:Equalize(2)\n")
    code, out, _ = run(capsys, "search5", "--template-file", write(tmp_path, text))
    assert code == 1
    assert out.splitlines()[-1] == "no counterexample"


def test_search5_empty_template(tmp_path, capsys):
    code, out, _ = run(capsys, "search5", "--template-file", write(tmp_path, ""))
    assert code == 0 and "counterexample" in out and "profiles checked: 1" in out


def test_help_documents_every_flag():
    out = subprocess.run([sys.executable, "-m", "envycake", "divide", "--help"], capture_output=True,
                         text=True, check=True).stdout
    for flag in ("--input", "--mode", "--epsilon", "--vip", "--report", "--normalize", "--seed", "--agents"):
        assert flag in out
    for sub, flags in (("prove4", ["--case"]), ("search5", ["--template-file", "--budget"])):
        text = subprocess.run([sys.executable, "-m", "envycake", sub, "--help"], capture_output=True,
                              text=True, check=True).stdout
        assert all(f in text for f in flags)
