import csv
from fractions import Fraction
import io
import json
import math
import subprocess
import sys

import pytest

from univoque import cli
from univoque.cli import (
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_PRECISION,
    Config,
    PRECISION_ENV,
    SUITES,
    main,
    parse_q,
    parse_sequence,
    staircase_rows,
)
from univoque.expansion import PrecisionExhausted
from univoque.words import EventuallyPeriodic


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def config():
    return Config(1, 128, 6, 8, Fraction(1, 10**9), None, "human")


def test_alpha_examples():
    assert run("alpha", "--M", "1", "--q", "kl", "--n", "16") == (EXIT_OK, "1101001100101101\n")
    assert run("alpha", "--M", "1", "--q", "2", "--n", "8") == (EXIT_OK, "11111111\n")
    assert run("alpha", "--M", "1", "--q", "alpha:per(10)", "--n", "6") == (EXIT_OK, "101010\n")


def test_alpha_json_reports_precision():
    code, text = run("alpha", "--q", "golden", "--n", "4", "--format", "json")
    row = json.loads(text)
    assert code == EXIT_OK and row["alpha"] == "1010" and row["precision_bits"] >= 128


def test_unknown_node_path_exits_two():
    assert run("dim", "--q", "qR:99")[0] == EXIT_PARSE


def test_parse_errors_exit_two():
    assert run("alpha", "--q", "banana")[0] == EXIT_PARSE
    assert run("alpha", "--q", "3")[0] == EXIT_PARSE
    assert run("alpha", "--q", "alpha:per(01)")[0] == EXIT_PARSE
    with pytest.raises(SystemExit) as exc:
        main(["alpha"], io.StringIO())
    assert exc.value.code == 2


def test_precision_failure_exits_three(monkeypatch):
    def exhausted(q, n):
        raise PrecisionExhausted("digit 3 undecided")

    monkeypatch.setattr(cli, "quasi_greedy_alpha", exhausted)
    assert run("alpha", "--q", "golden")[0] == EXIT_PRECISION


def test_tolerance_below_precision_is_rejected():
    assert run("alpha", "--q", "golden", "--precision", "16")[0] == EXIT_PARSE


def test_precision_from_environment(monkeypatch):
    monkeypatch.setenv(PRECISION_ENV, "200")
    _, text = run("alpha", "--q", "1.5", "--format", "json")
    assert json.loads(text)["precision_bits"] == 200
    _, text = run("alpha", "--q", "1.5", "--precision", "96", "--format", "json")
    assert json.loads(text)["precision_bits"] == 96


def test_q_spec_grammar(config):
    tree = config.tree()
    assert parse_q("golden", config).defining_seq == EventuallyPeriodic(1, (), (1, 0))
    assert parse_q("pre(11)per(01)", config).defining_seq == EventuallyPeriodic(1, (1, 1), (0, 1))
    assert parse_q("qR:18", config, tree).interval == tree.node("18").q_R.interval
    assert parse_q("1.75", config).lo == Fraction(7, 4)
    assert parse_sequence("per(10,2)", 10) == EventuallyPeriodic(10, (), (10, 2))


def test_tree_lists_the_1110_node():
    code, text = run("tree", "--M", "1", "--max-word-len", "4", "--levels", "1")
    assert code == EXIT_OK
    words = [line.split("\t")[1] for line in text.splitlines()]
    assert "1110" in words


def test_tree_lists_null_child_first():
    _, text = run("tree", "--max-word-len", "4", "--levels", "2")
    paths = [line.split("\t")[0] for line in text.splitlines()]
    for parent in ("1", "2"):
        kids = [p for p in paths if p.startswith(parent + ".")]
        assert kids[0] == parent + ".0"


def test_tree_cache_is_byte_identical(tmp_path):
    cache = tmp_path / "tree.tsv"
    run("tree", "--max-word-len", "5", "--levels", "2", "--cache", str(cache))
    first = cache.read_bytes()
    run("tree", "--max-word-len", "5", "--levels", "2", "--cache", str(cache))
    assert cache.read_bytes() == first


def test_dim_examples():
    code, text = run("dim", "--M", "1", "--q", "2", "--side", "left")
    assert code == EXIT_OK and text.startswith("1.0000 ")
    code, text = run("dim", "--q", "1.5")
    assert text.startswith("0.0000 ")


def test_dim_interval_over_a_plateau(config):
    code, text = run("dim", "--interval", "qL:7", "qR:7", "--format", "json")
    row = json.loads(text)
    assert code == EXIT_OK and row["plateau"] == "7"
    assert row["hi"] - row["lo"] < 1e-8
    q_R = float(config.tree().node("7").q_R.mid)
    assert row["lo"] - 1e-9 <= math.log(2) / (3 * math.log(q_R)) <= row["hi"] + 1e-9


def test_dim_null_interval_midpoint(config):
    node = config.tree().node("18.0")
    mid = (node.q_L.mid + node.q_R.mid) / 2
    code, text = run("dim", "--q", repr(float(mid)))
    assert code == EXIT_OK and text.startswith("0.0000 ")


def test_staircase_H_shape(config):
    rows = staircase_rows(config, "H", Fraction(17, 10), Fraction(2), 7)
    assert len(rows) == 7
    values = [float(r["value_lo"]) for r in rows]
    # grid points 1.7 and 1.75 lie below the Komornik-Loreti constant
    assert values[:2] == [0.0, 0.0] and values[2] > 0 and values[-1] > 0.69
    assert values == sorted(values)


def test_staircase_HJ_shape(config):
    rows = staircase_rows(config, "HJ:18", None, None, 9)
    node = config.tree().node("18")
    qc = float(node.q_c.mid)
    for r in rows:
        if float(r["q"]) <= qc:
            assert float(r["value_hi"]) == 0
    assert float(rows[-1]["value_lo"]) > 0
    values = [float(r["value_lo"]) for r in rows]
    assert values == sorted(values)


def test_staircase_constant_across_a_plateau(config):
    node = config.tree().node("18")
    rows = staircase_rows(config, "H", node.q_L.hi, node.q_R.lo, 5)
    assert len({(r["value_lo"], r["value_hi"]) for r in rows}) == 1


def test_staircase_csv_round_trip():
    code, text = run("staircase", "--which", "DJ:18", "--grid", "6")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 6 and list(rows[0]) == ["q", "value_lo", "value_hi"]
    again = io.StringIO()
    writer = csv.DictWriter(again, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    assert again.getvalue() == text
    for r in rows:
        assert repr(float(r["q"])) == r["q"] and float(r["value_lo"]) <= float(r["value_hi"])


def test_staircase_needs_two_points():
    assert run("staircase", "--grid", "1")[0] == EXIT_PARSE
    assert run("staircase", "--which", "HJ")[0] == EXIT_PARSE


def test_commands_are_deterministic():
    argv = ("staircase", "--which", "HJ:18", "--grid", "4", "--format", "json")
    assert run(*argv) == run(*argv)


def test_oracle_suites_pass():
    code, text = run("oracle", "--suite", "constants")
    assert code == EXIT_OK and text.count("pass") == 3
    code, text = run("oracle", "--suite", "plateaus", "--max-word-len", "5")
    assert code == EXIT_OK and "FAIL" not in text


def test_oracle_reports_mismatch(monkeypatch):
    def broken(config):
        yield "always wrong", False, "counterexample"

    monkeypatch.setitem(SUITES, "constants", broken)
    code, text = run("oracle", "--suite", "constants")
    assert code == EXIT_MISMATCH and "FAIL  always wrong  counterexample" in text


def test_console_entry_point():
    result = subprocess.run([sys.executable, "-m", "univoque.cli", "alpha", "--q", "golden", "--n", "6"],
                            capture_output=True, text=True, check=False)
    assert result.returncode == 0 and result.stdout == "101010\n"
