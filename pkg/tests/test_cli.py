import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

from pslearn.cli import main
from pslearn.core import Interval, IntervalSet
from pslearn.strategies import StrategySpec, Transcript


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_ob_passes(capsys):
    code, out, _ = run(capsys, "verify", "--strategy", "ob", "--epsilon", "1/24", "--delta", "1/3", "--L", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["privacy_ok"] and doc["report"]["min_cover_number"] >= 3
    assert StrategySpec.from_json(doc["strategy"]) == StrategySpec.build("ob", "1/24", "1/3", 3)


def test_verify_bisection_fails_with_witness(capsys):
    code, out, err = run(capsys, "verify", "--strategy", "bisection", "--epsilon", "1/16", "--delta", "1/4", "--L", "2")
    assert code == 1 and "verification failed" in err
    witness = Transcript.from_json(json.loads(out)["report"]["witness_transcript"])
    assert len(witness.queries) == 4


def test_verify_preset(capsys):
    code, out, _ = run(capsys, "verify", "--preset", "ob-private")
    assert code == 0 and json.loads(out)["strategy"]["family"] == "OpportunisticBisection"


def test_table_gap_grid_preset(capsys):
    code, out, _ = run(capsys, "table", "--preset", "corollary1", "--Ls", "2,3,4", "--epsilons", "1/32,1/64")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 6 and list(rows[0]) == ["config", "epsilon", "delta", "L", "n", "lower", "upper", "gap"]
    assert all(int(r["gap"]) <= 4 for r in rows if int(r["L"]) >= 3)


def test_table_json_and_regime_error(capsys):
    code, out, _ = run(capsys, "table", "--strategy", "ob", "--epsilon", "1/24", "--delta", "1/3", "--L", "3", "--format", "json")
    assert code == 0 and json.loads(out)[0]["gap"] == 4
    code, _, err = run(capsys, "table", "--strategy", "ob", "--epsilon", "1/24", "--delta", "1/2", "--L", "3")
    assert code == 2 and "2*epsilon < delta <= 1/L" in err


def test_parse_errors_name_the_field(capsys):
    code, _, err = run(capsys, "verify", "--strategy", "ob", "--epsilon", "1/0")
    assert code == 2 and "epsilon" in err and "malformed-number" in err
    code, _, err = run(capsys, "verify", "--strategy", "ob", "--epsilon", "1/24", "--L", "three")
    assert code == 2 and "L:" in err
    code, _, err = run(capsys, "verify", "--epsilon", "1/24")
    assert code == 2 and "strategy.family" in err
    code, _, err = run(capsys, "simulate", "--strategy", "ob", "--epsilon", "1/24", "--L", "3")
    assert code == 2 and "field v" in err


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--strategy", "bisection", "--epsilon", "1/4", "--v", "0.3")
    doc = json.loads(out)
    assert code == 0 and doc["estimate"] == "3/8" and doc["transcript"]["queries"] == ["1/2", "1/4"]
    code, out, _ = run(capsys, "simulate", "--strategy", "ob-d", "--epsilon", "1/32", "--L", "4", "--d", "2", "--v", "1/3,2/3", "--seed", "17")
    assert code == 0 and len(json.loads(out)["estimate"]) == 2


def test_leaves_jsonl(capsys, tmp_path):
    out_file = tmp_path / "leaves.jsonl"
    code, _, _ = run(capsys, "leaves", "--strategy", "ob", "--epsilon", "1/24", "--delta", "1/3", "--L", "3", "--out", str(out_file))
    lines = out_file.read_text().splitlines()
    assert code == 0 and len(lines) == 648
    first = json.loads(lines[0])
    assert set(first) == {"seed", "responses", "consistency", "queries", "estimate"}
    Interval.from_json(first["consistency"])


def test_infoset_and_cover(capsys):
    code, out, _ = run(capsys, "infoset", "--strategy", "bisection", "--epsilon", "1/4", "--queries", "1/2,1/4")
    doc = json.loads(out)
    assert code == 0 and IntervalSet.from_json(doc["information_set"]) == IntervalSet((Interval.half_open(0, Fraction(1, 2)),))
    code, _, _ = run(capsys, "infoset", "--strategy", "bisection", "--epsilon", "1/4", "--queries", "1/3")
    assert code == 2
    code, out, _ = run(capsys, "cover", "--set", "[0,1/4) u [1/2,3/4]", "--delta", "1/4")
    doc = json.loads(out)
    assert code == 0 and doc["cover_number"] == 2 and doc["packing"] == ["0/1", "1/2"]
    code, _, err = run(capsys, "cover", "--set", "[0,1/4", "--delta", "1/4")
    assert code == 2 and "set" in err


def test_bayes_deterministic(capsys):
    args = ["bayes", "--strategy", "rb", "--epsilon", "1/16", "--delta", "1/2", "--L", "2", "--trials", "5000", "--rng-seed", "7"]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args, "--backend", "python")
    assert json.loads(first) == json.loads(second)
    assert json.loads(first)["estimator"] == "best_replica"


def test_bayes_contrast_preset(capsys):
    code, out, _ = run(capsys, "bayes", "--preset", "bayes-contrast", "--trials", "20000")
    rb, ob = json.loads(out)["rows"]
    assert code == 0 and abs(rb["success_float"] - 0.5) < 0.02 and ob["success_float"] >= 0.87


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "verify", "strategy": {"family": "dense", "epsilon": "1/8", "delta": "1/4", "L": 4}}))
    code, out, _ = run(capsys, "--config", str(cfg))
    assert code == 0 and json.loads(out)["report"]["min_cover_number"] == 4
    no_command = tmp_path / "no_command.json"
    no_command.write_text("{}")
    code, _, err = run(capsys, "--config", str(no_command))
    assert code == 2 and "command" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"strategy":\n  {"family": }}')
    code, _, err = run(capsys, "verify", "--config", str(bad))
    assert code == 2 and "line 2" in err


def test_csv_only_for_table(capsys):
    code, _, err = run(capsys, "verify", "--preset", "prop1", "--format", "csv")
    assert code == 2 and "csv" in err


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "pslearn.cli", "verify", "--strategy", "bisection", "--epsilon", "1/16", "--delta", "1/4", "--L", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 1
    assert json.loads(out.stdout)["report"]["privacy_ok"] is False
