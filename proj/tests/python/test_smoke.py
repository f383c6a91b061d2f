import itertools
import json
from pathlib import Path

import pytest

import intrinsic_agents as ia

DATA = Path(__file__).resolve().parents[2] / "data" / "scenarios" / "data_pipeline"
SCENARIO = DATA / "scenario.json"


def test_bundled_run_finalizes():
    report = ia.run_scenario(SCENARIO)
    assert report["outcome"] == "finalized"
    assert report["speaker_trace"][:11] == [
        "CDA", "BOA", "CDA", "DEA", "CDA", "MLE", "CDA", "IA", "KIA", "EA", "CDA",
    ]
    assert report["speaker_trace"][-1] == "DJE"
    assert len(report["transcript"]) == report["total_turns"]


def test_run_persists_artifacts(tmp_path):
    report = ia.run_scenario(SCENARIO, out=tmp_path)
    run_dir = Path(report["run_dir"])
    assert (run_dir / "manifest.json").is_file()
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["complete"] is True


def test_baseline_mode_has_no_memory_blocks():
    report = ia.run_scenario(SCENARIO, mode="baseline")
    assert all(t["context"]["memory_block"] == "" for t in report["transcript"])


def test_load_scenario_and_errors(tmp_path):
    doc = ia.load_scenario(SCENARIO)
    assert doc["name"] == "data_pipeline"
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    with pytest.raises(ia.LoadError):
        ia.load_scenario(bad)
    with pytest.raises(ia.Error):
        ia.load_scenario(bad)


def test_flags():
    assert ia.detect_flags("I ACCEPT this") == (True, False)
    assert ia.detect_flags("FINALIZATION ready") == (False, True)
    assert ia.detect_flags("ACCEPTED") == (False, False)


def test_select_context_keeps_newest_suffix():
    history = ["t" * 8, "a" * 40, "b" * 8, "c" * 8]
    first, total, over = ia.select_context(history, "", 8)
    assert (first, total, over) == (2, 6, False)


def test_validate_memory():
    template = {"plan": "current plan", "risks": {"open": "open risks"}}
    assert ia.validate_memory(template, {"plan": "x", "risks": {"open": ""}}) == (True, [])
    ok, violations = ia.validate_memory(template, {"plan": 1, "extra": ""})
    assert not ok
    assert set(violations) == {("/plan", "not_string"), ("/risks", "missing"), ("/extra", "extra")}


def test_prompts():
    prompt = ia.render_update_prompt("the Data Engineer Agent", {"plan": ""}, "We pick Kafka.")
    assert "working as the Data Engineer Agent in a multi-agent conversation" in prompt
    assert '{"plan":""}' in prompt
    assert "Be critical and harsh" in ia.render_judge_prompt("design")
    with pytest.raises(ia.PreconditionError):
        ia.render_judge_prompt("")


def test_parse_scorecard():
    metrics = ["Scalability", "Reliability", "Usability", "Cost-effectiveness", "Documentation"]
    body = {m: {"score": 7, "justification": "ok"} for m in metrics}
    card = ia.parse_scorecard("```json\n" + json.dumps(body) + "\n```")
    assert card
    with pytest.raises(ia.ParseError):
        ia.parse_scorecard("no json here")


def test_token_efficiency_and_percent():
    assert abs(ia.token_efficiency(0.0833, 140418) - 5.933e-7) < 1e-10
    assert ia.format_percent_change((47830 / 36077 - 1) * 100) == "+32.6%"


def brute_force_p(a, b):
    pooled = a + b
    n = len(pooled)
    ranks = [sum(v < x for v in pooled) + (sum(v == x for v in pooled) + 1) / 2 for x in pooled]
    mean = len(a) * (n + 1) / 2
    observed = abs(sum(ranks[: len(a)]) - mean)
    hits = total = 0
    for combo in itertools.combinations(range(n), len(a)):
        total += 1
        hits += abs(sum(ranks[i] for i in combo) - mean) >= observed - 1e-9
    return hits / total


@pytest.mark.parametrize(
    "a,b",
    [([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]), ([1.0, 1.0, 2.0], [2.0, 3.0]), ([5.0], [1.0, 2.0, 3.0, 4.0])],
)
def test_rank_sum_matches_enumeration(a, b):
    _, p, exact = ia.rank_sum_test(a, b)
    assert exact
    assert p == pytest.approx(brute_force_p(a, b), abs=1e-12)


def test_rank_sum_identical_samples():
    assert ia.rank_sum_test([3.0, 1.0, 2.0], [3.0, 1.0, 2.0])[1] == 1.0
