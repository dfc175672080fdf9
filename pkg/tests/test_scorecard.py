import itertools
import json
from pathlib import Path

import pytest

from ledgercal.errors import OverrideWithoutRationale, WrongLength
from ledgercal.scorecard import (
    Override,
    load_answers,
    load_rubric,
    render_csv,
    render_figure,
    render_json,
    render_report,
    score,
    score_criterion,
)

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "ethereum-calendar.toml"


def brute_force_score(answers):
    """Answer left to right; the score is the last true reached before a false."""
    result = 0
    for i, answer in enumerate(answers):
        if not answer:
            break
        result = i + 1
    return result


def test_worked_example():
    assert score_criterion([True, True, False, True, True]) == 2


def test_all_false_and_all_true():
    assert score_criterion([False] * 5) == 0
    assert score_criterion([True] * 5) == 5


def test_exhaustive_against_brute_force():
    for vector in itertools.product([False, True], repeat=5):
        assert score_criterion(list(vector)) == brute_force_score(vector), vector


def test_monotone_in_answer_flips():
    for vector in itertools.product([False, True], repeat=5):
        base = score_criterion(list(vector))
        for i in range(5):
            if not vector[i]:
                flipped = list(vector)
                flipped[i] = True
                assert score_criterion(flipped) >= base


def test_answers_beyond_first_false_never_matter():
    for vector in itertools.product([False, True], repeat=5):
        vector = list(vector)
        if False not in vector:
            continue
        cut = vector.index(False)
        for tail in itertools.product([False, True], repeat=4 - cut):
            variant = vector[: cut + 1] + list(tail)
            assert score_criterion(variant) == score_criterion(vector)


def test_wrong_length_and_type():
    with pytest.raises(WrongLength):
        score_criterion([True] * 4)
    with pytest.raises(WrongLength):
        score_criterion([True, True, 1, True, True])


# --- rubric ------------------------------------------------------------------

def test_rubric_shape():
    rubric = load_rubric()
    assert [c.name for c in rubric.criteria] == [
        "Storage", "Accessibility", "Integrity", "Control & Identity", "Usability",
    ]
    assert all(len(c.statements) == 5 for c in rubric.criteria)
    assert rubric.max_total == 25


# --- full scoring -----------------------------------------------------------------

def test_reference_evaluation_fixture():
    answers, overrides, title = load_answers(str(FIXTURE))
    result = score(answers, overrides, title=title)
    assert [c.score for c in result.criteria] == [0, 3, 1, 1, 2]
    assert result.total == 7
    integrity = result.criteria[2]
    assert integrity.overridden and integrity.raw_score == 0 and integrity.score == 1
    assert "industry standard" in integrity.rationale


def test_all_false_scores_zero_and_all_true_scores_25():
    none = {k: [False] * 5 for k in ("storage", "accessibility", "integrity",
                                     "control_identity", "usability")}
    assert score(none).total == 0
    full = {k: [True] * 5 for k in none}
    assert score(full).total == 25


def test_override_requires_rationale():
    answers = {k: [True] * 5 for k in ("storage", "accessibility", "integrity",
                                       "control_identity", "usability")}
    with pytest.raises(OverrideWithoutRationale):
        score(answers, {"storage": Override(score=2, rationale="  ")})


def test_missing_or_unknown_criterion_rejected():
    with pytest.raises(WrongLength):
        score({"storage": [True] * 5})
    with pytest.raises(KeyError):
        score({"storage": [True] * 5, "bogus": [True] * 5})


# --- reports --------------------------------------------------------------------

@pytest.fixture
def result():
    answers, overrides, title = load_answers(str(FIXTURE))
    return score(answers, overrides, title=title)


def test_report_is_deterministic_and_carries_override(result):
    text = render_report(result)
    assert text == render_report(result)
    assert "Ethereum Calendar" in text
    assert "Total" in text and " 7" in text
    assert "Overrides (*)" in text
    assert "0 -> 1" in text


def test_report_omits_override_section_when_none():
    answers = {k: [True] * 5 for k in ("storage", "accessibility", "integrity",
                                       "control_identity", "usability")}
    text = render_report(score(answers))
    assert "Overrides" not in text


def test_csv_round_trips_scores(result):
    import csv
    import io

    rows = list(csv.reader(io.StringIO(render_csv(result))))
    assert rows[0][0] == "criterion"
    body = rows[1:-1]
    assert [int(r[3]) for r in body] == [0, 3, 1, 1, 2]
    assert rows[-1][0] == "Total" and rows[-1][3] == "7"


def test_json_report(result):
    payload = json.loads(render_json(result))
    assert payload["total"] == 7
    assert payload["criteria"][2]["overridden"] is True


def test_figure_written(result, tmp_path):
    out = tmp_path / "scores.png"
    render_figure(result, str(out))
    assert out.exists() and out.stat().st_size > 1000
