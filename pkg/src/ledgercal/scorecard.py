"""Executable preservation rubric: answers in, 0-25 scorecard out.

Each of the five criteria carries five ordered boolean statements.  They
are answered left to right and the criterion scores the last statement
answered true before the first false one, so a vector like
``[T, T, F, T, T]`` scores 2 no matter what follows the first false.
A criterion may be overridden with a discretionary score, but only with a
written rationale; overrides are flagged, never silent.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass, field
from importlib import resources

from .errors import OverrideWithoutRationale, WrongLength

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

STATEMENTS_PER_CRITERION = 5
MAX_SCORE = 5


@dataclass(frozen=True)
class Criterion:
    key: str
    name: str
    statements: tuple[str, ...]


@dataclass(frozen=True)
class Rubric:
    version: int
    criteria: tuple[Criterion, ...]

    def criterion(self, key: str) -> Criterion:
        for c in self.criteria:
            if c.key == key:
                return c
        raise KeyError(key)

    @property
    def max_total(self) -> int:
        return MAX_SCORE * len(self.criteria)


def load_rubric(path: str | None = None) -> Rubric:
    """Load the rubric data file (the packaged one by default)."""
    if path is None:
        data = resources.files("ledgercal.data").joinpath("rubric.toml").read_bytes()
    else:
        with open(path, "rb") as fh:
            data = fh.read()
    raw = tomllib.loads(data.decode("utf-8"))
    criteria = tuple(
        Criterion(key=c["key"], name=c["name"], statements=tuple(c["statements"]))
        for c in raw["criteria"]
    )
    for c in criteria:
        if len(c.statements) != STATEMENTS_PER_CRITERION:
            raise ValueError(f"criterion {c.key} must have exactly {STATEMENTS_PER_CRITERION} statements")
    return Rubric(version=int(raw["version"]), criteria=criteria)


def score_criterion(answers: list[bool]) -> int:
    """Score one criterion: last true answered, stopping at the first false."""
    if len(answers) != STATEMENTS_PER_CRITERION:
        raise WrongLength(f"expected {STATEMENTS_PER_CRITERION} answers, got {len(answers)}")
    score = 0
    for answer in answers:
        if not isinstance(answer, bool):
            raise WrongLength(f"answers must be booleans, got {answer!r}")
        if not answer:
            break
        score += 1
    return score


@dataclass(frozen=True)
class Override:
    score: int
    rationale: str


@dataclass
class CriterionResult:
    key: str
    name: str
    answers: tuple[bool, ...]
    raw_score: int
    score: int
    overridden: bool = False
    rationale: str = ""


@dataclass
class ScorecardResult:
    title: str
    rubric_version: int
    criteria: list[CriterionResult] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(c.score for c in self.criteria)

    def to_json(self) -> dict:
        return {
            "title": self.title,
            "rubric_version": self.rubric_version,
            "criteria": [
                {
                    "key": c.key,
                    "name": c.name,
                    "answers": list(c.answers),
                    "raw_score": c.raw_score,
                    "score": c.score,
                    "overridden": c.overridden,
                    "rationale": c.rationale,
                }
                for c in self.criteria
            ],
            "total": self.total,
        }


def score(answers: dict[str, list[bool]], overrides: dict[str, Override] | None = None,
          rubric: Rubric | None = None, title: str = "") -> ScorecardResult:
    """Score a full answer set against the rubric, applying flagged overrides."""
    rubric = rubric or load_rubric()
    overrides = overrides or {}
    for key in answers:
        rubric.criterion(key)  # KeyError on unknown criteria
    for key, override in overrides.items():
        rubric.criterion(key)
        if not override.rationale.strip():
            raise OverrideWithoutRationale(f"override for {key} carries no rationale")
        if not 0 <= override.score <= MAX_SCORE:
            raise WrongLength(f"override score out of range: {override.score}")

    result = ScorecardResult(title=title, rubric_version=rubric.version)
    for criterion in rubric.criteria:
        if criterion.key not in answers:
            raise WrongLength(f"missing answers for criterion {criterion.key}")
        vector = answers[criterion.key]
        raw = score_criterion(vector)
        override = overrides.get(criterion.key)
        result.criteria.append(
            CriterionResult(
                key=criterion.key,
                name=criterion.name,
                answers=tuple(vector),
                raw_score=raw,
                score=override.score if override else raw,
                overridden=override is not None,
                rationale=override.rationale if override else "",
            )
        )
    return result


# --- answer files -----------------------------------------------------------

def load_answers(path: str) -> tuple[dict[str, list[bool]], dict[str, Override], str]:
    """Read an answers file (TOML: per-criterion boolean arrays + overrides)."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    title = str(raw.get("title", ""))
    answers = {key: list(vector) for key, vector in raw.get("answers", {}).items()}
    overrides = {}
    for key, spec in raw.get("overrides", {}).items():
        overrides[key] = Override(score=int(spec.get("score", 0)), rationale=str(spec.get("rationale", "")))
    return answers, overrides, title


# --- reporting ---------------------------------------------------------------

def render_report(result: ScorecardResult) -> str:
    """Deterministic plain-text table of the scorecard."""
    lines = []
    heading = result.title or "Preservation scorecard"
    lines.append(heading)
    lines.append("=" * len(heading))
    lines.append("")
    name_width = max(len(c.name) for c in result.criteria)
    lines.append(f"{'Criterion':<{name_width}}  Answers          Score")
    lines.append(f"{'-' * name_width}  ---------------  -----")
    for c in result.criteria:
        answers = " ".join("T" if a else "F" for a in c.answers)
        mark = "*" if c.overridden else ""
        lines.append(f"{c.name:<{name_width}}  [{answers}]      {c.score}{mark}")
    lines.append(f"{'-' * name_width}  ---------------  -----")
    lines.append(f"{'Total':<{name_width}}                   {result.total}")
    overridden = [c for c in result.criteria if c.overridden]
    if overridden:
        lines.append("")
        lines.append("Overrides (*)")
        for c in overridden:
            lines.append(f"  {c.name}: {c.raw_score} -> {c.score}: {c.rationale}")
    lines.append("")
    return "\n".join(lines)


def render_csv(result: ScorecardResult) -> str:
    """Delimited per-criterion output, one row per criterion plus a total row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["criterion", "answers", "raw_score", "score", "overridden", "rationale"])
    for c in result.criteria:
        answers = "".join("T" if a else "F" for a in c.answers)
        writer.writerow([c.name, answers, c.raw_score, c.score, str(c.overridden).lower(), c.rationale])
    writer.writerow(["Total", "", "", result.total, "", ""])
    return buf.getvalue()


def render_json(result: ScorecardResult) -> str:
    return json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n"


def render_figure(result: ScorecardResult, path: str) -> None:
    """Bar chart of per-criterion scores, written to an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [c.name for c in result.criteria]
    scores = [c.score for c in result.criteria]
    colors = ["#d4a23c" if c.overridden else "#3c78d4" for c in result.criteria]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    bars = ax.bar(names, scores, color=colors)
    ax.set_ylim(0, MAX_SCORE)
    ax.set_yticks(range(MAX_SCORE + 1))
    ax.set_ylabel("Score")
    title = result.title or "Preservation scorecard"
    ax.set_title(f"{title} (total {result.total}/{MAX_SCORE * len(names)})")
    ax.bar_label(bars)
    for label in ax.get_xticklabels():
        label.set_rotation(15)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
