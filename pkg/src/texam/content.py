"""Exam domain model: questions, choices, attempts, grading, redaction.

Pure data and pure functions. Values are immutable after construction;
all mutation happens by building new values (the store persists them).
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Mapping

from .markup import (MarkupError, RenderedFragment, render_source,
                     segment_document)

MAX_OPTIONS = 26  # labels are single letters A..Z


class ExamState(Enum):
    DRAFT = "Draft"
    STARTED = "Started"
    STOPPED = "Stopped"


class AttemptState(Enum):
    IN_PROGRESS = "InProgress"
    SUBMITTED = "Submitted"


class ContractViolation(Exception):
    """A caller broke an operation precondition."""


class NotAvailableError(Exception):
    """The exam is not in a state where students may see it."""


def new_id() -> str:
    return uuid.uuid4().hex


def now_utc() -> datetime:
    return datetime.now(timezone.utc)


def option_label(index: int) -> str:
    return chr(ord("A") + index)


@dataclass(frozen=True)
class Choice:
    label: str
    source: str
    fragment: RenderedFragment


@dataclass(frozen=True)
class Question:
    id: str
    stem_source: str
    stem_fragment: RenderedFragment
    options: tuple[Choice, ...]
    correct_label: str
    points: int

    def labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.options)


@dataclass(frozen=True)
class Exam:
    id: str
    title: str
    course_code: str
    duration_minutes: int
    state: ExamState = ExamState.DRAFT
    questions: tuple[Question, ...] = ()

    def question(self, question_id: str) -> Question | None:
        for q in self.questions:
            if q.id == question_id:
                return q
        return None

    def points_total(self) -> int:
        return sum(q.points for q in self.questions)


@dataclass(frozen=True)
class Attempt:
    id: str
    exam_id: str
    student_id: str
    answers: Mapping[str, str]  # question id -> chosen label
    state: AttemptState
    started_at: datetime
    submitted_at: datetime | None = None


@dataclass(frozen=True)
class QuestionResult:
    chosen: str | None
    correct: str
    earned: int


@dataclass(frozen=True)
class Score:
    points_earned: int
    points_total: int
    per_question: Mapping[str, QuestionResult]


@dataclass(frozen=True)
class ValidationIssue:
    where: str        # "stem", "options", "options[0]", "correct_label", "points"
    message: str
    markup: dict | None = None  # MarkupError.to_dict() when markup caused it

    def to_dict(self) -> dict:
        out: dict = {"where": self.where, "message": self.message}
        if self.markup is not None:
            out["markup"] = self.markup
        return out


# -- authoring -------------------------------------------------------------

def _check_markup(where: str, source: str, issues: list[ValidationIssue]) -> None:
    try:
        segment_document(source)
    except MarkupError as e:
        issues.append(ValidationIssue(where, str(e), e.to_dict()))


def validate_question(stem_source: str, options: list[str],
                      correct_label: str, points: int) -> list[ValidationIssue]:
    """Collect every problem with the proposed question; empty list means ok."""
    issues: list[ValidationIssue] = []
    _check_markup("stem", stem_source, issues)
    for i, source in enumerate(options):
        _check_markup(f"options[{i}]", source, issues)
    if len(options) < 2:
        issues.append(ValidationIssue("options", "fewer than 2 options"))
    if len(options) > MAX_OPTIONS:
        issues.append(ValidationIssue(
            "options", f"more than {MAX_OPTIONS} options"))
    valid_labels = [option_label(i) for i in range(min(len(options), MAX_OPTIONS))]
    if correct_label not in valid_labels:
        issues.append(ValidationIssue(
            "correct_label",
            f"correct_label {correct_label!r} is not one of {valid_labels}"))
    if points < 1:
        issues.append(ValidationIssue("points", "points must be at least 1"))
    return issues


def compile_question(stem_source: str, options: list[str],
                     correct_label: str, points: int,
                     question_id: str | None = None) -> Question:
    """Render all sources and assign labels A.. in the given order.

    Callers must validate first; raw markup errors propagate otherwise.
    """
    choices = tuple(
        Choice(option_label(i), source, render_source(source))
        for i, source in enumerate(options)
    )
    return Question(
        id=question_id or new_id(),
        stem_source=stem_source,
        stem_fragment=render_source(stem_source),
        options=choices,
        correct_label=correct_label,
        points=points,
    )


# -- exam lifecycle --------------------------------------------------------

_TRANSITIONS = {
    (ExamState.DRAFT, ExamState.STARTED),
    (ExamState.STARTED, ExamState.STOPPED),
}


def advance_state(exam: Exam, new_state: ExamState) -> Exam:
    """One-way Draft -> Started -> Stopped; Started requires a question."""
    if (exam.state, new_state) not in _TRANSITIONS:
        raise ContractViolation(
            f"illegal transition {exam.state.value} -> {new_state.value}")
    if new_state is ExamState.STARTED and not exam.questions:
        raise ContractViolation("cannot start an exam with no questions")
    return Exam(exam.id, exam.title, exam.course_code, exam.duration_minutes,
                new_state, exam.questions)


def with_question(exam: Exam, question: Question) -> Exam:
    if exam.state is not ExamState.DRAFT:
        raise ContractViolation("questions can only be added while Draft")
    return Exam(exam.id, exam.title, exam.course_code, exam.duration_minutes,
                exam.state, exam.questions + (question,))


# -- attempts and grading --------------------------------------------------

def new_attempt(exam: Exam, student_id: str,
                started_at: datetime | None = None) -> Attempt:
    return Attempt(
        id=new_id(),
        exam_id=exam.id,
        student_id=student_id,
        answers={},
        state=AttemptState.IN_PROGRESS,
        started_at=started_at or now_utc(),
    )


def with_answer(attempt: Attempt, question_id: str, label: str) -> Attempt:
    answers = dict(attempt.answers)
    answers[question_id] = label
    return Attempt(attempt.id, attempt.exam_id, attempt.student_id, answers,
                   attempt.state, attempt.started_at, attempt.submitted_at)


def submitted(attempt: Attempt, at: datetime | None = None) -> Attempt:
    when = at or now_utc()
    if when < attempt.started_at:
        raise ContractViolation("submitted_at before started_at")
    return Attempt(attempt.id, attempt.exam_id, attempt.student_id,
                   dict(attempt.answers), AttemptState.SUBMITTED,
                   attempt.started_at, when)


def grade_attempt(attempt: Attempt, exam: Exam) -> Score:
    """All-or-nothing per question; unanswered earns 0; never negative."""
    if attempt.exam_id != exam.id:
        raise ContractViolation("attempt belongs to a different exam")
    if attempt.state is not AttemptState.SUBMITTED:
        raise ContractViolation("cannot grade an attempt before submit")
    per: dict[str, QuestionResult] = {}
    earned_total = 0
    for q in exam.questions:
        chosen = attempt.answers.get(q.id)
        earned = q.points if chosen == q.correct_label else 0
        earned_total += earned
        per[q.id] = QuestionResult(chosen=chosen, correct=q.correct_label,
                                   earned=earned)
    return Score(points_earned=earned_total, points_total=exam.points_total(),
                 per_question=per)


# -- redaction -------------------------------------------------------------

def student_view(exam: Exam) -> dict:
    """JSON-ready exam for test takers: rendered HTML only.

    Correct labels and raw markup sources never appear in the output;
    the service serializes this dict directly into response bodies.
    """
    if exam.state is not ExamState.STARTED:
        raise NotAvailableError(f"exam is {exam.state.value}, not Started")
    return {
        "id": exam.id,
        "title": exam.title,
        "course_code": exam.course_code,
        "duration_minutes": exam.duration_minutes,
        "questions": [
            {
                "id": q.id,
                "stem_html": q.stem_fragment.html,
                "points": q.points,
                "options": [
                    {"label": o.label, "html": o.fragment.html}
                    for o in q.options
                ],
            }
            for q in exam.questions
        ],
    }


# -- serialization (store records and exchange files) ----------------------

def _fragment_to_dict(f: RenderedFragment) -> dict:
    return {"html": f.html, "source_hash": f.source_hash,
            "renderer_version": f.renderer_version}


def _fragment_from_dict(d: dict) -> RenderedFragment:
    return RenderedFragment(d["html"], d["source_hash"], d["renderer_version"])


def exam_to_dict(exam: Exam) -> dict:
    return {
        "id": exam.id,
        "title": exam.title,
        "course_code": exam.course_code,
        "duration_minutes": exam.duration_minutes,
        "state": exam.state.value,
        "questions": [
            {
                "id": q.id,
                "stem_source": q.stem_source,
                "stem_fragment": _fragment_to_dict(q.stem_fragment),
                "options": [
                    {"label": o.label, "source": o.source,
                     "fragment": _fragment_to_dict(o.fragment)}
                    for o in q.options
                ],
                "correct_label": q.correct_label,
                "points": q.points,
            }
            for q in exam.questions
        ],
    }


def exam_from_dict(d: dict) -> Exam:
    return Exam(
        id=d["id"],
        title=d["title"],
        course_code=d["course_code"],
        duration_minutes=d["duration_minutes"],
        state=ExamState(d["state"]),
        questions=tuple(
            Question(
                id=q["id"],
                stem_source=q["stem_source"],
                stem_fragment=_fragment_from_dict(q["stem_fragment"]),
                options=tuple(
                    Choice(o["label"], o["source"],
                           _fragment_from_dict(o["fragment"]))
                    for o in q["options"]
                ),
                correct_label=q["correct_label"],
                points=q["points"],
            )
            for q in d["questions"]
        ),
    )


def rfc3339(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_rfc3339(s: str) -> datetime:
    return datetime.fromisoformat(s.replace("Z", "+00:00"))


def attempt_to_dict(attempt: Attempt) -> dict:
    return {
        "id": attempt.id,
        "exam_id": attempt.exam_id,
        "student_id": attempt.student_id,
        "answers": dict(attempt.answers),
        "state": attempt.state.value,
        "started_at": rfc3339(attempt.started_at),
        "submitted_at": (None if attempt.submitted_at is None
                         else rfc3339(attempt.submitted_at)),
    }


def attempt_from_dict(d: dict) -> Attempt:
    return Attempt(
        id=d["id"],
        exam_id=d["exam_id"],
        student_id=d["student_id"],
        answers=dict(d["answers"]),
        state=AttemptState(d["state"]),
        started_at=parse_rfc3339(d["started_at"]),
        submitted_at=(None if d["submitted_at"] is None
                      else parse_rfc3339(d["submitted_at"])),
    )


def score_to_dict(score: Score, include_correct: bool) -> dict:
    """Score as JSON; student-facing bodies must not include answer keys."""
    per = {}
    for qid, r in score.per_question.items():
        entry: dict = {"chosen": r.chosen, "earned": r.earned}
        if include_correct:
            entry["correct"] = r.correct
        per[qid] = entry
    return {"points_earned": score.points_earned,
            "points_total": score.points_total,
            "per_question": per}
