"""HTTP API: manager-side authoring/administration, student-side taking.

All cross-request coordination flows through store transactions; handlers
hold no shared mutable state apart from the session table, which has its
own lock. The wall clock is injectable so deadline behavior is testable.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import logging
import os
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Any, Callable

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .content import (AttemptState, ContractViolation, ExamState,
                      NotAvailableError, advance_state, attempt_from_dict,
                      attempt_to_dict,
                      compile_question, exam_from_dict, exam_to_dict,
                      grade_attempt, new_attempt, new_id, now_utc, rfc3339,
                      score_to_dict, student_view, submitted,
                      validate_question, with_answer, with_question)
from .markup import (RENDERER_VERSION, MarkupError, RenderedFragment,
                     content_hash64, render_source)
from .store import ConflictError, Role, Store, User

log = logging.getLogger("texam.service")

Clock = Callable[[], datetime]


class SafeJSONResponse(JSONResponse):
    """JSON with <, >, & escaped as \\uXXXX inside string values.

    Parsed content is unchanged, but no response body can ever contain a
    literal "<script", even when echoing author-supplied markup sources.
    """

    def render(self, content: Any) -> bytes:
        text = json.dumps(content, ensure_ascii=False, allow_nan=False,
                          separators=(",", ":"))
        text = (text.replace("&", "\\u0026").replace("<", "\\u003c")
                .replace(">", "\\u003e"))
        return text.encode("utf-8")

# Grace period a token stays valid past an attempt deadline.
TOKEN_DEADLINE_SLACK = timedelta(minutes=60)


# -- errors ----------------------------------------------------------------

class ApiError(Exception):
    """Stable machine-readable API failure; see docs/api.md for the code set."""

    def __init__(self, status: int, code: str, message: str,
                 detail: Any = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def body(self) -> dict:
        error: dict = {"code": self.code, "message": self.message}
        if self.detail is not None:
            error["detail"] = self.detail
        return {"error": error}


def _not_found(what: str) -> ApiError:
    return ApiError(404, "not_found", f"{what} not found")


# -- passwords -------------------------------------------------------------

def hash_password(password: str, config: ServiceConfig) -> bytes:
    """Self-describing scrypt digest: scheme$n$r$p$salt$hash."""
    salt = os.urandom(16)
    dk = hashlib.scrypt(password.encode("utf-8"), salt=salt,
                        n=config.scrypt_n, r=config.scrypt_r,
                        p=config.scrypt_p, dklen=32)
    packed = f"scrypt${config.scrypt_n}${config.scrypt_r}${config.scrypt_p}" \
             f"${salt.hex()}${dk.hex()}"
    return packed.encode("ascii")


def verify_password(password: str, stored: bytes) -> bool:
    try:
        scheme, n, r, p, salt_hex, hash_hex = stored.decode("ascii").split("$")
        if scheme != "scrypt":
            return False
        dk = hashlib.scrypt(password.encode("utf-8"),
                            salt=bytes.fromhex(salt_hex),
                            n=int(n), r=int(r), p=int(p), dklen=32)
        return hmac.compare_digest(dk, bytes.fromhex(hash_hex))
    except (ValueError, UnicodeDecodeError):
        return False


# -- sessions --------------------------------------------------------------

@dataclass
class Session:
    token: str
    user_id: str
    username: str
    role: Role
    expires_at: datetime


class SessionTable:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._by_token: dict[str, Session] = {}

    def issue(self, user: User, expires_at: datetime) -> Session:
        session = Session(secrets.token_urlsafe(32), user.id, user.username,
                          user.role, expires_at)
        with self._lock:
            self._by_token[session.token] = session
        return session

    def get(self, token: str, now: datetime) -> Session | None:
        with self._lock:
            session = self._by_token.get(token)
            if session is None:
                return None
            if session.expires_at <= now:
                del self._by_token[token]
                return None
            return session

    def extend(self, token: str, until: datetime) -> None:
        with self._lock:
            session = self._by_token.get(token)
            if session is not None and session.expires_at < until:
                session.expires_at = until


# -- request bodies --------------------------------------------------------

class LoginBody(BaseModel):
    username: str
    password: str


class CreateUserBody(BaseModel):
    username: str
    password: str
    role: str  # "Manager" | "Student"


class CreateExamBody(BaseModel):
    title: str
    course_code: str
    duration_minutes: int


class AddQuestionBody(BaseModel):
    stem_source: str
    options: list[str]
    correct_label: str
    points: int = 1


class RenderBody(BaseModel):
    source: str


class StateBody(BaseModel):
    state: str  # "Started" | "Stopped"


class AnswerBody(BaseModel):
    question_id: str
    label: str


# -- helpers ---------------------------------------------------------------

def ts(dt: datetime) -> str:
    return rfc3339(dt)


def exam_summary(exam_record: dict) -> dict:
    return {
        "id": exam_record["id"],
        "title": exam_record["title"],
        "course_code": exam_record["course_code"],
        "duration_minutes": exam_record["duration_minutes"],
        "state": exam_record["state"],
        "question_count": len(exam_record["questions"]),
    }


def ensure_bootstrap(store: Store, config: ServiceConfig) -> bool:
    """Create the first manager account on an empty user table.

    Returns True when the account was created on this call.
    """
    if not config.bootstrap_password:
        return False
    with store.transact() as txn:
        if txn.count("users") > 0:
            return False
        user = User(new_id(), config.bootstrap_username,
                    hash_password(config.bootstrap_password, config),
                    Role.MANAGER)
        txn.put_record("users", user.to_record())
    log.info("bootstrap: created manager account %r", config.bootstrap_username)
    return True


def create_app(store: Store, config: ServiceConfig,
               clock: Clock | None = None,
               static_dir: "os.PathLike[str] | str | None" = None) -> FastAPI:
    app = FastAPI(title="texam", docs_url=None, redoc_url=None,
                  default_response_class=SafeJSONResponse)
    now: Clock = clock or now_utc
    sessions = SessionTable()

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return SafeJSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request,
                                      exc: RequestValidationError):
        detail = [{"loc": [str(p) for p in e["loc"]], "message": e["msg"]}
                  for e in exc.errors()]
        body = ApiError(422, "invalid_request", "malformed request body",
                        detail).body()
        return SafeJSONResponse(status_code=422, content=body)

    @app.exception_handler(ConflictError)
    async def handle_conflict(request: Request, exc: ConflictError):
        return SafeJSONResponse(
            status_code=409,
            content=ApiError(409, "conflict", str(exc)).body())

    @app.exception_handler(NotAvailableError)
    async def handle_not_available(request: Request, exc: NotAvailableError):
        return SafeJSONResponse(
            status_code=403,
            content=ApiError(403, "not_available", str(exc)).body())

    # -- auth dependencies ---------------------------------------------

    def current_session(request: Request) -> Session:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "auth_required", "missing bearer token")
        session = sessions.get(header[7:].strip(), now())
        if session is None:
            raise ApiError(401, "auth_required", "invalid or expired token")
        return session

    def manager_session(session: Session = Depends(current_session)) -> Session:
        if session.role is not Role.MANAGER:
            raise ApiError(403, "forbidden", "manager role required")
        return session

    def student_session(session: Session = Depends(current_session)) -> Session:
        if session.role is not Role.STUDENT:
            raise ApiError(403, "forbidden", "student role required")
        return session

    # -- rendering through the persistent cache ------------------------

    def render_cached(txn, source: str) -> RenderedFragment:
        """Authoring-path render: serve from the cache when coherent."""
        source_hash = content_hash64(source)
        hit = txn.get_cache(source_hash, RENDERER_VERSION)
        if hit is not None:
            return RenderedFragment(hit["html"], source_hash, RENDERER_VERSION)
        fragment = render_source(source)
        txn.put_cache({"source_hash": fragment.source_hash,
                       "renderer_version": fragment.renderer_version,
                       "html": fragment.html})
        return fragment

    # -- health and auth -----------------------------------------------

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    @app.post("/api/login")
    async def login(body: LoginBody):
        record = store.get_user_by_name(body.username)
        # same failure message for unknown user and wrong password
        denied = ApiError(401, "invalid_credentials",
                          "unknown username or wrong password")
        if record is None:
            raise denied
        user = User.from_record(record)
        if not verify_password(body.password, user.password_hash):
            raise denied
        expires = now() + timedelta(minutes=config.token_ttl_minutes)
        session = sessions.issue(user, expires)
        return {"token": session.token, "user_id": user.id,
                "username": user.username, "role": user.role.value,
                "expires_at": ts(expires)}

    @app.post("/api/users", status_code=201)
    async def create_user(body: CreateUserBody,
                          session: Session = Depends(manager_session)):
        try:
            role = Role(body.role)
        except ValueError:
            raise ApiError(422, "invalid_request",
                           f"role must be one of {[r.value for r in Role]}")
        if not body.username or not body.password:
            raise ApiError(422, "invalid_request",
                           "username and password must be non-empty")
        user = User(new_id(), body.username,
                    hash_password(body.password, config), role)
        try:
            store.put_record("users", user.to_record())
        except ConflictError:
            raise ApiError(409, "conflict",
                           f"username {body.username!r} is taken")
        return {"id": user.id, "username": user.username,
                "role": user.role.value}

    # -- manager: exams and questions ----------------------------------

    @app.post("/api/exams", status_code=201)
    async def create_exam(body: CreateExamBody,
                          session: Session = Depends(manager_session)):
        if not body.title.strip():
            raise ApiError(422, "invalid_request", "title must be non-empty")
        if body.duration_minutes <= 0:
            raise ApiError(422, "invalid_request",
                           "duration_minutes must be positive")
        record = {"id": new_id(), "title": body.title,
                  "course_code": body.course_code,
                  "duration_minutes": body.duration_minutes,
                  "state": ExamState.DRAFT.value, "questions": []}
        store.put_record("exams", record)
        return exam_summary(record)

    @app.get("/api/exams")
    async def list_exams(session: Session = Depends(manager_session)):
        return {"exams": [exam_summary(r) for r in store.list_records("exams")]}

    @app.get("/api/exams/{exam_id}")
    async def get_exam(exam_id: str,
                       session: Session = Depends(manager_session)):
        record = store.get_record("exams", exam_id)
        if record is None:
            raise _not_found("exam")
        return record

    @app.post("/api/exams/{exam_id}/questions", status_code=201)
    async def add_question(exam_id: str, body: AddQuestionBody,
                           session: Session = Depends(manager_session)):
        issues = validate_question(body.stem_source, body.options,
                                   body.correct_label, body.points)
        if issues:
            raise ApiError(422, "validation_failed",
                           "question failed validation",
                           [i.to_dict() for i in issues])
        with store.transact() as txn:
            record = txn.get_record("exams", exam_id)
            if record is None:
                raise _not_found("exam")
            exam = exam_from_dict(record)
            if exam.state is not ExamState.DRAFT:
                raise ApiError(409, "wrong_state",
                               f"exam is {exam.state.value}; questions can "
                               "only be added while Draft")
            question = compile_question(body.stem_source, body.options,
                                        body.correct_label, body.points)
            # warm the render cache under the same transaction
            for source in [body.stem_source, *body.options]:
                render_cached(txn, source)
            txn.put_record("exams", exam_to_dict(with_question(exam, question)))
        return {"id": question.id, "points": question.points,
                "labels": list(question.labels()),
                "correct_label": question.correct_label}

    @app.post("/api/render")
    async def preview_render(body: RenderBody,
                             session: Session = Depends(manager_session)):
        # never a transport error for bad markup: the editor wants it as data
        try:
            fragment = render_source(body.source)
        except MarkupError as e:
            return {"html": None, "errors": [e.to_dict()]}
        return {"html": fragment.html, "errors": []}

    @app.post("/api/exams/{exam_id}/state")
    async def set_exam_state(exam_id: str, body: StateBody,
                             session: Session = Depends(manager_session)):
        try:
            target = ExamState(body.state)
        except ValueError:
            raise ApiError(422, "invalid_request",
                           "state must be 'Started' or 'Stopped'")
        with store.transact() as txn:
            record = txn.get_record("exams", exam_id)
            if record is None:
                raise _not_found("exam")
            try:
                exam = advance_state(exam_from_dict(record), target)
            except ContractViolation as e:
                raise ApiError(409, "wrong_state", str(e))
            txn.put_record("exams", exam_to_dict(exam))
        return exam_summary(exam_to_dict(exam))

    @app.get("/api/exams/{exam_id}/results")
    async def get_results(exam_id: str,
                          session: Session = Depends(manager_session)):
        if store.get_record("exams", exam_id) is None:
            raise _not_found("exam")
        rows = []
        for record in store.list_records("attempts", exam_id=exam_id,
                                         state=AttemptState.SUBMITTED.value):
            user_record = store.get_record("users", record["student_id"])
            rows.append({
                "student_id": record["student_id"],
                "username": (user_record or {}).get("username"),
                "score": record.get("score"),
                "submitted_at": record["submitted_at"],
            })
        rows.sort(key=lambda r: (r["submitted_at"], r["student_id"]))
        return {"results": rows}

    # -- student: taking exams -----------------------------------------

    @app.get("/api/student/exams")
    async def list_student_exams(session: Session = Depends(student_session)):
        records = store.list_records("exams", state=ExamState.STARTED.value)
        return {"exams": [
            {"exam_id": r["id"], "title": r["title"],
             "course_code": r["course_code"],
             "duration_minutes": r["duration_minutes"]}
            for r in records
        ]}

    def attempt_payload(attempt, exam, deadline: datetime) -> dict:
        return {
            "attempt_id": attempt.id,
            "exam": student_view(exam),
            "answers": dict(attempt.answers),
            "deadline": ts(deadline),
            "server_time": ts(now()),
            "state": attempt.state.value,
        }

    @app.post("/api/student/exams/{exam_id}/attempts", status_code=201)
    async def begin_attempt(exam_id: str,
                            session: Session = Depends(student_session)):
        try:
            with store.transact() as txn:
                record = txn.get_record("exams", exam_id)
                if record is None:
                    raise _not_found("exam")
                exam = exam_from_dict(record)
                if exam.state is not ExamState.STARTED:
                    raise ApiError(403, "not_available",
                                   f"exam is {exam.state.value}, not Started")
                if txn.find_attempt(exam_id, session.user_id) is not None:
                    raise ApiError(409, "already_attempted",
                                   "this exam was already attempted")
                attempt = new_attempt(exam, session.user_id, started_at=now())
                txn.put_record("attempts", attempt_to_dict(attempt))
        except ConflictError:
            # lost the begin race to a parallel request
            raise ApiError(409, "already_attempted",
                           "this exam was already attempted")
        deadline = attempt.started_at + timedelta(minutes=exam.duration_minutes)
        sessions.extend(session.token, deadline + TOKEN_DEADLINE_SLACK)
        return attempt_payload(attempt, exam, deadline)

    def load_owned_attempt(txn, attempt_id: str, session: Session):
        record = txn.get_record("attempts", attempt_id)
        if record is None:
            raise _not_found("attempt")
        if record["student_id"] != session.user_id:
            raise ApiError(403, "forbidden", "not your attempt")
        attempt = attempt_from_dict({k: v for k, v in record.items()
                                     if k != "score"})
        exam = exam_from_dict(txn.get_record("exams", attempt.exam_id))
        deadline = attempt.started_at + timedelta(minutes=exam.duration_minutes)
        return attempt, exam, deadline

    @app.get("/api/attempts/{attempt_id}")
    async def get_attempt(attempt_id: str,
                          session: Session = Depends(student_session)):
        with store.transact() as txn:
            attempt, exam, deadline = load_owned_attempt(txn, attempt_id, session)
        if attempt.state is not AttemptState.IN_PROGRESS:
            raise ApiError(409, "already_submitted",
                           "this attempt was already submitted")
        if exam.state is not ExamState.STARTED:
            raise ApiError(409, "wrong_state", "the exam is no longer running")
        if now() >= deadline:
            raise ApiError(409, "deadline_passed", "the deadline has passed")
        return attempt_payload(attempt, exam, deadline)

    @app.put("/api/attempts/{attempt_id}/answers")
    async def record_answer(attempt_id: str, body: AnswerBody,
                            session: Session = Depends(student_session)):
        with store.transact() as txn:
            attempt, exam, deadline = load_owned_attempt(txn, attempt_id, session)
            if attempt.state is not AttemptState.IN_PROGRESS:
                raise ApiError(409, "already_submitted",
                               "answers are closed after submit")
            if exam.state is not ExamState.STARTED:
                raise ApiError(409, "wrong_state",
                               "the exam is no longer running")
            if now() >= deadline:
                raise ApiError(409, "deadline_passed",
                               "the deadline has passed")
            question = exam.question(body.question_id)
            if question is None:
                raise ApiError(422, "unknown_question",
                               "no such question on this exam")
            if body.label not in question.labels():
                raise ApiError(422, "bad_label",
                               f"label must be one of {list(question.labels())}")
            attempt = with_answer(attempt, body.question_id, body.label)
            txn.put_record("attempts", attempt_to_dict(attempt))
        return {"ok": True, "answers": dict(attempt.answers)}

    @app.post("/api/attempts/{attempt_id}/submit")
    async def submit_attempt(attempt_id: str,
                             session: Session = Depends(student_session)):
        with store.transact() as txn:
            attempt, exam, _deadline = load_owned_attempt(txn, attempt_id,
                                                          session)
            if attempt.state is not AttemptState.IN_PROGRESS:
                raise ApiError(409, "already_submitted",
                               "this attempt was already submitted")
            attempt = submitted(attempt, at=now())
            score = grade_attempt(attempt, exam)
            record = attempt_to_dict(attempt)
            record["score"] = score_to_dict(score, include_correct=True)
            txn.put_record("attempts", record)
        return {"attempt_id": attempt.id,
                "submitted_at": ts(attempt.submitted_at),
                "score": score_to_dict(score, include_correct=False)}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
