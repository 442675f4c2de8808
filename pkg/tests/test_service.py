"""HTTP API tests: auth, authoring, taking, grading, races, leakage."""
from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor

from fastapi.testclient import TestClient

from conftest import MANAGER_PASSWORD, ServiceEnv
from texam.config import ServiceConfig
from texam.service import ensure_bootstrap, hash_password, verify_password
from texam.store import Store

SUM_SOURCE = r"Evaluate $\sum_{k=1}^{2} a*b^2$."
SUM_MATH = ('<math display="inline"><mrow><msubsup><mo>∑</mo>'
            "<mrow><mi>k</mi><mo>=</mo><mn>1</mn></mrow><mn>2</mn></msubsup>"
            "<mi>a</mi><mo>*</mo><msup><mi>b</mi><mn>2</mn></msup></mrow></math>")


def create_exam(env: ServiceEnv, title: str = "Sample", minutes: int = 60) -> str:
    response = env.client.post("/api/exams", headers=env.manager, json={
        "title": title, "course_code": "TST 101",
        "duration_minutes": minutes})
    assert response.status_code == 201, response.text
    return response.json()["id"]


def add_question(env: ServiceEnv, exam_id: str,
                 stem: str = "What is $1+1$?",
                 options: list[str] | None = None,
                 correct: str = "A", points: int = 1) -> dict:
    response = env.client.post(f"/api/exams/{exam_id}/questions",
                               headers=env.manager, json={
                                   "stem_source": stem,
                                   "options": options or ["$2$", "$3$", "$4$"],
                                   "correct_label": correct,
                                   "points": points})
    assert response.status_code == 201, response.text
    return response.json()


def start_exam(env: ServiceEnv, exam_id: str) -> None:
    response = env.client.post(f"/api/exams/{exam_id}/state",
                               headers=env.manager, json={"state": "Started"})
    assert response.status_code == 200, response.text


def make_started_exam(env: ServiceEnv, n_questions: int = 2) -> str:
    exam_id = create_exam(env)
    for _ in range(n_questions):
        add_question(env, exam_id)
    start_exam(env, exam_id)
    return exam_id


def begin(env: ServiceEnv, exam_id: str, token: str | None = None):
    return env.client.post(f"/api/student/exams/{exam_id}/attempts",
                           headers=env.auth(token or env.student_token))


# -- passwords -------------------------------------------------------------

def test_password_hash_round_trip():
    config = ServiceConfig(data_dir=".", scrypt_n=16)
    stored = hash_password("s3cret", config)
    assert verify_password("s3cret", stored)
    assert not verify_password("wrong", stored)
    assert b"s3cret" not in stored


def test_password_hashes_are_salted():
    config = ServiceConfig(data_dir=".", scrypt_n=16)
    assert hash_password("same", config) != hash_password("same", config)


def test_tampered_hash_fails_closed():
    assert not verify_password("x", b"not-a-real-hash")
    assert not verify_password("x", b"")


# -- auth ------------------------------------------------------------------

def test_login_returns_role_token(env: ServiceEnv):
    body = env.login("ngozi", "student-secret")
    assert body["role"] == "Student"
    assert len(body["token"]) >= 32
    assert body["expires_at"].endswith("Z")


def test_wrong_password_and_unknown_user_indistinguishable(env: ServiceEnv):
    wrong = env.client.post("/api/login", json={
        "username": "ngozi", "password": "nope"})
    unknown = env.client.post("/api/login", json={
        "username": "ghost", "password": "nope"})
    assert wrong.status_code == unknown.status_code == 401
    assert wrong.json() == unknown.json()


def test_missing_token_is_401(env: ServiceEnv):
    assert env.client.get("/api/exams").status_code == 401


def test_garbage_token_is_401(env: ServiceEnv):
    response = env.client.get("/api/exams",
                              headers=env.auth("f" * 43))
    assert response.status_code == 401
    assert response.json()["error"]["code"] == "auth_required"


def test_expired_token_is_401(env: ServiceEnv):
    env.clock.advance(minutes=121)  # past the 120 min ttl
    response = env.client.get("/api/exams", headers=env.manager)
    assert response.status_code == 401


def test_bootstrap_only_runs_on_empty_store(env: ServiceEnv):
    assert not ensure_bootstrap(env.store, env.config)  # users exist now


# -- manager: exams --------------------------------------------------------

def test_create_exam_starts_draft(env: ServiceEnv):
    response = env.client.post("/api/exams", headers=env.manager, json={
        "title": "Engineering Mathematics III", "course_code": "FEG 303",
        "duration_minutes": 60})
    body = response.json()
    assert response.status_code == 201
    assert body["state"] == "Draft"
    assert body["title"] == "Engineering Mathematics III"
    assert body["course_code"] == "FEG 303"


def test_zero_duration_rejected(env: ServiceEnv):
    response = env.client.post("/api/exams", headers=env.manager, json={
        "title": "t", "course_code": "c", "duration_minutes": 0})
    assert response.status_code == 422


def test_blank_title_rejected(env: ServiceEnv):
    response = env.client.post("/api/exams", headers=env.manager, json={
        "title": "   ", "course_code": "c", "duration_minutes": 5})
    assert response.status_code == 422


def test_student_cannot_create_exam(env: ServiceEnv):
    response = env.client.post("/api/exams", headers=env.student, json={
        "title": "t", "course_code": "c", "duration_minutes": 5})
    assert response.status_code == 403
    assert response.json()["error"]["code"] == "forbidden"


def test_malformed_body_is_422_with_stable_code(env: ServiceEnv):
    response = env.client.post("/api/exams", headers=env.manager,
                               json={"title": 7})
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "invalid_request"


# -- manager: questions ----------------------------------------------------

def test_add_question_returns_labels(env: ServiceEnv):
    exam_id = create_exam(env)
    body = add_question(env, exam_id, options=["a", "b", "c", "d"], correct="C")
    assert body["labels"] == ["A", "B", "C", "D"]
    assert body["correct_label"] == "C"


def test_question_stem_renders_to_golden_fragment(env: ServiceEnv):
    exam_id = create_exam(env)
    add_question(env, exam_id, stem=SUM_SOURCE,
                 options=["$1$", "$2$", "$3$", "$4$"], correct="B")
    record = env.client.get(f"/api/exams/{exam_id}", headers=env.manager).json()
    stem_html = record["questions"][0]["stem_fragment"]["html"]
    assert stem_html == "<p>Evaluate " + SUM_MATH + ".</p>"


def test_bad_markup_stem_rejected_with_position(env: ServiceEnv):
    exam_id = create_exam(env)
    response = env.client.post(f"/api/exams/{exam_id}/questions",
                               headers=env.manager, json={
                                   "stem_source": "${",
                                   "options": ["a", "b"],
                                   "correct_label": "A", "points": 1})
    assert response.status_code == 422
    body = response.json()["error"]
    assert body["code"] == "validation_failed"
    markup = next(d["markup"] for d in body["detail"] if "markup" in d)
    assert markup["kind"] == "UnbalancedBrace"
    assert markup["offset"] == 1


def test_correct_label_must_exist(env: ServiceEnv):
    exam_id = create_exam(env)
    response = env.client.post(f"/api/exams/{exam_id}/questions",
                               headers=env.manager, json={
                                   "stem_source": "s",
                                   "options": ["a", "b", "c", "d"],
                                   "correct_label": "E", "points": 1})
    assert response.status_code == 422


def test_add_question_to_unknown_exam(env: ServiceEnv):
    response = env.client.post("/api/exams/nope/questions",
                               headers=env.manager, json={
                                   "stem_source": "s", "options": ["a", "b"],
                                   "correct_label": "A", "points": 1})
    assert response.status_code == 404


def test_add_question_to_started_exam_conflicts(env: ServiceEnv):
    exam_id = make_started_exam(env)
    response = env.client.post(f"/api/exams/{exam_id}/questions",
                               headers=env.manager, json={
                                   "stem_source": "s", "options": ["a", "b"],
                                   "correct_label": "A", "points": 1})
    assert response.status_code == 409
    assert response.json()["error"]["code"] == "wrong_state"


def test_question_renders_populate_cache(env: ServiceEnv):
    from texam.markup import RENDERER_VERSION, content_hash64
    exam_id = create_exam(env)
    add_question(env, exam_id, stem="cached $x$", options=["$a$", "$b$"])
    hit = env.store.get_cache(content_hash64("cached $x$"), RENDERER_VERSION)
    assert hit is not None
    assert "<math" in hit["html"]


# -- manager: preview ------------------------------------------------------

def test_preview_renders_html(env: ServiceEnv):
    response = env.client.post("/api/render", headers=env.manager, json={
        "source": "$" + r"\sum_{k=1}^{2} a*b^2" + "$"})
    body = response.json()
    assert response.status_code == 200
    assert body["errors"] == []
    assert SUM_MATH in body["html"]


def test_preview_returns_errors_in_body(env: ServiceEnv):
    response = env.client.post("/api/render", headers=env.manager, json={
        "source": "$x^2^3$"})
    body = response.json()
    assert response.status_code == 200
    assert body["html"] is None
    (error,) = body["errors"]
    assert error["kind"] == "DoubleScript"
    assert error["offset"] == 4  # the second caret
    assert error["line"] == 1 and error["column"] == 5


def test_preview_of_empty_source(env: ServiceEnv):
    response = env.client.post("/api/render", headers=env.manager,
                               json={"source": ""})
    assert response.json() == {"html": "", "errors": []}


def test_preview_requires_manager(env: ServiceEnv):
    response = env.client.post("/api/render", headers=env.student,
                               json={"source": "x"})
    assert response.status_code == 403


def test_preview_does_not_persist(env: ServiceEnv):
    from texam.markup import RENDERER_VERSION, content_hash64
    env.client.post("/api/render", headers=env.manager,
                    json={"source": "preview only $y$"})
    assert env.store.get_cache(content_hash64("preview only $y$"),
                               RENDERER_VERSION) is None


# -- state machine over HTTP -----------------------------------------------

def test_start_requires_questions(env: ServiceEnv):
    exam_id = create_exam(env)
    response = env.client.post(f"/api/exams/{exam_id}/state",
                               headers=env.manager, json={"state": "Started"})
    assert response.status_code == 409


def test_draft_cannot_stop(env: ServiceEnv):
    exam_id = create_exam(env)
    add_question(env, exam_id)
    response = env.client.post(f"/api/exams/{exam_id}/state",
                               headers=env.manager, json={"state": "Stopped"})
    assert response.status_code == 409


def test_stopped_cannot_revive(env: ServiceEnv):
    exam_id = make_started_exam(env)
    assert env.client.post(f"/api/exams/{exam_id}/state", headers=env.manager,
                           json={"state": "Stopped"}).status_code == 200
    response = env.client.post(f"/api/exams/{exam_id}/state",
                               headers=env.manager, json={"state": "Started"})
    assert response.status_code == 409


def test_bad_state_value(env: ServiceEnv):
    exam_id = create_exam(env)
    response = env.client.post(f"/api/exams/{exam_id}/state",
                               headers=env.manager, json={"state": "Paused"})
    assert response.status_code == 422


def test_random_call_sequences_respect_one_way_machine(env: ServiceEnv):
    rng = random.Random(7)
    for _ in range(10):
        exam_id = create_exam(env)
        model = "Draft"
        has_question = False
        for _ in range(rng.randint(1, 8)):
            op = rng.choice(["question", "start", "stop"])
            if op == "question":
                response = env.client.post(
                    f"/api/exams/{exam_id}/questions", headers=env.manager,
                    json={"stem_source": "s", "options": ["a", "b"],
                          "correct_label": "A", "points": 1})
                if model == "Draft":
                    assert response.status_code == 201
                    has_question = True
                else:
                    assert response.status_code == 409
            else:
                target = "Started" if op == "start" else "Stopped"
                response = env.client.post(
                    f"/api/exams/{exam_id}/state", headers=env.manager,
                    json={"state": target})
                legal = ((model, target) == ("Draft", "Started") and has_question) \
                    or (model, target) == ("Started", "Stopped")
                if legal:
                    assert response.status_code == 200, response.text
                    model = target
                else:
                    assert response.status_code == 409
        stored = env.client.get(f"/api/exams/{exam_id}",
                                headers=env.manager).json()
        assert stored["state"] == model


# -- student flow ----------------------------------------------------------

def test_student_sees_only_started_exams(env: ServiceEnv):
    create_exam(env, title="draft one")
    started_id = make_started_exam(env)
    stopped_id = make_started_exam(env)
    env.client.post(f"/api/exams/{stopped_id}/state", headers=env.manager,
                    json={"state": "Stopped"})
    body = env.client.get("/api/student/exams", headers=env.student).json()
    assert [e["exam_id"] for e in body["exams"]] == [started_id]
    entry = body["exams"][0]
    assert set(entry) == {"exam_id", "title", "course_code", "duration_minutes"}


def test_manager_cannot_use_student_listing(env: ServiceEnv):
    response = env.client.get("/api/student/exams", headers=env.manager)
    assert response.status_code == 403


def test_begin_attempt_returns_redacted_exam(env: ServiceEnv):
    exam_id = make_started_exam(env)
    response = begin(env, exam_id)
    assert response.status_code == 201
    body = response.json()
    assert body["state"] == "InProgress"
    assert body["answers"] == {}
    assert body["deadline"] > body["server_time"]
    questions = body["exam"]["questions"]
    assert len(questions) == 2
    assert "<math" in questions[0]["stem_html"]
    blob = json.dumps(body)
    assert "correct" not in blob
    assert "stem_source" not in blob and '"source"' not in blob


def test_begin_twice_conflicts(env: ServiceEnv):
    exam_id = make_started_exam(env)
    assert begin(env, exam_id).status_code == 201
    second = begin(env, exam_id)
    assert second.status_code == 409
    assert second.json()["error"]["code"] == "already_attempted"


def test_begin_draft_exam_forbidden(env: ServiceEnv):
    exam_id = create_exam(env)
    add_question(env, exam_id)
    response = begin(env, exam_id)
    assert response.status_code == 403
    assert response.json()["error"]["code"] == "not_available"


def test_begin_unknown_exam(env: ServiceEnv):
    assert begin(env, "nope").status_code == 404


def test_racing_begins_have_one_winner(env: ServiceEnv):
    exam_id = make_started_exam(env)

    def one_begin(_):
        client = TestClient(env.client.app)
        return client.post(f"/api/student/exams/{exam_id}/attempts",
                           headers=env.student).status_code

    with ThreadPoolExecutor(max_workers=16) as pool:
        codes = list(pool.map(one_begin, range(16)))
    assert codes.count(201) == 1
    assert codes.count(409) == 15


def test_reenter_attempt_returns_saved_answers(env: ServiceEnv):
    exam_id = make_started_exam(env)
    body = begin(env, exam_id).json()
    attempt_id = body["attempt_id"]
    qid = body["exam"]["questions"][0]["id"]
    env.client.put(f"/api/attempts/{attempt_id}/answers", headers=env.student,
                   json={"question_id": qid, "label": "B"})
    again = env.client.get(f"/api/attempts/{attempt_id}", headers=env.student)
    assert again.status_code == 200
    assert again.json()["answers"] == {qid: "B"}


def test_foreign_attempt_is_forbidden(env: ServiceEnv):
    exam_id = make_started_exam(env)
    attempt_id = begin(env, exam_id).json()["attempt_id"]
    env.make_student("tunde")
    other_token = env.login("tunde", "student-secret")["token"]
    response = env.client.get(f"/api/attempts/{attempt_id}",
                              headers=env.auth(other_token))
    assert response.status_code == 403


def test_answer_upsert_overwrites(env: ServiceEnv):
    exam_id = make_started_exam(env)
    body = begin(env, exam_id).json()
    attempt_id, qid = body["attempt_id"], body["exam"]["questions"][0]["id"]
    for label in ("A", "C"):
        response = env.client.put(f"/api/attempts/{attempt_id}/answers",
                                  headers=env.student,
                                  json={"question_id": qid, "label": label})
        assert response.status_code == 200
    assert response.json()["answers"][qid] == "C"


def test_unknown_label_rejected(env: ServiceEnv):
    exam_id = make_started_exam(env)
    body = begin(env, exam_id).json()
    response = env.client.put(f"/api/attempts/{body['attempt_id']}/answers",
                              headers=env.student,
                              json={"question_id":
                                    body["exam"]["questions"][0]["id"],
                                    "label": "Z"})
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "bad_label"


def test_unknown_question_rejected(env: ServiceEnv):
    exam_id = make_started_exam(env)
    attempt_id = begin(env, exam_id).json()["attempt_id"]
    response = env.client.put(f"/api/attempts/{attempt_id}/answers",
                              headers=env.student,
                              json={"question_id": "ghost", "label": "A"})
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "unknown_question"


def test_answer_after_deadline_conflicts(env: ServiceEnv):
    exam_id = make_started_exam(env)  # 60 minute exam
    body = begin(env, exam_id).json()
    env.clock.advance(minutes=61)
    response = env.client.put(f"/api/attempts/{body['attempt_id']}/answers",
                              headers=env.student,
                              json={"question_id":
                                    body["exam"]["questions"][0]["id"],
                                    "label": "A"})
    assert response.status_code == 409
    assert response.json()["error"]["code"] == "deadline_passed"


def test_answer_exactly_at_deadline_conflicts(env: ServiceEnv):
    exam_id = make_started_exam(env)
    body = begin(env, exam_id).json()
    env.clock.advance(minutes=60)
    response = env.client.put(f"/api/attempts/{body['attempt_id']}/answers",
                              headers=env.student,
                              json={"question_id":
                                    body["exam"]["questions"][0]["id"],
                                    "label": "A"})
    assert response.status_code == 409


def test_token_outlives_deadline_for_submission(env: ServiceEnv):
    # begin extends the session to deadline + slack (120 + 60 + 60 = 240
    # minutes out), so a submit after the 120-minute login ttl still works
    exam_id = create_exam(env, minutes=120)
    add_question(env, exam_id)
    start_exam(env, exam_id)
    attempt_id = begin(env, exam_id).json()["attempt_id"]
    env.clock.advance(minutes=130)
    response = env.client.post(f"/api/attempts/{attempt_id}/submit",
                               headers=env.student)
    assert response.status_code == 200


def test_submit_grades_and_persists(env: ServiceEnv):
    exam_id = create_exam(env)
    add_question(env, exam_id, options=["a", "b"], correct="A", points=2)
    add_question(env, exam_id, options=["a", "b"], correct="B", points=3)
    start_exam(env, exam_id)
    body = begin(env, exam_id).json()
    attempt_id = body["attempt_id"]
    q1, q2 = [q["id"] for q in body["exam"]["questions"]]
    env.client.put(f"/api/attempts/{attempt_id}/answers", headers=env.student,
                   json={"question_id": q1, "label": "A"})  # right: +2
    env.client.put(f"/api/attempts/{attempt_id}/answers", headers=env.student,
                   json={"question_id": q2, "label": "A"})  # wrong
    response = env.client.post(f"/api/attempts/{attempt_id}/submit",
                               headers=env.student)
    score = response.json()["score"]
    assert response.status_code == 200
    assert (score["points_earned"], score["points_total"]) == (2, 5)
    assert response.json()["submitted_at"].endswith("Z")


def test_submit_empty_attempt_scores_zero(env: ServiceEnv):
    exam_id = make_started_exam(env)
    attempt_id = begin(env, exam_id).json()["attempt_id"]
    score = env.client.post(f"/api/attempts/{attempt_id}/submit",
                            headers=env.student).json()["score"]
    assert score["points_earned"] == 0
    assert score["points_total"] == 2


def test_double_submit_conflicts(env: ServiceEnv):
    exam_id = make_started_exam(env)
    attempt_id = begin(env, exam_id).json()["attempt_id"]
    assert env.client.post(f"/api/attempts/{attempt_id}/submit",
                           headers=env.student).status_code == 200
    second = env.client.post(f"/api/attempts/{attempt_id}/submit",
                             headers=env.student)
    assert second.status_code == 409
    assert second.json()["error"]["code"] == "already_submitted"


def test_answer_after_submit_conflicts(env: ServiceEnv):
    exam_id = make_started_exam(env)
    body = begin(env, exam_id).json()
    attempt_id = body["attempt_id"]
    env.client.post(f"/api/attempts/{attempt_id}/submit", headers=env.student)
    response = env.client.put(f"/api/attempts/{attempt_id}/answers",
                              headers=env.student,
                              json={"question_id":
                                    body["exam"]["questions"][0]["id"],
                                    "label": "A"})
    assert response.status_code == 409


# -- results ---------------------------------------------------------------

def test_results_list_submitted_attempts_only(env: ServiceEnv):
    exam_id = make_started_exam(env)
    attempt_id = begin(env, exam_id).json()["attempt_id"]
    env.client.post(f"/api/attempts/{attempt_id}/submit", headers=env.student)
    env.make_student("tunde")
    other = env.login("tunde", "student-secret")["token"]
    begin(env, exam_id, token=other)  # in progress, must not appear
    body = env.client.get(f"/api/exams/{exam_id}/results",
                          headers=env.manager).json()
    assert len(body["results"]) == 1
    row = body["results"][0]
    assert row["student_id"] == env.student_id
    assert row["username"] == "ngozi"
    assert row["score"]["points_total"] == 2


def test_results_sorted_by_submission_time(env: ServiceEnv):
    exam_id = make_started_exam(env)
    tokens = [env.student_token]
    for name in ("tunde", "uche"):
        env.make_student(name)
        tokens.append(env.login(name, "student-secret")["token"])
    attempt_ids = []
    for token in tokens:
        attempt_ids.append(begin(env, exam_id, token=token).json()["attempt_id"])
    for attempt_id, token in zip(attempt_ids, tokens):
        env.clock.advance(minutes=1)
        env.client.post(f"/api/attempts/{attempt_id}/submit",
                        headers=env.auth(token))
    rows = env.client.get(f"/api/exams/{exam_id}/results",
                          headers=env.manager).json()["results"]
    times = [r["submitted_at"] for r in rows]
    assert times == sorted(times)
    assert len(rows) == 3


def test_results_forbidden_for_students(env: ServiceEnv):
    exam_id = make_started_exam(env)
    response = env.client.get(f"/api/exams/{exam_id}/results",
                              headers=env.student)
    assert response.status_code == 403


def test_results_unknown_exam(env: ServiceEnv):
    response = env.client.get("/api/exams/nope/results", headers=env.manager)
    assert response.status_code == 404


# -- leakage ---------------------------------------------------------------

def test_student_responses_never_leak_answers_or_sources(env: ServiceEnv):
    exam_id = create_exam(env)
    add_question(env, exam_id, stem=SUM_SOURCE,
                 options=["$1$", "$2$", "$3$", "$4$"], correct="B")
    start_exam(env, exam_id)

    recorded: list[str] = []
    listing = env.client.get("/api/student/exams", headers=env.student)
    recorded.append(listing.text)
    opened = begin(env, exam_id)
    recorded.append(opened.text)
    attempt_id = opened.json()["attempt_id"]
    qid = opened.json()["exam"]["questions"][0]["id"]
    answered = env.client.put(f"/api/attempts/{attempt_id}/answers",
                              headers=env.student,
                              json={"question_id": qid, "label": "B"})
    recorded.append(answered.text)
    refetched = env.client.get(f"/api/attempts/{attempt_id}",
                               headers=env.student)
    recorded.append(refetched.text)
    submitted_r = env.client.post(f"/api/attempts/{attempt_id}/submit",
                                  headers=env.student)
    recorded.append(submitted_r.text)

    for body in recorded:
        assert "correct" not in body
        assert "stem_source" not in body
        assert SUM_SOURCE not in body  # raw markup must never reach students
