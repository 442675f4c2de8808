"""Operator commands: serve the API, render files, move exams around.

Every flag can also come from an environment variable with the TEXAM_
prefix (TEXAM_PORT, TEXAM_DATA_DIR, TEXAM_URL, TEXAM_TOKEN, ...); an
explicit flag wins over the environment.
"""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path

import click
import httpx

from .config import (DEFAULT_DATA_DIR, DEFAULT_PORT,
                     DEFAULT_TOKEN_TTL_MINUTES, ServiceConfig)
from .content import option_label, validate_question
from .markup import MarkupError, compile_math, render_math_node, render_source
from .store import Store, StoreError

EXAM_FILE_VERSION = 1


@click.group()
def main() -> None:
    """Exam service with native math rendering."""


# -- serve -----------------------------------------------------------------

@main.command()
@click.option("--port", type=int, default=DEFAULT_PORT, show_default=True,
              envvar="TEXAM_PORT", help="TCP port to listen on.")
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="TEXAM_HOST", help="Interface to bind.")
@click.option("--data-dir", type=click.Path(path_type=Path),
              default=DEFAULT_DATA_DIR, show_default=True,
              envvar="TEXAM_DATA_DIR", help="Directory for durable state.")
@click.option("--token-ttl", type=int, default=DEFAULT_TOKEN_TTL_MINUTES,
              show_default=True, envvar="TEXAM_TOKEN_TTL",
              help="Login token lifetime in minutes.")
@click.option("--bootstrap-username", default="manager", show_default=True,
              envvar="TEXAM_BOOTSTRAP_USERNAME",
              help="Manager account created on first run.")
@click.option("--bootstrap-password", default=None,
              envvar="TEXAM_BOOTSTRAP_PASSWORD",
              help="Password for the first-run manager account.")
@click.option("--static-dir", type=click.Path(path_type=Path), default=None,
              envvar="TEXAM_STATIC_DIR",
              help="Directory of built web UI files to serve at /.")
def serve(port: int, host: str, data_dir: Path, token_ttl: int,
          bootstrap_username: str, bootstrap_password: str | None,
          static_dir: Path | None) -> None:
    """Run the HTTP API until terminated."""
    import uvicorn

    from .service import create_app, ensure_bootstrap

    config = ServiceConfig(data_dir=data_dir, token_ttl_minutes=token_ttl,
                           bootstrap_username=bootstrap_username,
                           bootstrap_password=bootstrap_password)
    try:
        store = Store(config.store_path)
    except StoreError as e:
        raise click.ClickException(str(e))
    if ensure_bootstrap(store, config):
        click.echo(f"created bootstrap manager account {bootstrap_username!r}",
                   err=True)

    # fail fast with a readable message instead of a uvicorn traceback
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as e:
        raise click.ClickException(f"cannot listen on {host}:{port}: {e}")
    finally:
        probe.close()

    if static_dir is None:
        default_ui = Path("frontend") / "dist"
        if default_ui.is_dir():
            static_dir = default_ui
    app = create_app(store, config, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


# -- render ----------------------------------------------------------------

@main.command()
@click.argument("input_path", type=click.Path(path_type=Path, exists=True,
                                              dir_okay=False))
@click.option("--display", is_flag=True, envvar="TEXAM_DISPLAY",
              help="Treat the file as one bare formula in display style.")
def render(input_path: Path, display: bool) -> None:
    """Render a markup file to HTML on stdout."""
    source = input_path.read_text(encoding="utf-8")
    try:
        if display:
            html = render_math_node(compile_math(source.strip()), display=True)
        else:
            html = render_source(source).html
    except MarkupError as e:
        click.echo(f"{input_path}:{e.pos.line}:{e.pos.column}: "
                   f"{e.kind.value}: {e.message}", err=True)
        sys.exit(1)
    click.echo(html)


# -- exam exchange files ---------------------------------------------------

def validate_exam_file(data: object) -> list[str]:
    """Structural and markup problems in an exchange file; [] means ok."""
    problems: list[str] = []
    if not isinstance(data, dict):
        return ["top level must be an object"]
    if data.get("format_version") != EXAM_FILE_VERSION:
        problems.append(f"format_version must be {EXAM_FILE_VERSION}")
    exam = data.get("exam")
    if not isinstance(exam, dict):
        return problems + ["missing exam object"]
    for field_name in ("title", "course_code"):
        if not isinstance(exam.get(field_name), str) or not exam.get(field_name):
            problems.append(f"exam.{field_name} must be a non-empty string")
    duration = exam.get("duration_minutes")
    if not isinstance(duration, int) or duration <= 0:
        problems.append("exam.duration_minutes must be a positive integer")
    questions = exam.get("questions")
    if not isinstance(questions, list) or not questions:
        return problems + ["exam.questions must be a non-empty array"]
    for i, q in enumerate(questions):
        where = f"questions[{i}]"
        if not isinstance(q, dict):
            problems.append(f"{where} must be an object")
            continue
        options = q.get("options")
        if not isinstance(options, list) or any(
                not isinstance(o, dict) or not isinstance(o.get("source"), str)
                for o in options):
            problems.append(f"{where}.options must be objects with a source")
            continue
        index = q.get("correct_index")
        if not isinstance(index, int) or not 0 <= index < len(options):
            problems.append(f"{where}.correct_index out of range")
            continue
        points = q.get("points", 1)
        if not isinstance(points, int):
            problems.append(f"{where}.points must be an integer")
            continue
        issues = validate_question(q.get("stem_source", ""),
                                   [o["source"] for o in options],
                                   option_label(index), points)
        problems.extend(f"{where}: {issue.where}: {issue.message}"
                        for issue in issues)
    return problems


def exam_file_from_record(record: dict) -> dict:
    """Manager-side exam record -> portable exchange file."""
    questions = []
    for q in record["questions"]:
        labels = [o["label"] for o in q["options"]]
        questions.append({
            "stem_source": q["stem_source"],
            "options": [{"source": o["source"]} for o in q["options"]],
            "correct_index": labels.index(q["correct_label"]),
            "points": q["points"],
        })
    return {
        "format_version": EXAM_FILE_VERSION,
        "exam": {
            "title": record["title"],
            "course_code": record["course_code"],
            "duration_minutes": record["duration_minutes"],
            "questions": questions,
        },
    }


def _api_client(url: str, token: str) -> httpx.Client:
    return httpx.Client(base_url=url,
                        headers={"Authorization": f"Bearer {token}"},
                        timeout=30.0)


def _api_detail(response: httpx.Response) -> str:
    try:
        error = response.json()["error"]
        return f"{error['code']}: {error['message']}"
    except Exception:
        return response.text[:200]


@main.command("import")
@click.argument("file_path", type=click.Path(path_type=Path, exists=True,
                                             dir_okay=False))
@click.option("--url", required=True, envvar="TEXAM_URL",
              help="Server base URL, e.g. http://127.0.0.1:8000")
@click.option("--token", required=True, envvar="TEXAM_TOKEN",
              help="Manager session token.")
def import_exam(file_path: Path, url: str, token: str) -> None:
    """Create an exam on the server from an exchange file."""
    try:
        data = json.loads(file_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise click.ClickException(f"{file_path} is not valid JSON: {e}")
    problems = validate_exam_file(data)
    if problems:
        for p in problems:
            click.echo(f"{file_path}: {p}", err=True)
        sys.exit(1)

    exam = data["exam"]
    with _api_client(url, token) as client:
        created = client.post("/api/exams", json={
            "title": exam["title"], "course_code": exam["course_code"],
            "duration_minutes": exam["duration_minutes"]})
        if created.status_code != 201:
            raise click.ClickException(
                f"creating exam failed: {_api_detail(created)}")
        exam_id = created.json()["id"]
        failures = 0
        for i, q in enumerate(exam["questions"]):
            response = client.post(f"/api/exams/{exam_id}/questions", json={
                "stem_source": q["stem_source"],
                "options": [o["source"] for o in q["options"]],
                "correct_label": option_label(q["correct_index"]),
                "points": q.get("points", 1)})
            if response.status_code != 201:
                failures += 1
                click.echo(f"question {i} failed: {_api_detail(response)}",
                           err=True)
        if failures:
            click.echo(f"exam {exam_id} created with {failures} failed "
                       f"question(s)", err=True)
            sys.exit(1)
    click.echo(exam_id)


@main.command()
@click.argument("exam_id")
@click.option("--url", required=True, envvar="TEXAM_URL",
              help="Server base URL.")
@click.option("--token", required=True, envvar="TEXAM_TOKEN",
              help="Manager session token.")
def export(exam_id: str, url: str, token: str) -> None:
    """Write an exam as an exchange file on stdout."""
    with _api_client(url, token) as client:
        response = client.get(f"/api/exams/{exam_id}")
        if response.status_code != 200:
            raise click.ClickException(
                f"fetching exam failed: {_api_detail(response)}")
    click.echo(json.dumps(exam_file_from_record(response.json()),
                          ensure_ascii=False, indent=2))


if __name__ == "__main__":
    main()
