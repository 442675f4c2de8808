"""Shared fixtures: in-process service with fake clock and fast hashing."""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import pytest
from fastapi.testclient import TestClient

from texam.config import ServiceConfig
from texam.service import create_app, ensure_bootstrap
from texam.store import Store

MANAGER_PASSWORD = "manager-secret"
STUDENT_PASSWORD = "student-secret"


class FakeClock:
    """Deterministic, manually advanced wall clock."""

    def __init__(self, start: datetime | None = None):
        self.current = start or datetime(2026, 3, 2, 9, 0, tzinfo=timezone.utc)

    def __call__(self) -> datetime:
        return self.current

    def advance(self, **kwargs) -> None:
        self.current += timedelta(**kwargs)


@dataclass
class ServiceEnv:
    client: TestClient
    store: Store
    config: ServiceConfig
    clock: FakeClock
    manager_token: str
    student_token: str
    student_id: str

    def auth(self, token: str) -> dict:
        return {"Authorization": f"Bearer {token}"}

    @property
    def manager(self) -> dict:
        return self.auth(self.manager_token)

    @property
    def student(self) -> dict:
        return self.auth(self.student_token)

    def login(self, username: str, password: str) -> dict:
        response = self.client.post("/api/login", json={
            "username": username, "password": password})
        assert response.status_code == 200, response.text
        return response.json()

    def make_student(self, username: str, password: str = STUDENT_PASSWORD) -> str:
        response = self.client.post("/api/users", headers=self.manager, json={
            "username": username, "password": password, "role": "Student"})
        assert response.status_code == 201, response.text
        return response.json()["id"]


def build_env(tmp_path, clock: FakeClock | None = None) -> ServiceEnv:
    clock = clock or FakeClock()
    config = ServiceConfig(
        data_dir=tmp_path / "data",
        token_ttl_minutes=120,
        bootstrap_username="admin",
        bootstrap_password=MANAGER_PASSWORD,
        scrypt_n=16, scrypt_r=8, scrypt_p=1,  # weak on purpose: test speed
    )
    store = Store(config.store_path)
    assert ensure_bootstrap(store, config)
    client = TestClient(create_app(store, config, clock=clock))

    manager_token = client.post("/api/login", json={
        "username": "admin", "password": MANAGER_PASSWORD}).json()["token"]
    created = client.post("/api/users",
                          headers={"Authorization": f"Bearer {manager_token}"},
                          json={"username": "ngozi",
                                "password": STUDENT_PASSWORD,
                                "role": "Student"})
    assert created.status_code == 201, created.text
    student_id = created.json()["id"]
    student_token = client.post("/api/login", json={
        "username": "ngozi", "password": STUDENT_PASSWORD}).json()["token"]
    return ServiceEnv(client, store, config, clock,
                      manager_token, student_token, student_id)


@pytest.fixture()
def env(tmp_path) -> ServiceEnv:
    return build_env(tmp_path)


@dataclass
class LiveServer:
    url: str
    manager_token: str
    store: Store


@pytest.fixture()
def live_server(tmp_path):
    """Real uvicorn server on a random port, bootstrap manager logged in."""
    import threading
    import time

    import httpx
    import uvicorn

    config = ServiceConfig(
        data_dir=tmp_path / "server-data",
        bootstrap_username="admin",
        bootstrap_password=MANAGER_PASSWORD,
        scrypt_n=16,
    )
    store = Store(config.store_path)
    ensure_bootstrap(store, config)
    app = create_app(store, config)
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0,
                                           log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    url = f"http://127.0.0.1:{port}"
    token = httpx.post(f"{url}/api/login", json={
        "username": "admin", "password": MANAGER_PASSWORD}).json()["token"]
    yield LiveServer(url, token, store)
    server.should_exit = True
    thread.join(timeout=10)
