import pytest
from fastapi.testclient import TestClient

from app.main import app

client = TestClient(app)


def test_root_lists_endpoints():
    response = client.get("/")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "operational"
    assert "POST /api/v1/experiments" in body["endpoints"]


def test_health():
    response = client.get("/api/v1/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert set(body["numerics"]) == {"python", "numpy", "scipy"}


def test_logs_health():
    response = client.get("/api/v1/health/logs")
    assert response.status_code == 200
    assert "level" in response.json()["logging"]


def test_complexity_endpoint():
    response = client.get("/api/v1/complexity", params={"n": 30, "m": 20, "c": 2, "s": 100, "nprime": 2})
    assert response.status_code == 200
    schedulers = response.json()["schedulers"]
    assert schedulers["proposed"]["bounds"] == [285820, 285850]
    assert schedulers["montecarlo"]["bounds"] == [222377, 977891377]


def test_complexity_rejects_zero_sensors():
    response = client.get("/api/v1/complexity", params={"n": 0, "m": 20, "c": 2, "s": 100, "nprime": 2})
    assert response.status_code == 422


def test_cq_points_endpoint():
    response = client.get("/api/v1/cqpoints", params={"dim": 1, "order": 1})
    assert response.status_code == 200
    body = response.json()
    assert body["weights"] == pytest.approx([0.5, 0.5])
    assert body["points"] == [[pytest.approx(1.0)], [pytest.approx(-1.0)]]


def test_cq_points_unknown_root_method():
    response = client.get("/api/v1/cqpoints", params={"dim": 2, "order": 2, "root_method": "newton"})
    assert response.status_code == 422


def test_run_small_experiment(small_config_dict):
    response = client.post("/api/v1/experiments", json=small_config_dict, params={"seed": 5})
    assert response.status_code == 200
    body = response.json()
    assert body["seed"] == 5
    assert body["evaluation_steps"] == 30
    assert sum(body["asf"]) == pytest.approx(1.0)
    assert body["actions"] == [0, 1, 2, 3, 4]


def test_long_horizons_are_refused():
    response = client.post("/api/v1/experiments", json={})
    assert response.status_code == 413


def test_invalid_config_is_unprocessable():
    response = client.post("/api/v1/experiments", json={"horizon": 20, "warmup": 30})
    assert response.status_code == 422
    assert "warmup" in response.json()["detail"]


def test_unknown_config_field_reports_its_path():
    response = client.post("/api/v1/experiments", json={"world": {"M": 4, "N": 4, "colour": 1}})
    assert response.status_code == 422
    assert response.json()["field"] == "world.colour"
