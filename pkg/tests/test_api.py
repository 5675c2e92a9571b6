from fastapi.testclient import TestClient

from main import app
from twistlab import create_app


client = TestClient(create_app())


def test_health_check():
    response = TestClient(app).get("/healthz")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_l_value_endpoint():
    response = client.post("/api/lvalue/", json={"chi": "D=-3", "s": "0", "digits": 20})
    assert response.status_code == 200
    body = response.json()
    assert body["exact"] == "1/3"
    assert body["chi"] == "3:2"


def test_bad_character_is_unprocessable():
    response = client.post("/api/lvalue/", json={"chi": "bogus", "s": "1"})
    assert response.status_code == 422
    assert "character" in response.json()["detail"]


def test_evaluate_endpoint():
    payload = {"series": "phi", "s": "0", "chi": "3:2", "q": "0.5", "digits": 20}
    response = client.post("/api/evaluate/", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert abs(float(body["value"]["re"]) - 2 / 7) < 1e-15
    assert body["config"]["command"] == "eval"


def test_evaluate_needs_a_point():
    response = client.post("/api/evaluate/", json={"series": "phi", "chi": "3:2"})
    assert response.status_code == 422


def test_transseries_endpoint():
    payload = {"s1": "0", "chi1": "3:2", "y": "0.3", "side": "plus", "digits": 20}
    response = client.post("/api/transseries/", json=payload)
    assert response.status_code == 200
    assert response.json()["passed"] is True
