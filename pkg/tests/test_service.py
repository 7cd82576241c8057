import numpy as np
import pytest
from fastapi.testclient import TestClient

from qinduce.service import app
from qinduce.suites import CATALOG


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_catalog_endpoint(client):
    r = client.get("/catalog")
    assert r.status_code == 200
    names = {e["name"] for e in r.json()}
    assert set(CATALOG) <= names
    assert "kac_paljutkin" in names


def test_induce_preset(client):
    r = client.post("/induce", json={"preset": "s3_mod_c3_omega"})
    assert r.status_code == 200
    body = r.json()
    assert body["dim_carrier"] == 2
    assert body["passed"]
    chi = np.array([complex(a, b) for a, b in body["character"]])
    assert np.linalg.norm(chi - np.array([2, -1, -1, 0, 0, 0])) < 1e-8


def test_induce_inline_spec(client):
    r = client.post("/induce", json={"spec": {
        "alpha": {"preset_action": "full", "group": "Z4"},
        "U": {"preset_rep": "omega"},
    }})
    assert r.status_code == 200
    assert r.json()["dim_carrier"] == 1


def test_induce_validation_errors(client):
    r = client.post("/induce", json={})
    assert r.status_code == 422
    r = client.post("/induce", json={"preset": "no_such_preset"})
    assert r.status_code == 404
    r = client.post("/induce", json={"spec": {
        "alpha": {"preset_action": "subgroup", "group": "S3", "subgroup": "C3"},
        "U": {"K_dim": 1, "matrix": [[1, 0], [0.5, 0], [0.5, 0]]},
    }})
    assert r.status_code == 422
    assert "corep identity residual" in r.json()["detail"]


def test_verify_endpoint(client):
    r = client.post("/verify", json={"preset": "z4_full_omega",
                                     "suite": "action"})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"]
    assert all(c["passed"] for c in body["checks"])
    r = client.post("/verify", json={"preset": "z4_full_omega",
                                     "suite": "bogus"})
    assert r.status_code == 422


def test_oracle_endpoint(client):
    r = client.post("/oracle", json={"group": "S3", "subgroup": "C2",
                                     "rep": "sign"})
    assert r.status_code == 200
    body = r.json()
    assert body["induced_dimension"] == 3
    chi = np.array([complex(a, b) for a, b in body["character"]])
    assert np.linalg.norm(chi - np.array([3, 0, 0, -1, -1, -1])) < 1e-10
