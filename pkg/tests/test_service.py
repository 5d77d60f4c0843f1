from fastapi.testclient import TestClient

from fks import pipeline
from fks.service import app

client = TestClient(app)


def doc_text(name):
    return pipeline.example_document(name)


def test_health():
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_examples_listing():
    r = client.get("/examples")
    assert r.status_code == 200
    assert "HYPER3" in r.json()["examples"]


def test_example_fetch_round_trips():
    r = client.get("/examples/hyper2")
    assert r.status_code == 200
    body = r.json()
    assert body["name"] == "HYPER2"
    assert body["document"] == doc_text("HYPER2")


def test_example_fetch_unknown():
    r = client.get("/examples/NOPE")
    assert r.status_code == 404


def test_validate_endpoint_accepted():
    r = client.post("/validate", json={"document": doc_text("TORUS")})
    assert r.status_code == 200
    body = r.json()
    assert body["classification"] == "accepted"
    assert body["conditions"]["a"]["passed"] is True


def test_validate_endpoint_rejected():
    r = client.post("/validate", json={"document": doc_text("KODAIRA")})
    assert r.status_code == 200
    body = r.json()
    assert body["classification"] == "rejected"
    assert body["rejection"]["condition"] == "(d)"


def test_validate_endpoint_malformed():
    r = client.post("/validate", json={"document": "format = fks-1\nm = 1\n"})
    assert r.status_code == 422
    detail = r.json()["detail"]
    assert detail["line"] == 1
    assert "n" in detail["message"]


def test_build_endpoint_full_report():
    r = client.post("/build", json={"document": doc_text("HYPER4")})
    assert r.status_code == 200
    body = r.json()
    assert body["classification"] == "accepted"
    assert body["invariants"]["deck_order"] == 4
    assert body["certificates"]["splitting_vectors"] == [["0", "0"], ["1/2", "1/2"]]


def test_build_endpoint_with_seed():
    seed = [["2", "0", "0", "0"], ["0", "2", "0", "0"], ["0", "0", "2", "0"], ["0", "0", "0", "2"]]
    r = client.post("/build", json={"document": doc_text("TORUS"), "seed_metric": seed})
    assert r.status_code == 200
    assert r.json()["certificates"]["metric"]["P"][0][0] == "4"


def test_build_endpoint_bad_seed():
    seed = [["x", "0"], ["0", "1"]]
    r = client.post("/build", json={"document": doc_text("TORUS"), "seed_metric": seed})
    assert r.status_code == 422


def test_classify_endpoint():
    r = client.post("/classify", json={"document": doc_text("HYPER6")})
    assert r.status_code == 200
    assert r.json() == {"verdict": "torus-quotient(order 6)", "accepted": True}


def test_classify_endpoint_rejected():
    r = client.post("/classify", json={"document": doc_text("DIAG-FAIL")})
    assert r.status_code == 200
    body = r.json()
    assert not body["accepted"]
    assert body["verdict"].startswith("rejected((c)")


def test_abelianize_endpoint():
    r = client.post("/abelianize", json={"document": doc_text("HYPER2")})
    assert r.status_code == 200
    assert r.json() == {"b1": 2, "torsion": [2]}


def test_closure_cap_env(monkeypatch):
    monkeypatch.setenv("FKS_CLOSURE_CAP", "3")
    r = client.post("/classify", json={"document": doc_text("HYPER6")})
    assert r.status_code == 200
    assert not r.json()["accepted"]
    monkeypatch.setenv("FKS_CLOSURE_CAP", "junk")
    r = client.post("/classify", json={"document": doc_text("HYPER6")})
    assert r.status_code == 500
