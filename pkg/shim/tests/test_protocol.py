import base64
import json
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from quota_shim import ShimConfig, TinyBackend, create_app, renormalize_pair


@pytest.fixture(scope="module")
def client():
    app = create_app(ShimConfig(backend="tiny:7"))
    with TestClient(app) as c:
        yield c


def load_schema(name):
    quota_schemas = pytest.importorskip(
        "quota.schemas", reason="primary package provides the schema fixtures"
    )
    from importlib import resources

    with resources.files("quota.schemas").joinpath(name).open() as fh:
        return json.load(fh)


def fixture_requests():
    """20 deterministic score requests, some carrying image bytes."""
    requests = []
    for i in range(20):
        body = {
            "prompt": (
                f"Question: Does this frame contain any information to "
                f"answer the given query: case {i}?\nA. Yes. B. No.\n"
                "Answer the letter directly."
            ),
            "frame_id": f"frame-{i:04d}",
        }
        if i % 3 == 0:
            body["image_b64"] = base64.b64encode(
                bytes([i] * 64) + b"fake-frame-bytes"
            ).decode("ascii")
        requests.append(body)
    return requests


def test_score_responses_conform_to_schema(client):
    jsonschema = pytest.importorskip("jsonschema")
    schema = load_schema("score_response.schema.json")
    for body in fixture_requests():
        resp = client.post("/score", json=body)
        assert resp.status_code == 200
        payload = resp.json()
        jsonschema.validate(payload, schema)
        assert 0.0 <= payload["p_a"] <= 1.0


def test_generate_response_conforms_to_schema(client):
    jsonschema = pytest.importorskip("jsonschema")
    schema = load_schema("generate_response.schema.json")
    resp = client.post("/generate", json={"prompt": "describe the scene"})
    assert resp.status_code == 200
    payload = resp.json()
    jsonschema.validate(payload, schema)
    assert payload["text"]


def test_score_is_deterministic_and_stateless(client):
    body = fixture_requests()[0]
    first = client.post("/score", json=body).json()
    for _ in range(3):
        assert client.post("/score", json=body).json() == first


def test_score_missing_prompt_is_400(client):
    resp = client.post("/score", json={"frame_id": "x"})
    assert resp.status_code == 400
    assert "error" in resp.json()


def test_score_missing_frame_id_is_400(client):
    resp = client.post("/score", json={"prompt": "p"})
    assert resp.status_code == 400


def test_score_invalid_base64_is_400(client):
    resp = client.post(
        "/score",
        json={"prompt": "p", "frame_id": "f", "image_b64": "@@not-base64@@"},
    )
    assert resp.status_code == 400


def test_generate_missing_prompt_is_400(client):
    resp = client.post("/generate", json={})
    assert resp.status_code == 400


def test_unloadable_backend_answers_503():
    # a local path that does not exist fails fast, with no hub lookups
    app = create_app(ShimConfig(backend="hf:/nonexistent/model/dir"))
    with TestClient(app) as client:
        resp = client.post("/score", json={"prompt": "p", "frame_id": "f"})
        assert resp.status_code == 503
        assert resp.json()["error"] == "model-not-ready"
        # the failure is remembered; later requests stay 503 without retrying
        resp = client.post("/generate", json={"prompt": "p"})
        assert resp.status_code == 503


def test_concurrent_requests_consistent(client):
    bodies = fixture_requests()
    expected = {b["frame_id"]: client.post("/score", json=b).json()["p_a"]
                for b in bodies}

    def hit(body):
        return body["frame_id"], client.post("/score", json=body).json()["p_a"]

    with ThreadPoolExecutor(max_workers=8) as pool:
        for frame_id, p_a in pool.map(hit, bodies * 3):
            assert p_a == expected[frame_id]


def test_renormalize_pair_bounds():
    cases = [(0.0, 0.0), (5.0, -5.0), (-800.0, 800.0), (1e4, 1e4),
             (-1e4, 1e4), (3.2, 3.1)]
    for la, lb in cases:
        p = renormalize_pair(la, lb)
        assert 0.0 <= p <= 1.0
        # the pair is a proper two-way distribution
        assert renormalize_pair(lb, la) == pytest.approx(1.0 - p, abs=1e-12)
    assert renormalize_pair(0.0, 0.0) == 0.5
    assert renormalize_pair(50.0, -50.0) > 0.999999


def test_tiny_backend_varies_with_input():
    backend = TinyBackend(seed=1)
    pa = renormalize_pair(*backend.option_logits("prompt one", None))
    pb = renormalize_pair(*backend.option_logits("prompt two", None))
    assert pa != pb
    with_img = renormalize_pair(
        *backend.option_logits("prompt one", b"pixels")
    )
    assert with_img != pa
