from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from siterec import fixtures
from siterec.engine import parse_profile, recommend, recommendation_to_dict
from siterec.errors import ManifestError, SnapshotRefusedError
from siterec.service import SnapshotService, create_app


@pytest.fixture(scope="module")
def served(market_dir):
    service = SnapshotService()
    service.load(market_dir / "manifest.json")
    return service, TestClient(create_app(service))


@pytest.fixture(scope="module")
def lidl_doc(market_dataset):
    return market_dataset.profiles["lidl"]


def test_health_carries_version(served):
    service, client = served
    payload = client.get("/health").json()
    assert payload == {
        "status": "ok",
        "loaded": True,
        "version": service.state.version,
    }


def test_sites_browse(served):
    _, client = served
    states = client.get("/sites", params={"level": "state"}).json()["sites"]
    assert [s["code"] for s in states] == ["DE.BB", "DE.NI", "DE.ST"]
    under = client.get(
        "/sites", params={"level": "municipality", "under": "DE.NI"}
    ).json()["sites"]
    assert len(under) == 570
    assert all(s["code"].startswith("DE.NI") for s in under)


def test_site_detail_and_404(served):
    _, client = served
    detail = client.get("/sites/DE.NI").json()
    assert detail["level"] == "state" and len(detail["children"]) == 6
    assert client.get("/sites/GHOST").status_code == 404


def test_factor_catalog_and_values(served):
    _, client = served
    factors = client.get("/factors").json()["factors"]
    assert {f["id"] for f in factors} == {
        "inhabitants", "purchasing_power", "unemployment_rate",
    }
    response = client.get(
        "/factors/inhabitants/values",
        params={"year": 2016, "level": "state", "under": "DE.NI"},
    )
    values = response.json()["values"]
    assert len(values) == 1 and values[0]["value"] > 0
    assert client.get("/factors/nope/values", params={"year": 2016}).status_code == 404


def test_recommend_delegation_equivalence(served, lidl_doc):
    service, client = served
    response = client.post("/recommend", params={"top_k": 25}, json=lidl_doc)
    assert response.status_code == 200
    payload = response.json()
    direct = recommend(service.state.snapshot, parse_profile(lidl_doc), 25)
    assert payload["results"] == [recommendation_to_dict(r) for r in direct]
    assert payload["version"] == service.state.snapshot.version


def test_recommend_rejects_malformed_body(served):
    _, client = served
    response = client.post(
        "/recommend", content=b"{", headers={"content-type": "application/json"}
    )
    assert response.status_code == 400
    response = client.post("/recommend", json={"year": "x"})
    assert response.status_code == 400


def test_recommend_conflicting_must_haves_is_422_with_names(served, lidl_doc):
    _, client = served
    doc = json.loads(json.dumps(lidl_doc))
    doc["criteria"].append(
        {
            "name": "tiny-only",
            "kind": "must_have",
            "predicate": {"factor": "inhabitants", "op": "lt", "threshold": 100},
        }
    )
    response = client.post("/recommend", json=doc)
    assert response.status_code == 422
    conflicts = response.json()["detail"]["conflicts"]
    assert {conflicts[0]["first"], conflicts[0]["second"]} == {
        "lidl-min-inhabitants", "tiny-only",
    }


def test_recommend_unknown_focus_is_404(served, lidl_doc):
    _, client = served
    doc = {**lidl_doc, "focus": ["DE.XX"]}
    assert client.post("/recommend", json=doc).status_code == 404


def test_evaluate_reproduces_case_study_cells(served, lidl_doc):
    _, client = served
    response = client.post("/evaluate", json={"profile": lidl_doc, "chains": ["Lidl"]})
    assert response.status_code == 200
    result = response.json()["results"][0]
    assert result["cells"] == {
        "store_fulfilled": 428,
        "store_unfulfilled": 25,
        "nostore_fulfilled": 412,
        "nostore_unfulfilled": 839,
    }
    assert result["overlap_percent"] == 94.5


def test_evaluate_inline_chain_and_details(served, lidl_doc):
    _, client = served
    body = {
        "profile": lidl_doc,
        "chains": [{"label": "mine", "sites": ["DE.NI.D1.M0000"]}],
        "include_sites": True,
    }
    payload = client.post("/evaluate", json=body).json()
    assert payload["results"][0]["stores"] == 1
    details = {d["site"]: d for d in payload["details"]}
    assert len(details) == 1704
    failing = [d for d in details.values() if not d["fulfilled"]]
    assert failing and all(d["reasons"] for d in failing)


def test_evaluate_unknown_chain_label(served, lidl_doc):
    _, client = served
    response = client.post("/evaluate", json={"profile": lidl_doc, "chains": ["Ghost"]})
    assert response.status_code == 404


def test_correlate_endpoint(served):
    _, client = served
    body = {
        "year": 2016,
        "attributes": [
            {"label": "Lidl stores", "chain": "Lidl"},
            {"label": "inhabitants", "factor": "inhabitants"},
            {"label": "unemployment", "factor": "unemployment_rate"},
        ],
        "sites": {"level": "municipality"},
    }
    payload = client.post("/correlate", json=body).json()
    assert payload["labels"] == ["Lidl stores", "inhabitants", "unemployment"]
    matrix = payload["matrix"]
    assert matrix[0][0] == 1.0
    assert matrix[0][1] == pytest.approx(matrix[1][0])
    assert 0.0 < matrix[0][1] <= 1.0


def test_ranksum_endpoint(served):
    _, client = served
    body = {
        "year": 2016,
        "metric": {"factor": "inhabitants"},
        "a": {"sites": {"level": "municipality", "under": "DE.NI"}},
        "b": {"sites": {"level": "municipality", "under": "DE.BB"}},
    }
    payload = client.post("/ranksum", json=body).json()
    assert payload["mode"] == "asymptotic"
    assert 0.0 <= payload["p_value"] <= 1.0
    assert payload["n1"] == 570 and payload["n2"] == 564


def test_unloaded_service_returns_503():
    client = TestClient(create_app(SnapshotService()))
    assert client.get("/sites").status_code == 503


class TestReload:
    def test_failed_reload_keeps_serving_old_snapshot(self, market_dir, tmp_path):
        service = SnapshotService()
        service.load(market_dir / "manifest.json")
        client = TestClient(create_app(service))
        version = service.state.version
        with pytest.raises(ManifestError):
            service.load(tmp_path / "missing.json")
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps({"hierarchy": "x.csv", "levels": ["a", "b"], "factors": []}))
        with pytest.raises(ManifestError):
            service.load(broken)
        assert client.get("/health").json()["version"] == version

    def test_refused_snapshot_keeps_old_state(self, market_dir, tmp_path):
        service = SnapshotService()
        service.load(market_dir / "manifest.json")
        version = service.state.version
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "hierarchy.csv").write_text("code,name,level,parent_code\nX,x,state,MISSING\n")
        (bad / "manifest.json").write_text(
            json.dumps({"hierarchy": "hierarchy.csv", "levels": ["nation", "state"], "factors": []})
        )
        with pytest.raises(SnapshotRefusedError):
            service.load(bad / "manifest.json")
        assert service.state.version == version

    def test_reload_with_changed_data_bumps_version(self, tmp_path, lidl_doc):
        first = fixtures.write_dataset(fixtures.supermarket_case(), tmp_path / "v1")
        service = SnapshotService()
        service.load(first)
        client = TestClient(create_app(service))
        before = client.post("/recommend", params={"top_k": 1}, json=lidl_doc).json()

        changed = fixtures.supermarket_case()
        top_site = before["results"][0]["site"]
        changed.values["inhabitants"] = [
            (site, year, 10.0 if site == top_site else value)
            for site, year, value in changed.values["inhabitants"]
        ]
        second = fixtures.write_dataset(changed, tmp_path / "v2")
        service.load(second)
        after = client.post("/recommend", params={"top_k": 1}, json=lidl_doc).json()
        assert after["version"] != before["version"]
        assert after["results"][0]["site"] != top_site
