"""HTTP API: endpoint contracts the operator console depends on."""

import json

import pytest
from fastapi.testclient import TestClient

from gridslice.api import create_app
from gridslice.documents import load_builtin
from gridslice.runtime import GridSliceSystem

WAMS_TEXT = "CONNECT pmu-group-7 TO central-pdc FOR wams"


@pytest.fixture
def client(builtin_inputs):
    system = GridSliceSystem(builtin_inputs, seed=42)
    return TestClient(create_app(system)), system


class TestIntentEndpoints:
    def test_submit_and_list(self, client):
        http, system = client
        response = http.post("/intents", json={"stakeholder": "DSO", "text": WAMS_TEXT})
        assert response.status_code == 200
        body = response.json()
        assert body["ok"] and body["nsi_id"] == "nsi-0001"
        intents = http.get("/intents").json()
        assert len(intents) == 1 and intents[0]["status"] == "active"

    def test_parse_error_carries_position(self, client):
        http, _ = client
        body = http.post("/intents", json={"stakeholder": "DSO", "text": "FLY x"}).json()
        assert not body["ok"]
        assert body["stage"] == "parse"
        assert "position 0" in body["error"]

    def test_dry_run_leaves_slice_events_untouched(self, client):
        http, system = client
        http.post("/intents", json={"stakeholder": "DSO", "text": WAMS_TEXT})
        before = [r for r in system.log.records if r.category == "slice"]
        response = http.post(
            "/intents",
            json={"stakeholder": "DSO", "text": WAMS_TEXT, "dry_run": True},
        )
        assert response.json()["feasible"]
        after = [r for r in system.log.records if r.category == "slice"]
        assert before == after
        assert len(http.get("/slices").json()) == 1


class TestSliceEndpoints:
    def test_get_slice_detail(self, client):
        http, _ = client
        nsi_id = http.post(
            "/intents", json={"stakeholder": "DSO", "text": WAMS_TEXT}
        ).json()["nsi_id"]
        doc = http.get(f"/slices/{nsi_id}").json()
        assert doc["state"] == "Active"
        assert doc["slice_type"] == "URLLC"
        assert doc["path"]

    def test_unknown_slice_is_404(self, client):
        http, _ = client
        response = http.get("/slices/nsi-9999")
        assert response.status_code == 404
        assert response.json()["error"] == "UnknownId"

    def test_kpi_endpoint(self, client):
        http, system = client
        doc = load_builtin("scenarios/wams-reference.yaml")
        system.execute("load_scenario", {"document": doc})
        system.execute("advance", {"until": 10.0})
        nsi_id = http.get("/slices").json()[0]["id"]
        reports = http.get(f"/slices/{nsi_id}/kpi", params={"start": 0, "end": 10}).json()
        assert len(reports) == 2
        assert all(r["p99_latency_ms"] < 10 for r in reports)


class TestEventStream:
    def test_after_cursor_ndjson(self, client):
        http, _ = client
        http.post("/intents", json={"stakeholder": "DSO", "text": WAMS_TEXT})
        response = http.get("/events", params={"after": 0})
        assert response.headers["content-type"].startswith("application/x-ndjson")
        lines = [json.loads(l) for l in response.text.splitlines()]
        assert [l["seq"] for l in lines] == list(range(1, len(lines) + 1))
        tail = http.get("/events", params={"after": lines[-1]["seq"]})
        assert tail.text == ""

    def test_faults_endpoint(self, client):
        http, system = client
        http.post("/intents", json={"stakeholder": "DSO", "text": WAMS_TEXT})
        response = http.post(
            "/faults",
            json={"kind": "link_degradation", "link": "l-edge-agg", "extra_latency_ms": 5.0},
        )
        assert response.json()["status"] == "applied"
        assert system.vim.links["l-edge-agg"].degradation == 5.0
        missing = http.post(
            "/faults",
            json={"kind": "link_degradation", "link": "l-zzz", "extra_latency_ms": 5.0},
        )
        assert missing.status_code == 404


class TestSlaEndpoints:
    def test_register_validate_invalidate_cycle(self, client):
        http, _ = client
        doc = {
            "id": "sla-dr-urllc",
            "parties": ["DR_AGGREGATOR", "CSP"],
            "permitted_categories": ["URLLC"],
            "kpi_bounds": {"min_latency_ms": 1.0, "max_reliability": 0.99999},
            "priority": 0,
        }
        assert http.post("/slas", json=doc).json() == {"sla_id": "sla-dr-urllc"}
        outcome = http.post(
            "/intents",
            json={"stakeholder": "DR_AGGREGATOR", "text": "CONNECT a TO b FOR wams"},
        ).json()
        assert outcome["ok"]  # the new priority-0 SLA governs and permits URLLC
        assert http.delete("/slas/sla-dr-urllc").status_code == 200
        outcome = http.post(
            "/intents",
            json={"stakeholder": "DR_AGGREGATOR", "text": "CONNECT a TO b FOR wams"},
        ).json()
        assert not outcome["ok"] and outcome["stage"] == "validate"

    def test_duplicate_sla_is_400(self, client):
        http, _ = client
        listed = http.get("/slas").json()
        assert any(s["id"] == "sla-dso-csp" for s in listed)
        doc = {
            "id": "sla-dso-csp",
            "parties": ["DSO", "CSP"],
            "permitted_categories": ["URLLC"],
        }
        response = http.post("/slas", json=doc)
        assert response.status_code == 400
        assert response.json()["error"] == "DuplicateId"


class TestServiceModelOutput:
    def test_models_written_under_output_directory(self, builtin_inputs, tmp_path):
        system = GridSliceSystem(builtin_inputs, seed=1)
        system.model_dir = str(tmp_path / "models")
        outcome = system.submit_intent("DSO", WAMS_TEXT)
        stem = outcome["profile_id"].replace("/", "_")
        doc = (tmp_path / "models" / f"{stem}.yaml").read_text()
        assert "service_delivery" in doc
        assert (tmp_path / "models" / f"{stem}.tree.txt").exists()


class TestSnapshotEndpoints:
    def test_snapshot_restore_round_trip(self, client):
        http, _ = client
        http.post("/intents", json={"stakeholder": "DSO", "text": WAMS_TEXT})
        snapshot = http.post("/snapshot").json()
        assert snapshot["schema"] == "gridslice/snapshot/1"
        response = http.post("/restore", json={"snapshot": snapshot})
        assert response.json()["version"] == snapshot["version"]
        again = http.post("/snapshot").json()
        assert json.dumps(again, sort_keys=True) == json.dumps(snapshot, sort_keys=True)

    def test_restore_bad_schema_is_400(self, client):
        http, _ = client
        response = http.post("/restore", json={"snapshot": {"schema": "nope/9"}})
        assert response.status_code == 400
        assert response.json()["error"] == "VersionMismatch"

    def test_topology_and_clock(self, client):
        http, _ = client
        topo = http.get("/topology").json()
        assert {n["id"] for n in topo["nodes"]} == {"edge-1", "agg-1", "core-1"}
        assert http.get("/clock").json()["sim_time"] == 0.0
