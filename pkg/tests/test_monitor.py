"""Closed-loop monitor: verdicts, escalation ladder, adaptation routing."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridslice.documents import load_builtin
from gridslice.errors import EmptyWindow
from gridslice.intent_dsl import ServiceRequirementSet, SliceCategory
from gridslice.mano import Nfvo, Vim
from gridslice.monitor import (
    ActionKind,
    ComplianceVerdict,
    MonitorOptimizer,
    MonitorThresholds,
    _SliceLoopState,
    decide_from,
    evaluate,
)
from gridslice.service_orch import Nest, ProfileState, ServiceOrchestrator, ServiceProfile, load_gst_catalog
from gridslice.simulator import KpiReport
from gridslice.slice_orch import SliceOrchestrator, SliceState


def make_report(p99=8.0, availability=1.0, throughput=1.0, sent=250, empty=False):
    return KpiReport(
        nsi_id="nsi-0001",
        window_start=0.0,
        window_end=5.0,
        sent=sent,
        delivered=int(sent * availability),
        p99_latency_ms=p99,
        loss_rate=1.0 - availability,
        throughput_mbps=throughput,
        availability=availability,
        empty=empty,
    )


def make_profile(category=SliceCategory.URLLC, bandwidth=1.0):
    reqs = ServiceRequirementSet(
        category=category,
        latency_bound_ms=10.0,
        reliability=0.99999,
        bandwidth_mbps=bandwidth,
        device_count=50,
        endpoints=("pmu-group-7", "central-pdc"),
        source_intent="intent-0001",
    )
    return ServiceProfile(id="intent-0001/p1", requirements=reqs, customer_ref="intent-0001")


class TestEvaluate:
    def test_latency_met(self):
        verdict = evaluate(make_report(p99=8.0), make_profile())
        status = {s.name: s for s in verdict.statuses}
        assert status["latency"].met
        assert verdict.overall

    def test_latency_violated_carries_observed_and_bound(self):
        verdict = evaluate(make_report(p99=12.0), make_profile())
        status = {s.name: s for s in verdict.statuses}
        assert not status["latency"].met
        assert status["latency"].observed == 12.0
        assert status["latency"].bound == 10.0
        assert not verdict.overall

    def test_availability_counted_from_seeded_window(self):
        """One drop in 2500 messages: availability 0.9996 < 0.99999."""
        report = make_report(availability=2499 / 2500, sent=2500)
        verdict = evaluate(report, make_profile())
        status = {s.name: s for s in verdict.statuses}
        assert not status["availability"].met
        assert status["availability"].observed == pytest.approx(0.9996)

    def test_throughput_only_enforced_for_embb(self):
        urllc = evaluate(make_report(throughput=0.0), make_profile())
        assert "throughput" not in {s.name for s in urllc.statuses}
        embb = evaluate(
            make_report(throughput=20.0), make_profile(SliceCategory.EMBB, bandwidth=25.0)
        )
        status = {s.name: s for s in embb.statuses}
        assert not status["throughput"].met  # 20 < 0.95 * 25
        assert status["throughput"].bound == pytest.approx(23.75)

    def test_empty_window_raises(self):
        with pytest.raises(EmptyWindow):
            evaluate(make_report(empty=True), make_profile())


def verdict(overall: bool, window=(0.0, 5.0)) -> ComplianceVerdict:
    return ComplianceVerdict(nsi_id="nsi-0001", window=window, statuses=(), overall=overall)


def run_ladder(pattern: list[bool], thresholds=MonitorThresholds()):
    """Feed a Met/Violated pattern through decide_from; returns actions."""
    state = _SliceLoopState()
    history: list[ComplianceVerdict] = []
    actions = []
    for i, met in enumerate(pattern):
        history.append(verdict(met, window=(5.0 * i, 5.0 * (i + 1))))
        actions.append(decide_from(history, state, thresholds))
    return actions


class TestDecide:
    def test_single_violation_is_hysteresis_filtered(self):
        actions = run_ladder([True, True, False])
        assert [a.kind for a in actions] == [ActionKind.NONE] * 3

    def test_two_violations_trigger_rehome(self):
        actions = run_ladder([False, False, True])
        assert actions[1].kind is ActionKind.REHOME
        assert len(actions[1].trigger_windows) >= 2

    def test_persistent_violations_escalate(self):
        # rehome, cooldown x3, replace, cooldown x3, alert
        actions = run_ladder([False] * 11)
        kinds = [a.kind for a in actions]
        assert kinds[1] is ActionKind.REHOME
        assert kinds[2:5] == [ActionKind.NONE] * 3
        assert kinds[5] is ActionKind.REPLACE_NEST
        assert kinds[6:9] == [ActionKind.NONE] * 3
        assert kinds[9] is ActionKind.ALERT

    def test_recovery_resets_escalation(self):
        pattern = [False, False] + [True] * 6 + [False, False]
        actions = run_ladder(pattern)
        assert actions[1].kind is ActionKind.REHOME
        assert actions[-1].kind is ActionKind.REHOME  # ladder starts over

    def test_quiescence(self):
        actions = run_ladder([True] * 20)
        assert all(a.kind is ActionKind.NONE for a in actions)

    def test_causality_every_action_references_k_windows(self):
        for action in run_ladder([False] * 30):
            if action.kind is not ActionKind.NONE:
                assert len(action.trigger_windows) >= 2


@given(st.lists(st.booleans(), min_size=1, max_size=50), st.integers(0, 2**32))
@settings(max_examples=2000)
def test_cooldown_spacing_property(pattern, _seed):
    """No two non-None actions ever occur within C windows of each other."""
    thresholds = MonitorThresholds()
    actions = run_ladder(pattern, thresholds)
    fired = [i for i, a in enumerate(actions) if a.kind is not ActionKind.NONE]
    for a, b in zip(fired, fired[1:]):
        assert b - a > thresholds.cooldown_windows


def make_loop_rig(topology_doc=None):
    vim = (
        Vim.from_topology(topology_doc)
        if topology_doc
        else Vim.from_topology(load_builtin("topology.yaml"))
    )
    nfvo = Nfvo()
    service_orch = ServiceOrchestrator(
        load_gst_catalog(load_builtin("gst_catalog.yaml")), nfvo, vim
    )
    slice_orch = SliceOrchestrator(vim, nfvo)
    profile = make_profile()
    service_orch.profiles[profile.id] = profile
    nest = Nest(
        gst_id="gst-urllc-shared",
        slice_type=SliceCategory.URLLC,
        max_latency_ms=10.0,
        min_reliability=0.99999,
        guaranteed_bandwidth_mbps=1.0,
        max_device_density=50,
        isolation="shared",
        source_profile=profile.id,
    )
    events = []
    monitor = MonitorOptimizer(
        MonitorThresholds(),
        service_orch,
        slice_orch,
        on_event=lambda kind, payload: events.append((kind, payload)),
    )
    return vim, service_orch, slice_orch, monitor, nest, profile, events


class TestApply:
    def test_rehome_moves_slice_off_degraded_path(self):
        vim, service_orch, slice_orch, monitor, nest, profile, events = make_loop_rig()
        nsi = slice_orch.instantiate(nest, ("edge-1", "core-1"))
        nsi_id = nsi.id
        old_path = set(nsi.path)
        vim.inject_link_degradation("l-edge-agg", 20.0, 0.0)
        for _ in range(2):
            monitor.on_report(
                KpiReport(
                    nsi_id=nsi_id,
                    window_start=30.0,
                    window_end=35.0,
                    sent=250,
                    delivered=250,
                    p99_latency_ms=25.9,
                    loss_rate=0.0,
                    throughput_mbps=0.08,
                    availability=1.0,
                )
            )
        updated = slice_orch.get(nsi_id)
        assert updated.state is SliceState.ACTIVE
        assert set(updated.path).isdisjoint(old_path)
        action_events = [p for k, p in events if k == "action"]
        assert action_events and action_events[0]["result"] == "rehomed"

    def test_rehome_without_alternate_path_alerts(self):
        topology = {
            "schema": "gridslice/topology/1",
            "nodes": [
                {"id": "a", "cpu": 8, "memory_mb": 8192},
                {"id": "b", "cpu": 8, "memory_mb": 8192},
            ],
            "links": [
                {"id": "only", "endpoints": ["a", "b"], "capacity_mbps": 100, "base_latency_ms": 2}
            ],
            "attachments": {"default_ingress": "a", "default_egress": "b"},
        }
        vim, service_orch, slice_orch, monitor, nest, profile, events = make_loop_rig(topology)
        nsi = slice_orch.instantiate(nest, ("a", "b"))
        for _ in range(2):
            monitor.on_report(
                KpiReport(
                    nsi_id=nsi.id,
                    window_start=0.0,
                    window_end=5.0,
                    sent=10,
                    delivered=10,
                    p99_latency_ms=99.0,
                    loss_rate=0.0,
                    throughput_mbps=0.1,
                    availability=1.0,
                )
            )
        action_events = [p for k, p in events if k == "action"]
        assert action_events
        assert action_events[0]["action"] == "Rehome"
        assert action_events[0]["result"] == "alert"

    def test_met_windows_produce_no_actions(self):
        vim, service_orch, slice_orch, monitor, nest, profile, events = make_loop_rig()
        nsi = slice_orch.instantiate(nest, ("edge-1", "core-1"))
        for _ in range(5):
            action = monitor.on_report(
                KpiReport(
                    nsi_id=nsi.id,
                    window_start=0.0,
                    window_end=5.0,
                    sent=250,
                    delivered=250,
                    p99_latency_ms=6.0,
                    loss_rate=0.0,
                    throughput_mbps=0.08,
                    availability=1.0,
                )
            )
            assert action.kind is ActionKind.NONE
        assert [k for k, _ in events if k == "action"] == []
        assert slice_orch.get(nsi.id).state is SliceState.ACTIVE

    def test_degradation_marks_slice_and_profile(self):
        vim, service_orch, slice_orch, monitor, nest, profile, events = make_loop_rig()
        nsi = slice_orch.instantiate(nest, ("edge-1", "core-1"))
        profile.state = ProfileState.PROVISIONED
        monitor.on_report(
            KpiReport(
                nsi_id=nsi.id,
                window_start=0.0,
                window_end=5.0,
                sent=250,
                delivered=250,
                p99_latency_ms=26.0,
                loss_rate=0.0,
                throughput_mbps=0.08,
                availability=1.0,
            )
        )
        assert slice_orch.get(nsi.id).state is SliceState.DEGRADED
        assert profile.state is ProfileState.DEGRADED
