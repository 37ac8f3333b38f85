"""Closed-loop assurance: compare observed KPIs against profile targets and
escalate adaptation actions through the orchestrators.

The decision rule is a deterministic escalation ladder with hysteresis:
no action unless at least K of the last H windows violated; the first
escalation re-homes the slice off its degraded path, a persisting violation
replaces the NEST per the relaxation policy, and after that the operator is
alerted. Every non-None action starts a cooldown of C windows during which
the ladder stays quiet. The verdict-in/action-out interface is kept narrow
so a learned policy could replace the ladder without touching the loop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import EmptyWindow, GridSliceError
from .intent_dsl import SliceCategory
from .service_orch import ProfileState, ServiceOrchestrator, ServiceProfile
from .simulator import KpiReport
from .slice_orch import SliceOrchestrator, SliceState

logger = logging.getLogger(__name__)


class ActionKind(Enum):
    NONE = "None"
    REHOME = "Rehome"
    REPLACE_NEST = "ReplaceNest"
    ALERT = "Alert"


@dataclass(frozen=True)
class KpiStatus:
    name: str
    met: bool
    observed: float
    bound: float


@dataclass(frozen=True)
class ComplianceVerdict:
    nsi_id: str
    window: tuple[float, float]
    statuses: tuple[KpiStatus, ...]
    overall: bool

    def to_doc(self) -> dict:
        return {
            "nsi_id": self.nsi_id,
            "window": list(self.window),
            "overall": self.overall,
            "statuses": [
                {"kpi": s.name, "met": s.met, "observed": s.observed, "bound": s.bound}
                for s in self.statuses
            ],
        }


@dataclass(frozen=True)
class AdaptationAction:
    kind: ActionKind
    nsi_id: str
    reason: str = ""
    trigger_windows: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class MonitorThresholds:
    violations_k: int = 2
    history_h: int = 3
    cooldown_windows: int = 3
    embb_throughput_factor: float = 0.95


@dataclass
class _SliceLoopState:
    history: list[ComplianceVerdict] = field(default_factory=list)
    cooldown: int = 0
    escalation: int = 0  # 0 none, 1 rehomed, 2 nest replaced


def evaluate(
    report: KpiReport,
    profile: ServiceProfile,
    embb_throughput_factor: float = 0.95,
) -> ComplianceVerdict:
    """Per-KPI comparison of one report window against the profile targets.

    Latency: p99 within the bound. Availability: at least the required
    reliability. Throughput: only enforced for eMBB profiles, at the
    configured fraction of the guaranteed bandwidth.
    """
    if report.empty:
        raise EmptyWindow(f"window {report.window_start}-{report.window_end} has no samples")
    reqs = profile.requirements
    statuses = []
    p99 = report.p99_latency_ms if report.p99_latency_ms is not None else float("inf")
    statuses.append(
        KpiStatus("latency", p99 <= reqs.latency_bound_ms, p99, reqs.latency_bound_ms)
    )
    statuses.append(
        KpiStatus(
            "availability",
            report.availability >= reqs.reliability,
            report.availability,
            reqs.reliability,
        )
    )
    if reqs.category is SliceCategory.EMBB:
        floor = embb_throughput_factor * reqs.bandwidth_mbps
        statuses.append(
            KpiStatus("throughput", report.throughput_mbps >= floor, report.throughput_mbps, floor)
        )
    overall = all(s.met for s in statuses)
    return ComplianceVerdict(
        nsi_id=report.nsi_id,
        window=(report.window_start, report.window_end),
        statuses=tuple(statuses),
        overall=overall,
    )


def decide_from(
    history: list[ComplianceVerdict],
    state: _SliceLoopState,
    thresholds: MonitorThresholds,
) -> AdaptationAction:
    """Pure decision step over the last H verdicts; mutates the loop state.

    Called once per closed window for the slice, after history has been
    appended. Cooldown decrements per window; the escalation level resets
    once a full healthy history accumulates.
    """
    nsi_id = history[-1].nsi_id
    recent = history[-thresholds.history_h :]
    if state.cooldown > 0:
        state.cooldown -= 1
        return AdaptationAction(ActionKind.NONE, nsi_id)
    if len(recent) == thresholds.history_h and all(v.overall for v in recent):
        state.escalation = 0
    violated = [v for v in recent if not v.overall]
    if len(violated) < thresholds.violations_k:
        return AdaptationAction(ActionKind.NONE, nsi_id)
    windows = tuple(v.window for v in violated)
    state.cooldown = thresholds.cooldown_windows
    if state.escalation == 0:
        state.escalation = 1
        return AdaptationAction(
            ActionKind.REHOME, nsi_id, "re-place off the degraded path", windows
        )
    if state.escalation == 1:
        state.escalation = 2
        return AdaptationAction(
            ActionKind.REPLACE_NEST, nsi_id, "relax slice template per policy", windows
        )
    return AdaptationAction(
        ActionKind.ALERT, nsi_id, "realization-level fixes exhausted", windows
    )


class MonitorOptimizer:
    """Consumes the simulator's report stream; one in-flight adaptation per slice."""

    def __init__(
        self,
        thresholds: MonitorThresholds,
        service_orch: ServiceOrchestrator,
        slice_orch: SliceOrchestrator,
        on_event: Callable[[str, dict], None] | None = None,
    ):
        self.thresholds = thresholds
        self.service_orch = service_orch
        self.slice_orch = slice_orch
        self.on_event = on_event
        self._states: dict[str, _SliceLoopState] = {}

    def _emit(self, kind: str, payload: dict) -> None:
        if self.on_event:
            self.on_event(kind, payload)

    def _profile_for(self, nsi_id: str) -> ServiceProfile | None:
        nsi = self.slice_orch.get(nsi_id)
        if nsi is None:
            return None
        return self.service_orch.profiles.get(nsi.nest.source_profile)

    def on_report(self, report: KpiReport) -> AdaptationAction | None:
        """Evaluate one window and, when the ladder fires, apply the action."""
        if report.empty:
            return None
        profile = self._profile_for(report.nsi_id)
        if profile is None:
            return None
        verdict = evaluate(report, profile, self.thresholds.embb_throughput_factor)
        self._emit("verdict", verdict.to_doc())

        nsi = self.slice_orch.get(report.nsi_id)
        if not verdict.overall and nsi is not None and nsi.state is SliceState.ACTIVE:
            self.slice_orch.mark_degraded(report.nsi_id, "KPI violation")
            profile.state = ProfileState.DEGRADED
        if verdict.overall and profile.state is ProfileState.DEGRADED and nsi is not None:
            if nsi.state is SliceState.ACTIVE:
                profile.state = ProfileState.PROVISIONED

        state = self._states.setdefault(report.nsi_id, _SliceLoopState())
        state.history.append(verdict)
        del state.history[: -max(self.thresholds.history_h, 8)]
        action = decide_from(state.history, state, self.thresholds)
        if action.kind is not ActionKind.NONE:
            self.apply(action)
        return action

    def apply(self, action: AdaptationAction) -> dict:
        """Route an adaptation through the orchestrators.

        Orchestrator failures degrade to Alert rather than propagate: the
        loop must never crash the pipeline it supervises.
        """
        nsi = self.slice_orch.get(action.nsi_id)
        outcome = {
            "action": action.kind.value,
            "nsi_id": action.nsi_id,
            "reason": action.reason,
            "trigger_windows": [list(w) for w in action.trigger_windows],
        }
        if nsi is None:
            outcome["result"] = "alert"
            outcome["detail"] = f"slice {action.nsi_id} no longer exists"
            self._emit("action", outcome)
            return outcome
        try:
            if action.kind is ActionKind.REHOME:
                avoid = frozenset(nsi.path)
                self.slice_orch.update(nsi.id, nsi.nest, avoid_links=avoid)
                outcome["result"] = "rehomed"
                outcome["new_path"] = list(self.slice_orch.get(nsi.id).path)
            elif action.kind is ActionKind.REPLACE_NEST:
                profile = self._profile_for(nsi.id)
                if profile is None:
                    raise GridSliceError(f"no profile for slice {nsi.id}")
                new_nest = self.service_orch.replacement_nest(profile, nsi.nest)
                avoid = frozenset(nsi.path)
                self.slice_orch.update(nsi.id, new_nest, avoid_links=avoid)
                outcome["result"] = "nest_replaced"
                outcome["gst"] = new_nest.gst_id
                outcome["isolation"] = new_nest.isolation
            else:
                outcome["result"] = "alert"
                outcome["detail"] = action.reason
        except GridSliceError as e:
            outcome["result"] = "alert"
            outcome["detail"] = str(e)
            logger.warning("adaptation for %s failed: %s", action.nsi_id, e)
        self._emit("action", outcome)
        return outcome

    # -- state serialization

    def to_state(self) -> dict:
        return {
            nsi_id: {
                "cooldown": st.cooldown,
                "escalation": st.escalation,
                "history": [v.to_doc() for v in st.history],
            }
            for nsi_id, st in sorted(self._states.items())
        }

    def restore_state(self, state: dict) -> None:
        self._states = {}
        for nsi_id, row in state.items():
            verdicts = [
                ComplianceVerdict(
                    nsi_id=v["nsi_id"],
                    window=(v["window"][0], v["window"][1]),
                    statuses=tuple(
                        KpiStatus(s["kpi"], s["met"], s["observed"], s["bound"])
                        for s in v["statuses"]
                    ),
                    overall=v["overall"],
                )
                for v in row["history"]
            ]
            self._states[nsi_id] = _SliceLoopState(
                history=verdicts,
                cooldown=row["cooldown"],
                escalation=row["escalation"],
            )
