"""Runtime shell: the one place all modules are wired together.

GridSliceSystem owns the orchestration command queue. Every mutation enters
through execute(), which serializes writes, appends a command event to the
log, and dispatches. Because execution is deterministic (simulated clock,
seeded RNG, no wall time in state), re-executing the logged commands against
a restored snapshot reproduces the live state exactly.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, replace

from . import intent_dsl
from .documents import canonical_json, load_builtin
from .errors import (
    ContradictoryClauses,
    GridSliceError,
    IntentSyntaxError,
    NoMatchingTemplate,
    NoSlaOnFile,
    SchemaError,
    UnknownId,
    UnknownUnitError,
    UntranslatableIntent,
    VersionMismatch,
)
from .events import EventLog, EventRecord
from .intent_dsl import RequirementCatalog, Stakeholder
from .mano import Nfvo, Vim
from .monitor import MonitorOptimizer, MonitorThresholds
from .service_orch import (
    CostWeights,
    ProfileState,
    ServiceOrchestrator,
    ServiceProfile,
    load_gst_catalog,
)
from .simulator import (
    FaultEvent,
    KpiReport,
    KpiSample,
    Scenario,
    Simulator,
    SourceClass,
    TrafficSource,
    load_scenario,
)
from .slice_orch import SliceOrchestrator, SliceState

logger = logging.getLogger(__name__)

SNAPSHOT_SCHEMA = "gridslice/snapshot/1"


@dataclass
class IntentRecord:
    id: str
    text: str
    stakeholder: str
    status: str  # active | rejected | failed | terminated
    stage: str = ""
    error: str | None = None
    profile_id: str | None = None
    nsi_id: str | None = None

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "stakeholder": self.stakeholder,
            "status": self.status,
            "stage": self.stage,
            "error": self.error,
            "profile_id": self.profile_id,
            "nsi_id": self.nsi_id,
        }


@dataclass(frozen=True)
class PipelineOutcome:
    ok: bool
    stage: str
    intent_id: str | None = None
    profile_id: str | None = None
    nsi_id: str | None = None
    error_type: str | None = None
    error: str | None = None
    feasible: bool | None = None
    feasibility_reason: str | None = None
    slice_type: str | None = None
    service_model: str | None = None

    def to_doc(self) -> dict:
        return {
            "ok": self.ok,
            "stage": self.stage,
            "intent_id": self.intent_id,
            "profile_id": self.profile_id,
            "nsi_id": self.nsi_id,
            "error_type": self.error_type,
            "error": self.error,
            "feasible": self.feasible,
            "feasibility_reason": self.feasibility_reason,
            "slice_type": self.slice_type,
            "service_model": self.service_model,
        }


@dataclass(frozen=True)
class SystemInputs:
    """The static documents a system is built from. A snapshot restores only
    against the same inputs."""

    config: dict
    topology: dict
    catalog: dict
    gst_catalog: dict
    slas: dict

    @classmethod
    def builtin(cls) -> "SystemInputs":
        return cls(
            config=load_builtin("config.yaml", "gridslice/config/1"),
            topology=load_builtin("topology.yaml", "gridslice/topology/1"),
            catalog=load_builtin("catalog.yaml", "gridslice/requirement-catalog/1"),
            gst_catalog=load_builtin("gst_catalog.yaml", "gridslice/gst-catalog/1"),
            slas=load_builtin("slas.yaml", "gridslice/sla-set/1"),
        )


class GridSliceSystem:
    def __init__(self, inputs: SystemInputs, seed: int = 0, log_sink=None):
        self.inputs = inputs
        self.seed = seed
        cfg = inputs.config
        mano_cfg = cfg.get("mano", {})
        mon_cfg = cfg.get("monitor", {})
        sim_cfg = cfg.get("sim", {})
        cost_cfg = cfg.get("selection_cost", {})

        self.lock = threading.RLock()
        self.log = EventLog(sink=log_sink)
        self.catalog = RequirementCatalog.from_document(inputs.catalog)
        self.sla_registry = _registry_from_doc(inputs.slas)
        self.vim = Vim.from_topology(inputs.topology)
        self.nfvo = Nfvo(
            chain_table=mano_cfg.get("chains"),
            vnf_profiles=mano_cfg.get("vnf_profiles"),
            demand_scaling=mano_cfg.get("demand_scaling"),
        )
        exhaustive_limit = int(mano_cfg.get("exhaustive_assignment_limit", 10000))
        self.service_orch = ServiceOrchestrator(
            load_gst_catalog(inputs.gst_catalog),
            self.nfvo,
            self.vim,
            CostWeights(
                cpu_weight=float(cost_cfg.get("cpu_weight", 1.0)),
                bandwidth_divisor=float(cost_cfg.get("bandwidth_divisor", 10.0)),
                dedicated_surcharge=float(cost_cfg.get("dedicated_surcharge", 0.2)),
            ),
            exhaustive_limit=exhaustive_limit,
        )
        self.slice_orch = SliceOrchestrator(
            self.vim,
            self.nfvo,
            clock=lambda: self.sim.clock,
            on_transition=self._on_slice_transition,
            exhaustive_limit=exhaustive_limit,
        )
        self.sim = Simulator(
            self.vim,
            self.slice_orch,
            seed=seed,
            window_s=float(cfg.get("window_s", 5.0)),
            jitter_max_ms=float(sim_cfg.get("jitter_max_ms", 0.5)),
            congestion_threshold=float(sim_cfg.get("congestion_threshold", 0.8)),
            congestion_factor_ms=float(sim_cfg.get("congestion_factor_ms", 50.0)),
            flisr_burst_count=int(sim_cfg.get("flisr_burst_count", 200)),
            flisr_burst_span_s=float(sim_cfg.get("flisr_burst_span_s", 0.05)),
            on_sample=self._on_sample if sim_cfg.get("log_samples", True) else None,
            on_report=self._on_report,
        )
        self.monitor = MonitorOptimizer(
            MonitorThresholds(
                violations_k=int(mon_cfg.get("violations_k", 2)),
                history_h=int(mon_cfg.get("history_h", 3)),
                cooldown_windows=int(mon_cfg.get("cooldown_windows", 3)),
                embb_throughput_factor=float(mon_cfg.get("embb_throughput_factor", 0.95)),
            ),
            self.service_orch,
            self.slice_orch,
            on_event=self._on_monitor_event,
        )

        self.intents: dict[str, IntentRecord] = {}
        self.kpi_history: dict[str, list[KpiReport]] = {}
        self.service_models: dict[str, dict] = {}
        self.scenario: Scenario | None = None
        self._scenario_doc: dict | None = None
        self._label_to_nsi: dict[str, str] = {}
        self._intent_seq = 0
        self._in_command = False
        self.model_dir: str | None = None  # when set, emitted models land here

    def _write_service_model(self, profile_id: str) -> None:
        if not self.model_dir:
            return
        from pathlib import Path

        target = Path(self.model_dir)
        target.mkdir(parents=True, exist_ok=True)
        stem = profile_id.replace("/", "_")
        model = self.service_models[profile_id]
        (target / f"{stem}.yaml").write_text(model["document"], encoding="utf-8")
        (target / f"{stem}.tree.txt").write_text(model["tree"], encoding="utf-8")

    # -- event hooks ---------------------------------------------------------

    def _on_slice_transition(self, nsi, old, new, reason):
        self.log.append(
            "slice",
            {
                "kind": "transition",
                "nsi_id": nsi.id,
                "from": old.value,
                "to": new.value,
                "reason": reason,
            },
            t=self.sim.clock,
        )

    def _on_sample(self, sample: KpiSample):
        self.log.append(
            "kpi",
            {
                "kind": "sample",
                "nsi_id": sample.nsi_id,
                "latency_ms": round(sample.latency_ms, 6),
                "delivered": sample.delivered,
            },
            t=sample.t,
        )

    def _on_report(self, report: KpiReport):
        self.kpi_history.setdefault(report.nsi_id, []).append(report)
        self.log.append("kpi", {"kind": "report", **report.to_doc()}, t=self.sim.clock)
        self.monitor.on_report(report)

    def _on_monitor_event(self, kind: str, payload: dict):
        category = "kpi" if kind == "verdict" else "action"
        self.log.append(category, {"kind": kind, **payload}, t=self.sim.clock)

    # -- command queue ---------------------------------------------------------

    def execute(self, command: str, args: dict):
        """Run a mutating command on the serialized queue.

        Top-level commands are appended to the event log before dispatch, so
        the log doubles as a replayable command journal.
        """
        with self.lock:
            handler = getattr(self, f"_cmd_{command}", None)
            if handler is None:
                raise UnknownId(f"unknown command {command!r}")
            top_level = not self._in_command
            if top_level:
                self.log.append(
                    _COMMAND_CATEGORY[command],
                    {"command": command, "args": args},
                    t=self.sim.clock,
                )
                self._in_command = True
            try:
                return handler(args)
            finally:
                if top_level:
                    self._in_command = False

    # -- intent pipeline -------------------------------------------------------

    def _cmd_submit_intent(self, args: dict) -> dict:
        outcome = self._run_pipeline(
            stakeholder=args["stakeholder"],
            text=args["text"],
            dry_run=bool(args.get("dry_run", False)),
        )
        return outcome.to_doc()

    def submit_intent(self, stakeholder: str, text: str, dry_run: bool = False) -> dict:
        """Parse, translate, validate, profile, select, check, and instantiate.

        Dry runs stop after the feasibility check and touch neither state nor
        the event log.
        """
        if dry_run:
            with self.lock:
                return self._run_pipeline(stakeholder, text, dry_run=True).to_doc()
        return self.execute("submit_intent", {"stakeholder": stakeholder, "text": text})

    def _run_pipeline(self, stakeholder: str, text: str, dry_run: bool) -> PipelineOutcome:
        def fail(stage: str, exc: Exception, intent_id=None) -> PipelineOutcome:
            if not dry_run:
                if intent_id and intent_id in self.intents:
                    rec = self.intents[intent_id]
                    rec.status = "rejected" if stage == "validate" else "failed"
                    rec.stage = stage
                    rec.error = str(exc)
                self.log.append(
                    "intent",
                    {
                        "kind": "failed",
                        "intent_id": intent_id,
                        "stage": stage,
                        "error_type": type(exc).__name__,
                        "error": str(exc),
                    },
                    t=self.sim.clock,
                )
            return PipelineOutcome(
                ok=False,
                stage=stage,
                intent_id=intent_id,
                error_type=type(exc).__name__,
                error=str(exc),
            )

        # parse
        try:
            ast = intent_dsl.parse_intent(text)
            try:
                submitted_as = Stakeholder[stakeholder.upper().replace("-", "_")]
            except KeyError:
                raise IntentSyntaxError(0, [s.name for s in Stakeholder], stakeholder)
            ast = replace(ast, stakeholder=submitted_as)
        except (IntentSyntaxError, UnknownUnitError) as e:
            return fail("parse", e)

        intent_id = None
        if not dry_run:
            self._intent_seq += 1
            intent_id = f"intent-{self._intent_seq:04d}"
            self.intents[intent_id] = IntentRecord(
                id=intent_id,
                text=text,
                stakeholder=ast.stakeholder.name,
                status="processing",
            )
            self.log.append(
                "intent",
                {
                    "kind": "accepted",
                    "intent_id": intent_id,
                    "stakeholder": ast.stakeholder.name,
                    "canonical": intent_dsl.render(ast),
                },
                t=self.sim.clock,
            )

        # translate
        try:
            reqs = intent_dsl.translate(ast, self.catalog, intent_id=intent_id)
        except (UntranslatableIntent, ContradictoryClauses) as e:
            return fail("translate", e, intent_id)

        # validate against SLAs
        try:
            result = self.sla_registry.validate(reqs, ast.stakeholder)
        except NoSlaOnFile as e:
            return fail("validate", e, intent_id)
        if not result.accepted:
            return fail(
                "validate",
                GridSliceError("; ".join(result.reasons)),
                intent_id,
            )
        if not dry_run:
            self.log.append(
                "sla",
                {
                    "kind": "validated",
                    "intent_id": intent_id,
                    "sla_id": result.sla_id,
                    "category": reqs.category.value,
                },
                t=self.sim.clock,
            )

        # service profile
        if dry_run:
            profile = ServiceProfile(
                id="dry-run/p0", requirements=reqs, customer_ref="dry-run"
            )
        else:
            profile = self.service_orch.build_service_profile(reqs)
            self.intents[intent_id].profile_id = profile.id
            self.log.append(
                "profile",
                {
                    "kind": "created",
                    "profile_id": profile.id,
                    "intent_id": intent_id,
                    "state": profile.state.name,
                    "gst_specs": {
                        "category": reqs.category.value,
                        "latency_bound_ms": reqs.latency_bound_ms,
                        "reliability": reqs.reliability,
                        "bandwidth_mbps": reqs.bandwidth_mbps,
                        "device_count": reqs.device_count,
                    },
                },
                t=self.sim.clock,
            )

        # NEST selection
        try:
            nest = self.service_orch.select_nest(profile)
        except NoMatchingTemplate as e:
            return fail("nest", e, intent_id)
        if not dry_run:
            self.log.append(
                "profile",
                {
                    "kind": "nest-selected",
                    "profile_id": profile.id,
                    "gst_id": nest.gst_id,
                    "slice_type": nest.slice_type.value,
                    "isolation": nest.isolation,
                },
                t=self.sim.clock,
            )

        # feasibility, with one isolation relaxation on failure
        try:
            verdict = self.service_orch.feasibility_check(
                profile, self.vim.snapshot(), nest
            )
            if not verdict.feasible and nest.isolation == "dedicated":
                relaxed = replace(nest, isolation="shared")
                retry = self.service_orch.feasibility_check(
                    profile, self.vim.snapshot(), relaxed
                )
                if retry.feasible:
                    nest, verdict = relaxed, retry
                    if not dry_run:
                        self.log.append(
                            "profile",
                            {
                                "kind": "isolation-relaxed",
                                "profile_id": profile.id,
                                "isolation": "shared",
                            },
                            t=self.sim.clock,
                        )
        except GridSliceError as e:
            return fail("feasibility", e, intent_id)

        if dry_run:
            return PipelineOutcome(
                ok=verdict.feasible,
                stage="feasibility",
                feasible=verdict.feasible,
                feasibility_reason=verdict.reason or None,
                slice_type=nest.slice_type.value,
            )
        if not verdict.feasible:
            return fail("feasibility", GridSliceError(verdict.reason), intent_id)

        profile.state = ProfileState.VALIDATED
        model = self.service_orch.emit_service_model(profile, nest)
        self.service_models[profile.id] = {
            "document": model.as_document(),
            "tree": model.as_tree(),
        }
        self._write_service_model(profile.id)
        self.log.append(
            "profile",
            {"kind": "service-model", "profile_id": profile.id},
            t=self.sim.clock,
        )

        # instantiate
        try:
            ingress = self.vim.resolve_attachment(reqs.endpoints[0], "ingress")
            egress = self.vim.resolve_attachment(reqs.endpoints[1], "egress")
            nsi = self.slice_orch.instantiate(nest, (ingress, egress))
        except GridSliceError as e:
            profile.state = ProfileState.RETIRED
            return fail("instantiate", e, intent_id)

        profile.state = ProfileState.PROVISIONED
        profile.nsi_id = nsi.id
        record = self.intents[intent_id]
        record.status = "active"
        record.stage = "instantiate"
        record.nsi_id = nsi.id
        return PipelineOutcome(
            ok=True,
            stage="instantiate",
            intent_id=intent_id,
            profile_id=profile.id,
            nsi_id=nsi.id,
            feasible=True,
            slice_type=nest.slice_type.value,
            service_model=self.service_models[profile.id]["document"],
        )

    # -- SLA commands -----------------------------------------------------------

    def _cmd_register_sla(self, args: dict) -> dict:
        from .sla import sla_from_doc

        sla = sla_from_doc(args["sla"])
        sla_id = self.sla_registry.register(sla)
        self.log.append(
            "sla", {"kind": "registered", "sla_id": sla_id}, t=self.sim.clock
        )
        return {"sla_id": sla_id}

    def _cmd_invalidate_sla(self, args: dict) -> dict:
        self.sla_registry.invalidate(args["sla_id"])
        self.log.append(
            "sla", {"kind": "invalidated", "sla_id": args["sla_id"]}, t=self.sim.clock
        )
        return {"sla_id": args["sla_id"]}

    # -- faults -----------------------------------------------------------------

    def _cmd_inject_fault(self, args: dict) -> dict:
        kind = args.get("kind")
        if kind not in ("link_degradation", "flisr_trigger", "source_scale"):
            raise SchemaError("kind", f"unknown fault kind {kind!r}")
        at_s = args.get("at_s")
        params = {k: v for k, v in args.items() if k not in ("kind", "at_s")}
        if kind == "link_degradation" and params.get("link") not in self.vim.links:
            from .errors import UnknownLink

            raise UnknownLink(f"no link {params.get('link')!r}")
        if at_s is not None and float(at_s) > self.sim.clock:
            self.sim.queue_fault(FaultEvent(at_s=float(at_s), kind=kind, params=params))
            status = "queued"
        else:
            self.sim._apply_fault_inline(kind, params)
            status = "applied"
        self.log.append(
            "mano",
            {"kind": "fault", "fault": kind, "status": status, "params": params,
             "at_s": at_s if at_s is None else float(at_s)},
            t=self.sim.clock,
        )
        return {"status": status, "kind": kind}

    # -- scenario ---------------------------------------------------------------

    def _cmd_load_scenario(self, args: dict) -> dict:
        doc = args["document"]
        scenario = load_scenario(doc)
        self.scenario = scenario
        self._scenario_doc = doc
        results = {}
        for intent in scenario.intents:
            outcome = self._run_pipeline(
                stakeholder=intent["stakeholder"], text=intent["text"], dry_run=False
            )
            if not outcome.ok:
                raise GridSliceError(
                    f"scenario intent {intent['label']!r} failed at "
                    f"{outcome.stage}: {outcome.error}"
                )
            results[intent["label"]] = outcome.nsi_id
            self._label_to_nsi[intent["label"]] = outcome.nsi_id
        for spec in scenario.sources:
            nsi_id = spec.get("nsi_id") or self._label_to_nsi.get(spec.get("slice_of"))
            if nsi_id is None:
                raise SchemaError("sources", f"unresolved slice for source {spec['id']}")
            source = TrafficSource(
                id=spec["id"],
                source_class=SourceClass(spec["class"]),
                attach=spec.get("attach", ""),
                nsi_id=nsi_id,
                slice_label=spec.get("slice_of"),
                rate_per_s=float(spec.get("rate_per_s", 0.0)),
                payload_bytes=int(spec.get("payload_bytes", 100)),
                meters=int(spec.get("meters", 0)),
                per_meter_interval_s=float(spec.get("per_meter_interval_s", 900.0)),
                start_s=float(spec.get("start_s", 0.0)),
            )
            self.sim.add_source(source)
        for fault in scenario.faults:
            self.sim.queue_fault(fault)
        return {"scenario": scenario.name, "slices": results}

    def _cmd_advance(self, args: dict) -> dict:
        until = float(args["until"])
        self.sim.advance(until)
        return {"clock": self.sim.clock}

    def _cmd_scale_ami(self, args: dict) -> dict:
        updated = self.sim.scale_ami(int(args["count"]), args.get("source"))
        self.log.append(
            "mano",
            {"kind": "scale-ami", "count": int(args["count"]), "sources": updated},
            t=self.sim.clock,
        )
        return {"sources": updated}

    def run_loaded_scenario(self) -> dict:
        """Advance through the loaded scenario's full duration."""
        if self.scenario is None:
            raise GridSliceError("no scenario loaded")
        return self.execute("advance", {"until": self.scenario.duration_s})

    # -- queries ------------------------------------------------------------------

    def list_intents(self) -> list[dict]:
        with self.lock:
            return [r.to_doc() for r in sorted(self.intents.values(), key=lambda r: r.id)]

    def list_slices(self) -> list[dict]:
        with self.lock:
            return [self._slice_doc(s) for s in sorted(
                self.slice_orch.slices.values(), key=lambda s: s.id
            )]

    def get_slice(self, nsi_id: str) -> dict:
        with self.lock:
            nsi = self.slice_orch.get(nsi_id)
            if nsi is None:
                raise UnknownId(f"no slice {nsi_id!r}")
            return self._slice_doc(nsi)

    def _slice_doc(self, nsi) -> dict:
        from .mano import path_latency

        doc = {
            "id": nsi.id,
            "state": nsi.state.value,
            "slice_type": nsi.nest.slice_type.value,
            "gst_id": nsi.nest.gst_id,
            "profile_id": nsi.nest.source_profile,
            "isolation": nsi.nest.isolation,
            "max_latency_ms": nsi.nest.max_latency_ms,
            "bandwidth_mbps": nsi.nest.guaranteed_bandwidth_mbps,
            "endpoints": list(nsi.endpoints),
            "vnf_chain": list(nsi.vnf_chain),
            "path": list(nsi.path),
            "node_allocations": [
                {"node": n, "cpu": d.cpu, "memory_mb": d.memory_mb}
                for n, d in nsi.node_allocations
            ],
            "link_allocations": [
                {"link": l, "bandwidth_mbps": bw} for l, bw in nsi.link_allocations
            ],
            "created_at": nsi.created_at,
            "updated_at": nsi.updated_at,
            "failure_reason": nsi.failure_reason,
        }
        if nsi.path:
            doc["current_path_latency_ms"] = path_latency(self.vim, nsi.path)
        return doc

    def get_kpi(self, nsi_id: str, start: float | None = None, end: float | None = None) -> list[dict]:
        with self.lock:
            if nsi_id not in self.kpi_history and self.slice_orch.get(nsi_id) is None:
                raise UnknownId(f"no slice {nsi_id!r}")
            reports = self.kpi_history.get(nsi_id, [])
            out = []
            for r in reports:
                if start is not None and r.window_end <= start:
                    continue
                if end is not None and r.window_start >= end:
                    continue
                out.append(r.to_doc())
            return out

    def events_after(self, seq: int, limit: int | None = None) -> list[EventRecord]:
        with self.lock:
            return self.log.after(seq, limit)

    def list_profiles(self) -> list[dict]:
        with self.lock:
            return [
                {
                    "id": p.id,
                    "intent_id": p.customer_ref,
                    "state": p.state.name,
                    "nsi_id": p.nsi_id,
                    "category": p.requirements.category.value,
                }
                for p in sorted(self.service_orch.profiles.values(), key=lambda p: p.id)
            ]

    def get_service_model(self, profile_id: str) -> dict:
        with self.lock:
            if profile_id not in self.service_models:
                raise UnknownId(f"no service model for profile {profile_id!r}")
            return self.service_models[profile_id]

    # -- snapshot / restore / replay ------------------------------------------------

    def snapshot_doc(self) -> dict:
        with self.lock:
            return {
                "schema": SNAPSHOT_SCHEMA,
                "version": self.log.last_seq,
                "seed": self.seed,
                "counters": {
                    "intent_seq": self._intent_seq,
                    "label_to_nsi": dict(sorted(self._label_to_nsi.items())),
                },
                "intents": [
                    r.to_doc() for r in sorted(self.intents.values(), key=lambda r: r.id)
                ],
                "slas": self.sla_registry.to_state(),
                "service_orch": self.service_orch.to_state(),
                "slice_orch": self.slice_orch.to_state(),
                "vim": self.vim.to_state(),
                "monitor": self.monitor.to_state(),
                "sim": self.sim.to_state(),
                "kpi_history": {
                    nsi_id: [r.to_doc() for r in reports]
                    for nsi_id, reports in sorted(self.kpi_history.items())
                },
                "service_models": dict(sorted(self.service_models.items())),
                "scenario_doc": self._scenario_doc,
            }

    def snapshot_json(self) -> str:
        return canonical_json(self.snapshot_doc())

    def restore(self, doc: dict) -> int:
        """Load a snapshot into this system. Only valid against the same
        static inputs (config, topology, catalogs, SLA set) it was taken with."""
        if doc.get("schema") != SNAPSHOT_SCHEMA:
            raise VersionMismatch(
                f"cannot restore snapshot schema {doc.get('schema')!r}; "
                f"this build restores {SNAPSHOT_SCHEMA}"
            )
        with self.lock:
            self.seed = doc["seed"]
            self._intent_seq = doc["counters"]["intent_seq"]
            self._label_to_nsi = dict(doc["counters"]["label_to_nsi"])
            self.intents = {
                row["id"]: IntentRecord(
                    id=row["id"],
                    text=row["text"],
                    stakeholder=row["stakeholder"],
                    status=row["status"],
                    stage=row["stage"],
                    error=row["error"],
                    profile_id=row["profile_id"],
                    nsi_id=row["nsi_id"],
                )
                for row in doc["intents"]
            }
            from .sla import SlaRegistry

            self.sla_registry = SlaRegistry.from_state(doc["slas"])
            self.vim = Vim.from_state(doc["vim"])
            # re-point every component at the restored ledger
            self.service_orch.vim = self.vim
            self.service_orch.restore_state(doc["service_orch"])
            self.slice_orch.vim = self.vim
            self.slice_orch.restore_state(doc["slice_orch"])
            self.sim.vim = self.vim
            self.sim.restore_state(doc["sim"])
            self.monitor.restore_state(doc["monitor"])
            self.kpi_history = {
                nsi_id: [
                    KpiReport(
                        nsi_id=r["nsi_id"],
                        window_start=r["window_start"],
                        window_end=r["window_end"],
                        sent=r["sent"],
                        delivered=r["delivered"],
                        p99_latency_ms=r["p99_latency_ms"],
                        loss_rate=r["loss_rate"],
                        throughput_mbps=r["throughput_mbps"],
                        availability=r["availability"],
                        deadline_miss_rate=r["deadline_miss_rate"],
                        empty=r["empty"],
                    )
                    for r in reports
                ]
                for nsi_id, reports in doc["kpi_history"].items()
            }
            self.service_models = dict(doc["service_models"])
            self._scenario_doc = doc["scenario_doc"]
            self.scenario = (
                load_scenario(self._scenario_doc) if self._scenario_doc else None
            )
            self.log = EventLog(sink=self.log.sink, base_seq=doc["version"])
            return doc["version"]

    def replay_events(self, records: list[EventRecord]) -> int:
        """Re-execute the command events from a log suffix; informational
        events regenerate deterministically as side effects."""
        count = 0
        for record in records:
            payload = record.payload
            if "command" in payload:
                self.execute(payload["command"], payload["args"])
                count += 1
        return count

    # -- invariants ------------------------------------------------------------------

    def check_invariants(self) -> list[str]:
        """Cross-module consistency checks; empty list means healthy."""
        problems: list[str] = []
        try:
            self.vim.assert_consistent()
        except AssertionError as e:
            problems.append(f"ledger inconsistency at {e}")
        seqs = [r.seq for r in self.log.records]
        expect = list(range(self.log.base_seq + 1, self.log.base_seq + len(seqs) + 1))
        if seqs != expect:
            problems.append("event log sequence numbers are not gapless")
        for nsi in self.slice_orch.slices.values():
            if nsi.state is SliceState.TERMINATED:
                if nsi.vnf_chain or nsi.node_allocations or nsi.link_allocations:
                    problems.append(f"{nsi.id}: terminated with residual allocations")
            if nsi.state is SliceState.ACTIVE:
                for inst_id in nsi.vnf_chain:
                    if inst_id not in self.vim.instances:
                        problems.append(f"{nsi.id}: chain instance {inst_id} missing")
        return problems


_COMMAND_CATEGORY = {
    "submit_intent": "intent",
    "register_sla": "sla",
    "invalidate_sla": "sla",
    "inject_fault": "mano",
    "load_scenario": "action",
    "advance": "action",
    "scale_ami": "mano",
}


def _registry_from_doc(doc: dict):
    from .sla import SlaRegistry, sla_from_doc

    registry = SlaRegistry()
    for row in doc.get("slas", []):
        registry.register(sla_from_doc(row))
    return registry


def build_system(
    config_path: str | None = None,
    topology_path: str | None = None,
    catalog_path: str | None = None,
    gst_path: str | None = None,
    slas_path: str | None = None,
    seed: int = 0,
    log_sink=None,
) -> GridSliceSystem:
    """Assemble a system from document paths, defaulting to the packaged files."""
    from .documents import load_document

    inputs = SystemInputs.builtin()
    if config_path:
        inputs = replace(inputs, config=load_document(config_path, "gridslice/config/1"))
    if topology_path:
        inputs = replace(
            inputs, topology=load_document(topology_path, "gridslice/topology/1")
        )
    if catalog_path:
        inputs = replace(
            inputs, catalog=load_document(catalog_path, "gridslice/requirement-catalog/1")
        )
    if gst_path:
        inputs = replace(inputs, gst_catalog=load_document(gst_path, "gridslice/gst-catalog/1"))
    if slas_path:
        inputs = replace(inputs, slas=load_document(slas_path, "gridslice/sla-set/1"))
    return GridSliceSystem(inputs, seed=seed, log_sink=log_sink)
