"""Deterministic discrete-event simulator for distribution grid traffic.

Traffic sources (PMU streams, protection bursts, meter reads, inspection
video) emit messages over their bound slices. Per-message latency is the
slice's placed-path latency plus a queueing term: seeded jitter plus a
penalty once the bottleneck-link utilization crosses a threshold. Messages
drop with the path's composite loss probability.

The core is single-threaded and fully determined by (scenario, seed): the
event loop picks the next event by scanning source cursors, queued faults,
and window boundaries with a fixed tie order (faults, then window closes,
then messages), so equal runs produce byte-identical sample streams and the
whole state serializes for snapshot/restore.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import SchemaError, UnboundSource
from .mano import Vim, path_latency, path_loss_prob
from .slice_orch import NetworkSliceInstance, SliceOrchestrator

INF = math.inf


class SourceClass(Enum):
    PMU_WAMS = "PMU_WAMS"
    PROTECTION_FLISR = "PROTECTION_FLISR"
    AMI_METER = "AMI_METER"
    INSPECTION_VIDEO = "INSPECTION_VIDEO"


# Per-class traffic defaults; every field is overridable in the scenario.
CLASS_DEFAULTS: dict[SourceClass, dict] = {
    SourceClass.PMU_WAMS: {"rate_per_s": 50.0, "payload_bytes": 200},
    SourceClass.PROTECTION_FLISR: {"rate_per_s": 0.0, "payload_bytes": 100},
    SourceClass.AMI_METER: {
        "payload_bytes": 150,
        "meters": 10000,
        "per_meter_interval_s": 900.0,
    },
    SourceClass.INSPECTION_VIDEO: {"rate_per_s": 2232.14, "payload_bytes": 1400},
}


@dataclass
class TrafficSource:
    id: str
    source_class: SourceClass
    attach: str
    nsi_id: str | None = None
    slice_label: str | None = None  # intent label, resolved to nsi_id at bind
    rate_per_s: float = 0.0
    payload_bytes: int = 100
    meters: int = 0
    per_meter_interval_s: float = 900.0
    start_s: float = 0.0
    # runtime cursors
    next_t: float = INF
    seq: int = 0

    def effective_rate(self) -> float:
        if self.source_class is SourceClass.AMI_METER:
            return self.meters / self.per_meter_interval_s
        return self.rate_per_s

    def offered_mbps(self) -> float:
        return self.effective_rate() * self.payload_bytes * 8.0 / 1e6


@dataclass(frozen=True)
class FaultEvent:
    at_s: float
    kind: str  # link_degradation | flisr_trigger | source_scale
    params: dict


@dataclass(frozen=True)
class Scenario:
    name: str
    duration_s: float
    intents: list[dict]  # {label, stakeholder, text}
    sources: list[dict]  # raw source specs, class defaults already applied
    faults: list[FaultEvent]
    topology: str | None = None
    seed: int | None = None


@dataclass(frozen=True)
class KpiSample:
    t: float
    nsi_id: str
    latency_ms: float
    delivered: bool


@dataclass(frozen=True)
class KpiReport:
    nsi_id: str
    window_start: float
    window_end: float
    sent: int
    delivered: int
    p99_latency_ms: float | None
    loss_rate: float
    throughput_mbps: float
    availability: float
    deadline_miss_rate: float | None = None
    empty: bool = False

    def to_doc(self) -> dict:
        return {
            "nsi_id": self.nsi_id,
            "window_start": self.window_start,
            "window_end": self.window_end,
            "sent": self.sent,
            "delivered": self.delivered,
            "p99_latency_ms": self.p99_latency_ms,
            "loss_rate": self.loss_rate,
            "throughput_mbps": self.throughput_mbps,
            "availability": self.availability,
            "deadline_miss_rate": self.deadline_miss_rate,
            "empty": self.empty,
        }


def percentile(sorted_values: list[float], q: float) -> float:
    """Linear-interpolation percentile over an already sorted list."""
    if not sorted_values:
        raise ValueError("empty sample set")
    if len(sorted_values) == 1:
        return sorted_values[0]
    rank = q * (len(sorted_values) - 1)
    lo = int(math.floor(rank))
    hi = int(math.ceil(rank))
    if lo == hi:
        return sorted_values[lo]
    frac = rank - lo
    return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac


# --- scenario loading ---------------------------------------------------------

def load_scenario(doc: dict) -> Scenario:
    """Validate a scenario document; SchemaError points at the offending path."""
    if doc.get("schema") != "gridslice/scenario/1":
        raise SchemaError("schema", f"expected gridslice/scenario/1, got {doc.get('schema')!r}")
    duration = doc.get("duration_s")
    if not isinstance(duration, (int, float)) or duration <= 0:
        raise SchemaError("duration_s", "duration must be a positive number")

    intents = []
    labels = set()
    for i, row in enumerate(doc.get("intents", [])):
        if "text" not in row:
            raise SchemaError(f"intents[{i}].text", "intent text required")
        label = row.get("label", f"intent-{i}")
        if label in labels:
            raise SchemaError(f"intents[{i}].label", f"duplicate label {label!r}")
        labels.add(label)
        intents.append(
            {
                "label": label,
                "stakeholder": row.get("stakeholder", "DSO"),
                "text": row["text"],
            }
        )

    sources = []
    for i, row in enumerate(doc.get("sources", [])):
        path = f"sources[{i}]"
        if "id" not in row:
            raise SchemaError(f"{path}.id", "source id required")
        try:
            source_class = SourceClass(row.get("class", ""))
        except ValueError:
            raise SchemaError(f"{path}.class", f"unknown source class {row.get('class')!r}")
        if "slice_of" not in row and "nsi_id" not in row:
            raise SchemaError(f"{path}.slice_of", "source must bind to a slice")
        if "slice_of" in row and row["slice_of"] not in labels:
            raise SchemaError(f"{path}.slice_of", f"unknown intent label {row['slice_of']!r}")
        merged = dict(CLASS_DEFAULTS[source_class])
        merged.update(row)
        merged["class"] = source_class.value
        rate = merged.get("rate_per_s", 0.0)
        if source_class is not SourceClass.PROTECTION_FLISR and source_class is not SourceClass.AMI_METER:
            if rate <= 0:
                raise SchemaError(f"{path}.rate_per_s", "rate must be > 0")
        sources.append(merged)

    faults = []
    for i, row in enumerate(doc.get("faults", [])):
        path = f"faults[{i}]"
        at_s = row.get("at_s")
        if not isinstance(at_s, (int, float)) or at_s < 0:
            raise SchemaError(f"{path}.at_s", "fault time must be a number >= 0")
        kind = row.get("kind")
        if kind not in ("link_degradation", "flisr_trigger", "source_scale"):
            raise SchemaError(f"{path}.kind", f"unknown fault kind {kind!r}")
        params = {k: v for k, v in row.items() if k not in ("at_s", "kind")}
        faults.append(FaultEvent(at_s=float(at_s), kind=kind, params=params))
    faults.sort(key=lambda f: f.at_s)

    return Scenario(
        name=doc.get("name", "scenario"),
        duration_s=float(duration),
        intents=intents,
        sources=sources,
        faults=faults,
        topology=doc.get("topology"),
        seed=doc.get("seed"),
    )


# --- simulator ----------------------------------------------------------------

@dataclass
class _WindowAcc:
    latencies: list[float] = field(default_factory=list)
    sent: int = 0
    delivered: int = 0
    bytes_delivered: int = 0
    burst_total: int = 0
    burst_miss: int = 0


class Simulator:
    def __init__(
        self,
        vim: Vim,
        slice_orch: SliceOrchestrator,
        *,
        seed: int = 0,
        window_s: float = 5.0,
        jitter_max_ms: float = 0.5,
        congestion_threshold: float = 0.8,
        congestion_factor_ms: float = 50.0,
        flisr_burst_count: int = 200,
        flisr_burst_span_s: float = 0.05,
        on_sample: Callable[[KpiSample], None] | None = None,
        on_report: Callable[[KpiReport], None] | None = None,
    ):
        self.vim = vim
        self.slice_orch = slice_orch
        self.rng = random.Random(seed)
        self.window_s = window_s
        self.jitter_max_ms = jitter_max_ms
        self.congestion_threshold = congestion_threshold
        self.congestion_factor_ms = congestion_factor_ms
        self.flisr_burst_count = flisr_burst_count
        self.flisr_burst_span_s = flisr_burst_span_s
        self.on_sample = on_sample
        self.on_report = on_report

        self.clock = 0.0
        self.window_index = 0
        self.sources: dict[str, TrafficSource] = {}
        self.faults: list[FaultEvent] = []
        self._fault_applied: list[bool] = []
        # Expanded FLISR bursts: (t, source id, deadline ms), time-ordered.
        self.bursts: list[tuple[float, str, float]] = []
        self.burst_ptr = 0
        self.acc: dict[str, _WindowAcc] = {}

    # -- wiring

    def add_source(self, source: TrafficSource) -> None:
        if source.nsi_id is None:
            raise UnboundSource(f"source {source.id} has no slice binding")
        nsi = self._resolve(source.nsi_id, source.id)
        self.sources[source.id] = source
        self.acc.setdefault(nsi.id, _WindowAcc())
        rate = source.effective_rate()
        if rate > 0:
            source.next_t = max(self.clock, source.start_s) + self._interval(source, rate)
        else:
            source.next_t = INF

    def queue_fault(self, fault: FaultEvent) -> None:
        """Insert a timed fault, keeping the pending suffix time-ordered."""
        if fault.at_s < self.clock:
            raise SchemaError("at_s", f"fault time {fault.at_s} is in the past")
        insert_at = len(self.faults)
        for i in range(self._next_fault_index(), len(self.faults)):
            if self.faults[i].at_s > fault.at_s:
                insert_at = i
                break
        self.faults.insert(insert_at, fault)
        self._fault_applied.insert(insert_at, False)

    def _next_fault_index(self) -> int:
        for i, applied in enumerate(self._fault_applied):
            if not applied:
                return i
        return len(self.faults)

    def _resolve(self, nsi_id: str, source_id: str) -> NetworkSliceInstance:
        nsi = self.slice_orch.get(nsi_id)
        if nsi is None or not nsi.carries_traffic():
            state = nsi.state.value if nsi else "missing"
            raise UnboundSource(f"source {source_id}: slice {nsi_id} is {state}")
        return nsi

    def _interval(self, source: TrafficSource, rate: float) -> float:
        if source.source_class is SourceClass.AMI_METER:
            return self.rng.expovariate(rate)
        return 1.0 / rate

    # -- traffic operations

    def trigger_flisr(self, at_s: float, source_id: str) -> int:
        """Expand a protection burst: N messages inside the burst span, each
        carrying the slice's latency bound as its delivery deadline."""
        source = self.sources.get(source_id)
        if source is None:
            raise UnboundSource(f"no source {source_id!r}")
        nsi = self._resolve(source.nsi_id or "", source_id)
        if nsi.nest.slice_type.value != "URLLC":
            raise UnboundSource(
                f"source {source_id}: FLISR burst requires a URLLC slice, "
                f"bound to {nsi.nest.slice_type.value}"
            )
        deadline = nsi.nest.max_latency_ms
        n = self.flisr_burst_count
        span = self.flisr_burst_span_s
        new = [(at_s + span * (i + 0.5) / n, source_id, deadline) for i in range(n)]
        pending = self.bursts[self.burst_ptr :]
        done = self.bursts[: self.burst_ptr]
        self.bursts = done + sorted(pending + new)
        return n

    def scale_ami(self, count: int, source_id: str | None = None) -> list[str]:
        """Set the meter population; aggregate load scales linearly."""
        if count < 1:
            raise SchemaError("count", "meter count must be >= 1")
        updated = []
        for source in sorted(self.sources.values(), key=lambda s: s.id):
            if source.source_class is not SourceClass.AMI_METER:
                continue
            if source_id is not None and source.id != source_id:
                continue
            source.meters = count
            if source.next_t is INF and source.effective_rate() > 0:
                source.next_t = max(self.clock, source.start_s) + self._interval(
                    source, source.effective_rate()
                )
            updated.append(source.id)
        if source_id is not None and not updated:
            raise UnboundSource(f"no AMI source {source_id!r}")
        return updated

    # -- load model

    def _link_offered_mbps(self) -> dict[str, float]:
        offered: dict[str, float] = {}
        for source in self.sources.values():
            if source.nsi_id is None:
                continue
            nsi = self.slice_orch.get(source.nsi_id)
            if nsi is None or not nsi.carries_traffic():
                continue
            load = source.offered_mbps()
            for link_id in nsi.path:
                offered[link_id] = offered.get(link_id, 0.0) + load
        return offered

    def _queueing_ms(self, path: tuple[str, ...]) -> float:
        jitter = self.rng.uniform(0.0, self.jitter_max_ms)
        if not path:
            return jitter
        offered = self._link_offered_mbps()
        util = max(
            offered.get(link_id, 0.0) / self.vim.links[link_id].capacity_bw
            for link_id in path
        )
        penalty = max(0.0, util - self.congestion_threshold) * self.congestion_factor_ms
        return jitter + penalty

    def _slice_processing_ms(self, nsi: NetworkSliceInstance) -> float:
        total = 0.0
        for inst_id in nsi.vnf_chain:
            inst = self.vim.instances.get(inst_id)
            if inst is None:
                continue
            desc = self.slice_orch.nfvo.descriptors.get(inst.vnf_type)
            if desc is not None:
                total += desc.processing_latency_ms
        return total

    # -- event loop

    def advance(self, until: float) -> None:
        """Run the event loop up to simulation time `until` (inclusive of
        events at exactly `until`, windows closing first)."""
        while True:
            event = self._next_event()
            if event is None or event[0] > until:
                break
            t, _prio, _key, kind, payload = event
            self.clock = t
            if kind == "fault":
                self._apply_fault(payload)
            elif kind == "window":
                self._close_window()
            elif kind == "message":
                self._emit_message(payload, burst_deadline=None)
            elif kind == "burst":
                self.burst_ptr += 1
                src = self.sources[payload[1]]
                self._send(src, t, deadline=payload[2])
        if until > self.clock:
            self.clock = until

    def _next_event(self):
        """(t, priority, tiebreak, kind, payload) of the earliest pending event.

        Priorities: faults before window closes before messages, so a fault
        at t affects messages at t, and a window [a, b) excludes samples at b.
        """
        best = None
        idx = self._next_fault_index()
        if idx < len(self.faults):
            f = self.faults[idx]
            best = (f.at_s, 0, "", "fault", idx)
        boundary = (self.window_index + 1) * self.window_s
        cand = (boundary, 1, "", "window", None)
        if best is None or cand[:3] < best[:3]:
            best = cand
        for source in sorted(self.sources.values(), key=lambda s: s.id):
            if source.next_t is INF:
                continue
            cand = (source.next_t, 2, "0:" + source.id, "message", source.id)
            if best is None or cand[:3] < best[:3]:
                best = cand
        if self.burst_ptr < len(self.bursts):
            b = self.bursts[self.burst_ptr]
            cand = (b[0], 2, "1:" + b[1], "burst", b)
            if best is None or cand[:3] < best[:3]:
                best = cand
        return best

    def _apply_fault(self, index: int) -> None:
        fault = self.faults[index]
        self._fault_applied[index] = True
        self._apply_fault_inline(fault.kind, fault.params, at_s=fault.at_s)

    def _apply_fault_inline(self, kind: str, params: dict, at_s: float | None = None) -> None:
        if kind == "link_degradation":
            self.vim.inject_link_degradation(
                params["link"],
                float(params.get("extra_latency_ms", 0.0)),
                float(params.get("loss_prob", 0.0)),
            )
        elif kind == "flisr_trigger":
            self.trigger_flisr(self.clock if at_s is None else at_s, params["source"])
        elif kind == "source_scale":
            self.scale_ami(int(params["count"]), params.get("source"))

    def _emit_message(self, source_id: str, burst_deadline: float | None) -> None:
        source = self.sources[source_id]
        t = source.next_t
        rate = source.effective_rate()
        source.next_t = t + self._interval(source, rate) if rate > 0 else INF
        self._send(source, t, deadline=burst_deadline)

    def _send(self, source: TrafficSource, t: float, deadline: float | None) -> None:
        nsi = self._resolve(source.nsi_id or "", source.id)
        base = path_latency(self.vim, nsi.path) + self._slice_processing_ms(nsi)
        latency = base + self._queueing_ms(nsi.path)
        dropped = self.rng.random() < path_loss_prob(self.vim, nsi.path)
        source.seq += 1

        acc = self.acc.setdefault(nsi.id, _WindowAcc())
        acc.sent += 1
        if not dropped:
            acc.delivered += 1
            acc.bytes_delivered += source.payload_bytes
            acc.latencies.append(latency)
        if deadline is not None:
            acc.burst_total += 1
            if dropped or latency > deadline:
                acc.burst_miss += 1
        if self.on_sample:
            self.on_sample(KpiSample(t, nsi.id, latency, not dropped))

    def _close_window(self) -> None:
        start = self.window_index * self.window_s
        end = start + self.window_s
        self.window_index += 1
        for nsi_id in sorted(self.acc):
            acc = self.acc[nsi_id]
            report = self._report(nsi_id, acc, start, end)
            self.acc[nsi_id] = _WindowAcc()
            if self.on_report:
                self.on_report(report)

    def _report(self, nsi_id: str, acc: _WindowAcc, start: float, end: float) -> KpiReport:
        if acc.sent == 0:
            return KpiReport(
                nsi_id=nsi_id,
                window_start=start,
                window_end=end,
                sent=0,
                delivered=0,
                p99_latency_ms=None,
                loss_rate=0.0,
                throughput_mbps=0.0,
                availability=0.0,
                empty=True,
            )
        p99 = percentile(sorted(acc.latencies), 0.99) if acc.latencies else None
        miss_rate = acc.burst_miss / acc.burst_total if acc.burst_total else None
        return KpiReport(
            nsi_id=nsi_id,
            window_start=start,
            window_end=end,
            sent=acc.sent,
            delivered=acc.delivered,
            p99_latency_ms=p99,
            loss_rate=(acc.sent - acc.delivered) / acc.sent,
            throughput_mbps=acc.bytes_delivered * 8.0 / (end - start) / 1e6,
            availability=acc.delivered / acc.sent,
            deadline_miss_rate=miss_rate,
        )

    # -- state serialization

    def to_state(self) -> dict:
        rng_state = self.rng.getstate()
        return {
            "clock": self.clock,
            "window_index": self.window_index,
            "sources": [
                {
                    "id": s.id,
                    "class": s.source_class.value,
                    "attach": s.attach,
                    "nsi_id": s.nsi_id,
                    "slice_label": s.slice_label,
                    "rate_per_s": s.rate_per_s,
                    "payload_bytes": s.payload_bytes,
                    "meters": s.meters,
                    "per_meter_interval_s": s.per_meter_interval_s,
                    "start_s": s.start_s,
                    "next_t": None if s.next_t is INF else s.next_t,
                    "seq": s.seq,
                }
                for s in sorted(self.sources.values(), key=lambda s: s.id)
            ],
            "faults": [
                {"at_s": f.at_s, "kind": f.kind, "params": f.params, "applied": a}
                for f, a in zip(self.faults, self._fault_applied)
            ],
            "bursts": [[t, sid, d] for t, sid, d in self.bursts],
            "burst_ptr": self.burst_ptr,
            "acc": {
                nsi_id: {
                    "latencies": list(a.latencies),
                    "sent": a.sent,
                    "delivered": a.delivered,
                    "bytes_delivered": a.bytes_delivered,
                    "burst_total": a.burst_total,
                    "burst_miss": a.burst_miss,
                }
                for nsi_id, a in sorted(self.acc.items())
            },
            "rng": [rng_state[0], list(rng_state[1]), rng_state[2]],
        }

    def restore_state(self, state: dict) -> None:
        self.clock = state["clock"]
        self.window_index = state["window_index"]
        self.sources = {}
        for row in state["sources"]:
            src = TrafficSource(
                id=row["id"],
                source_class=SourceClass(row["class"]),
                attach=row["attach"],
                nsi_id=row["nsi_id"],
                slice_label=row["slice_label"],
                rate_per_s=row["rate_per_s"],
                payload_bytes=row["payload_bytes"],
                meters=row["meters"],
                per_meter_interval_s=row["per_meter_interval_s"],
                start_s=row["start_s"],
                next_t=INF if row["next_t"] is None else row["next_t"],
                seq=row["seq"],
            )
            self.sources[src.id] = src
        self.faults = [
            FaultEvent(at_s=row["at_s"], kind=row["kind"], params=row["params"])
            for row in state["faults"]
        ]
        self._fault_applied = [row["applied"] for row in state["faults"]]
        self.bursts = [(b[0], b[1], b[2]) for b in state["bursts"]]
        self.burst_ptr = state["burst_ptr"]
        self.acc = {}
        for nsi_id, row in state["acc"].items():
            acc = _WindowAcc(
                latencies=list(row["latencies"]),
                sent=row["sent"],
                delivered=row["delivered"],
                bytes_delivered=row["bytes_delivered"],
                burst_total=row["burst_total"],
                burst_miss=row["burst_miss"],
            )
            self.acc[nsi_id] = acc
        rng = state["rng"]
        self.rng.setstate((rng[0], tuple(rng[1]), rng[2]))
