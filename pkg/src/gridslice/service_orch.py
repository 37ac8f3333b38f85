"""Service orchestration: profiles, slice template selection, feasibility,
and service model emission.

A validated requirement set becomes a Draft service profile; the profile
picks the cheapest admitting template from the GST catalog and instantiates
it as a NEST; a dry-run placement over a fresh resource snapshot decides
feasibility before anything is committed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

from .documents import dump_document
from .errors import NoMatchingTemplate, StaleSnapshot
from .intent_dsl import ServiceRequirementSet, SliceCategory
from .mano import Nfvo, ResourceSnapshot, Vim, place_chain
from .errors import NoFeasiblePlacement


class ProfileState(IntEnum):
    DRAFT = 0
    VALIDATED = 1
    PROVISIONED = 2
    DEGRADED = 3
    RETIRED = 4


@dataclass(frozen=True)
class GstTemplate:
    id: str
    slice_type: SliceCategory
    max_latency_ms: float  # lowest latency bound the template can promise
    min_reliability: float  # highest reliability it can promise
    guaranteed_bandwidth_mbps: float  # largest bandwidth it can guarantee
    max_device_density: int
    isolation: str  # shared | dedicated
    cpu_units: float  # cost basis

    def admits(self, reqs: ServiceRequirementSet) -> bool:
        return (
            self.slice_type == reqs.category
            and self.max_latency_ms <= reqs.latency_bound_ms
            and self.min_reliability >= reqs.reliability
            and self.guaranteed_bandwidth_mbps >= reqs.bandwidth_mbps
            and self.max_device_density >= reqs.device_count
        )


@dataclass(frozen=True)
class Nest:
    """Network-agnostic slice template with every attribute bound."""

    gst_id: str
    slice_type: SliceCategory
    max_latency_ms: float
    min_reliability: float
    guaranteed_bandwidth_mbps: float
    max_device_density: int
    isolation: str
    source_profile: str


@dataclass
class ServiceProfile:
    id: str
    requirements: ServiceRequirementSet
    customer_ref: str  # originating intent id
    state: ProfileState = ProfileState.DRAFT
    nsi_id: str | None = None


@dataclass(frozen=True)
class CostWeights:
    cpu_weight: float = 1.0
    bandwidth_divisor: float = 10.0
    dedicated_surcharge: float = 0.2


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    reason: str = ""
    placement_latency_ms: float | None = None


def template_cost(template: GstTemplate, bandwidth_mbps: float, weights: CostWeights) -> float:
    """Linear resource cost of realizing a template at the given bandwidth."""
    base = weights.cpu_weight * template.cpu_units + bandwidth_mbps / weights.bandwidth_divisor
    if template.isolation == "dedicated":
        base *= 1.0 + weights.dedicated_surcharge
    return base


def load_gst_catalog(doc: dict) -> list[GstTemplate]:
    out = []
    for row in doc.get("templates", []):
        out.append(
            GstTemplate(
                id=row["id"],
                slice_type=SliceCategory(row["slice_type"]),
                max_latency_ms=float(row["max_latency_ms"]),
                min_reliability=float(row["min_reliability"]),
                guaranteed_bandwidth_mbps=float(row["guaranteed_bandwidth_mbps"]),
                max_device_density=int(row["max_device_density"]),
                isolation=row["isolation"],
                cpu_units=float(row["cpu_units"]),
            )
        )
    return out


class ServiceOrchestrator:
    def __init__(
        self,
        gst_catalog: list[GstTemplate],
        nfvo: Nfvo,
        vim: Vim,
        cost_weights: CostWeights | None = None,
        exhaustive_limit: int | None = None,
    ):
        self.gst_catalog = list(gst_catalog)
        self.nfvo = nfvo
        self.vim = vim
        self.cost_weights = cost_weights or CostWeights()
        self.exhaustive_limit = exhaustive_limit
        self._profile_seq = 0
        self.profiles: dict[str, ServiceProfile] = {}

    def build_service_profile(self, reqs: ServiceRequirementSet) -> ServiceProfile:
        """New Draft profile; id derives from (intent id, monotonic sequence)."""
        self._profile_seq += 1
        intent_id = reqs.source_intent or "adhoc"
        profile = ServiceProfile(
            id=f"{intent_id}/p{self._profile_seq}",
            requirements=reqs,
            customer_ref=intent_id,
        )
        self.profiles[profile.id] = profile
        return profile

    def select_nest(
        self,
        profile: ServiceProfile,
        catalog: list[GstTemplate] | None = None,
        exclude: frozenset[str] = frozenset(),
        force_isolation: str | None = None,
    ) -> Nest:
        """Cheapest admitting template, instantiated with the profile's values.

        Ties break on template id. Raises NoMatchingTemplate when nothing in
        the catalog admits the profile's category and bounds.
        """
        reqs = profile.requirements
        candidates = [
            t
            for t in (catalog if catalog is not None else self.gst_catalog)
            if t.id not in exclude and t.admits(reqs)
        ]
        if not candidates:
            raise NoMatchingTemplate(
                f"no template admits category {reqs.category.value} with "
                f"latency {reqs.latency_bound_ms} ms, reliability {reqs.reliability}, "
                f"bandwidth {reqs.bandwidth_mbps} Mbps, devices {reqs.device_count}"
            )
        chosen = min(
            candidates,
            key=lambda t: (template_cost(t, reqs.bandwidth_mbps, self.cost_weights), t.id),
        )
        isolation = force_isolation or chosen.isolation
        return Nest(
            gst_id=chosen.id,
            slice_type=reqs.category,
            max_latency_ms=reqs.latency_bound_ms,
            min_reliability=reqs.reliability,
            guaranteed_bandwidth_mbps=reqs.bandwidth_mbps,
            max_device_density=reqs.device_count,
            isolation=isolation,
            source_profile=profile.id,
        )

    def replacement_nest(self, profile: ServiceProfile, current: Nest) -> Nest:
        """Relaxed re-selection used by the closed loop's ReplaceNest action.

        Policy: drop dedicated isolation first; otherwise move to the next
        template (by cost) excluding the current one.
        """
        if current.isolation == "dedicated":
            return replace(current, isolation="shared")
        return self.select_nest(profile, exclude=frozenset({current.gst_id}))

    def feasibility_check(
        self,
        profile: ServiceProfile,
        network_state: ResourceSnapshot,
        nest: Nest | None = None,
    ) -> FeasibilityVerdict:
        """Dry-run placement over a snapshot.

        Raises StaleSnapshot when the snapshot lags the live ledger by more
        than one epoch (one committed mutation).
        """
        if self.vim.version - network_state.version > 1:
            raise StaleSnapshot(
                f"snapshot version {network_state.version} lags ledger "
                f"version {self.vim.version}"
            )
        if not network_state.nodes:
            return FeasibilityVerdict(False, "no-nodes")
        reqs = profile.requirements
        try:
            if nest is None:
                nest = self.select_nest(profile)
        except NoMatchingTemplate as e:
            return FeasibilityVerdict(False, f"no-matching-template: {e}")
        chain = self.nfvo.plan(
            nest.slice_type.value, nest.guaranteed_bandwidth_mbps, nest.max_device_density
        )
        ingress = self.vim.resolve_attachment(reqs.endpoints[0], "ingress")
        egress = self.vim.resolve_attachment(reqs.endpoints[1], "egress")
        try:
            kwargs = {}
            if self.exhaustive_limit is not None:
                kwargs["exhaustive_limit"] = self.exhaustive_limit
            placement = place_chain(
                network_state,
                chain,
                (ingress, egress),
                bandwidth_mbps=nest.guaranteed_bandwidth_mbps,
                max_latency_ms=nest.max_latency_ms,
                mode="dry_run",
                dedicated_owner="__new__" if nest.isolation == "dedicated" else None,
                **kwargs,
            )
        except NoFeasiblePlacement as e:
            return FeasibilityVerdict(False, str(e))
        return FeasibilityVerdict(True, "", placement.latency_ms)

    # -- service model emission

    def emit_service_model(self, profile: ServiceProfile, nest: Nest) -> "ServiceModel":
        """Two-part service model: customer view and delivery view.

        Requires the profile to be at least Validated. Output is byte-stable
        for identical inputs.
        """
        if profile.state < ProfileState.VALIDATED:
            raise ValueError(
                f"profile {profile.id} is {profile.state.name}; emit requires Validated"
            )
        reqs = profile.requirements
        document = {
            "schema": "gridslice/service-model/1",
            "customer_service": {
                "intent": profile.customer_ref,
                "profile": profile.id,
                "requirements": {
                    "category": reqs.category.value,
                    "latency_bound_ms": reqs.latency_bound_ms,
                    "reliability": reqs.reliability,
                    "bandwidth_mbps": reqs.bandwidth_mbps,
                    "device_count": reqs.device_count,
                    "endpoints": {
                        "subject": reqs.endpoints[0],
                        "target": reqs.endpoints[1],
                    },
                },
            },
            "service_delivery": {
                "gst": nest.gst_id,
                "slice_type": nest.slice_type.value,
                "attributes": {
                    "max_latency_ms": nest.max_latency_ms,
                    "min_reliability": nest.min_reliability,
                    "guaranteed_bandwidth_mbps": nest.guaranteed_bandwidth_mbps,
                    "max_device_density": nest.max_device_density,
                    "isolation": nest.isolation,
                },
                "slice_instance": profile.nsi_id,  # placeholder until provisioned
            },
        }
        return ServiceModel(document)

    def to_state(self) -> dict:
        return {
            "profile_seq": self._profile_seq,
            "profiles": [
                {
                    "id": p.id,
                    "customer_ref": p.customer_ref,
                    "state": p.state.name,
                    "nsi_id": p.nsi_id,
                    "requirements": requirements_to_doc(p.requirements),
                }
                for p in sorted(self.profiles.values(), key=lambda p: p.id)
            ],
        }

    def restore_state(self, state: dict) -> None:
        self._profile_seq = state["profile_seq"]
        self.profiles = {}
        for row in state["profiles"]:
            self.profiles[row["id"]] = ServiceProfile(
                id=row["id"],
                requirements=requirements_from_doc(row["requirements"]),
                customer_ref=row["customer_ref"],
                state=ProfileState[row["state"]],
                nsi_id=row["nsi_id"],
            )


class ServiceModel:
    """Emitted service model; normative as a structured document, with a
    presentational YANG-style tree rendering."""

    def __init__(self, document: dict):
        self.document = document

    def as_document(self) -> str:
        return dump_document(self.document)

    def as_tree(self) -> str:
        lines = ["module: gridslice-service"]

        def walk(value, name, indent, is_last):
            prefix = indent + ("+--rw ")
            if isinstance(value, dict):
                lines.append(f"{prefix}{name}")
                items = list(value.items())
                for i, (k, v) in enumerate(items):
                    child_indent = indent + ("   " if is_last else "|  ")
                    walk(v, k, child_indent, i == len(items) - 1)
            else:
                shown = "~" if value is None else value
                lines.append(f"{prefix}{name} = {shown}")

        body = {k: v for k, v in self.document.items() if k != "schema"}
        items = list(body.items())
        for i, (k, v) in enumerate(items):
            walk(v, k, "  ", i == len(items) - 1)
        return "\n".join(lines) + "\n"


def requirements_to_doc(reqs: ServiceRequirementSet) -> dict:
    return {
        "category": reqs.category.value,
        "latency_bound_ms": reqs.latency_bound_ms,
        "reliability": reqs.reliability,
        "bandwidth_mbps": reqs.bandwidth_mbps,
        "device_count": reqs.device_count,
        "endpoints": [reqs.endpoints[0], reqs.endpoints[1]],
        "source_intent": reqs.source_intent,
    }


def requirements_from_doc(doc: dict) -> ServiceRequirementSet:
    return ServiceRequirementSet(
        category=SliceCategory(doc["category"]),
        latency_bound_ms=doc["latency_bound_ms"],
        reliability=doc["reliability"],
        bandwidth_mbps=doc["bandwidth_mbps"],
        device_count=doc["device_count"],
        endpoints=(doc["endpoints"][0], doc["endpoints"][1]),
        source_intent=doc["source_intent"],
    )
