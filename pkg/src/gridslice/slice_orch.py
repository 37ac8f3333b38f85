"""Network slice instance lifecycle.

The slice orchestrator owns the NSI state machine and drives MANO to
realize, update, and terminate slices. All mutations run on the single
orchestration command queue, so no two operations on the same NSI ever
interleave. Updates are make-before-break: new reservations are secured
while the old ones still stand, and only then released.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import IllegalState, NoFeasiblePlacement, PlacementFailed, ResourceExhausted
from .intent_dsl import SliceCategory
from .mano import Nfvo, Placement, PlannedVnf, ResourceVector, Vim, place_chain
from .service_orch import Nest

logger = logging.getLogger(__name__)


class SliceState(Enum):
    REQUESTED = "Requested"
    INSTANTIATING = "Instantiating"
    ACTIVE = "Active"
    UPDATING = "Updating"
    DEGRADED = "Degraded"
    TERMINATING = "Terminating"
    TERMINATED = "Terminated"


LEGAL_TRANSITIONS: frozenset[tuple[SliceState, SliceState]] = frozenset(
    {
        (SliceState.REQUESTED, SliceState.INSTANTIATING),
        (SliceState.INSTANTIATING, SliceState.ACTIVE),
        (SliceState.INSTANTIATING, SliceState.TERMINATING),
        (SliceState.ACTIVE, SliceState.UPDATING),
        (SliceState.ACTIVE, SliceState.DEGRADED),
        (SliceState.ACTIVE, SliceState.TERMINATING),
        (SliceState.UPDATING, SliceState.ACTIVE),
        (SliceState.UPDATING, SliceState.TERMINATING),
        (SliceState.DEGRADED, SliceState.UPDATING),
        (SliceState.DEGRADED, SliceState.TERMINATING),
        (SliceState.TERMINATING, SliceState.TERMINATED),
        (SliceState.REQUESTED, SliceState.TERMINATING),
    }
)


def check_transition(from_state: SliceState, to_state: SliceState) -> bool:
    """True iff (from, to) belongs to the legal lifecycle transition set."""
    return (from_state, to_state) in LEGAL_TRANSITIONS


@dataclass
class NetworkSliceInstance:
    id: str
    nest: Nest
    state: SliceState = SliceState.REQUESTED
    vnf_chain: list[str] = field(default_factory=list)  # instance ids, chain order
    node_allocations: list[tuple[str, ResourceVector]] = field(default_factory=list)
    link_allocations: list[tuple[str, float]] = field(default_factory=list)
    path: tuple[str, ...] = ()  # ordered link ids, with multiplicity
    endpoints: tuple[str, str] = ("", "")
    created_at: float = 0.0
    updated_at: float = 0.0
    failure_reason: str | None = None

    def carries_traffic(self) -> bool:
        return self.state in (SliceState.ACTIVE, SliceState.DEGRADED)


class SliceOrchestrator:
    def __init__(
        self,
        vim: Vim,
        nfvo: Nfvo,
        clock: Callable[[], float] = lambda: 0.0,
        on_transition: Callable[[NetworkSliceInstance, SliceState, SliceState, str], None]
        | None = None,
        exhaustive_limit: int | None = None,
    ):
        self.vim = vim
        self.nfvo = nfvo
        self.exhaustive_limit = exhaustive_limit
        self.clock = clock
        self.on_transition = on_transition
        self.slices: dict[str, NetworkSliceInstance] = {}
        self._nsi_seq = 0

    def get(self, nsi_id: str) -> NetworkSliceInstance | None:
        return self.slices.get(nsi_id)

    def _transition(self, nsi: NetworkSliceInstance, to: SliceState, reason: str = "") -> None:
        if not check_transition(nsi.state, to):
            raise IllegalState(f"{nsi.id}: {nsi.state.value} -> {to.value} is not legal")
        old = nsi.state
        nsi.state = to
        nsi.updated_at = self.clock()
        if self.on_transition:
            self.on_transition(nsi, old, to, reason)

    # -- instantiation

    def instantiate(
        self,
        nest: Nest,
        endpoints: tuple[str, str],
        avoid_links: frozenset[str] = frozenset(),
    ) -> NetworkSliceInstance:
        """Realize a NEST as an Active slice, or roll back to Terminated.

        Any failure after partial allocation tears down deployed VNFs and
        releases reserved bandwidth: a failed instantiate leaves zero
        residual allocations.
        """
        self._nsi_seq += 1
        nsi = NetworkSliceInstance(
            id=f"nsi-{self._nsi_seq:04d}",
            nest=nest,
            endpoints=endpoints,
            created_at=self.clock(),
            updated_at=self.clock(),
        )
        self.slices[nsi.id] = nsi
        self._transition(nsi, SliceState.INSTANTIATING)

        chain = self.nfvo.plan(
            nest.slice_type.value, nest.guaranteed_bandwidth_mbps, nest.max_device_density
        )
        try:
            placement = place_chain(
                self.vim,
                chain,
                endpoints,
                bandwidth_mbps=nest.guaranteed_bandwidth_mbps,
                max_latency_ms=nest.max_latency_ms,
                mode="commit",
                avoid_links=avoid_links,
                dedicated_owner=nsi.id if nest.isolation == "dedicated" else None,
                **({"exhaustive_limit": self.exhaustive_limit}
                   if self.exhaustive_limit is not None else {}),
            )
        except NoFeasiblePlacement as e:
            self._fail(nsi, str(e))
            if self._is_capacity_shortfall(chain, nest.guaranteed_bandwidth_mbps, endpoints):
                raise ResourceExhausted(f"{nsi.id}: {e}") from e
            raise PlacementFailed(f"{nsi.id}: {e}") from e

        deployed, error = self._deploy_chain(chain, placement, nsi.id)
        if error is not None:
            for inst_id in deployed:
                self.vim.teardown(inst_id)
            self.vim.release_path(placement.path, nest.guaranteed_bandwidth_mbps)
            self._fail(nsi, str(error))
            raise error

        nsi.vnf_chain = deployed
        nsi.node_allocations = [
            (node_id, vnf.demand) for vnf, node_id in zip(chain, placement.assignment)
        ]
        nsi.link_allocations = self._link_allocations(placement, nest)
        nsi.path = placement.path
        self._transition(nsi, SliceState.ACTIVE, "instantiated")
        return nsi

    def _is_capacity_shortfall(
        self, chain: list[PlannedVnf], bandwidth_mbps: float, endpoints: tuple[str, str]
    ) -> bool:
        """Distinguish capacity exhaustion from structural placement failure."""
        for vnf in chain:
            if not any(
                vnf.demand.fits_within(n.residual()) for n in self.vim.nodes.values()
            ):
                return True
        if endpoints[0] != endpoints[1] and self.vim.links:
            if all(l.residual_bw() + 1e-9 < bandwidth_mbps for l in self.vim.links.values()):
                return True
        return False

    def _deploy_chain(
        self, chain: list[PlannedVnf], placement: Placement, owner: str
    ) -> tuple[list[str], ResourceExhausted | None]:
        deployed: list[str] = []
        for vnf, node_id in zip(chain, placement.assignment):
            try:
                inst = self.vim.deploy(vnf, node_id, owner=owner)
            except ResourceExhausted as e:
                return deployed, e
            deployed.append(inst.id)
        return deployed, None

    @staticmethod
    def _link_allocations(placement: Placement, nest: Nest) -> list[tuple[str, float]]:
        return [(link_id, nest.guaranteed_bandwidth_mbps) for link_id in placement.path]

    def _fail(self, nsi: NetworkSliceInstance, reason: str) -> None:
        nsi.failure_reason = reason
        self._transition(nsi, SliceState.TERMINATING, reason)
        self._transition(nsi, SliceState.TERMINATED, reason)

    # -- update (make-before-break)

    def update(
        self,
        nsi_id: str,
        new_nest: Nest,
        avoid_links: frozenset[str] = frozenset(),
    ) -> NetworkSliceInstance:
        """Re-realize a slice with a new NEST or a new placement.

        New resources are reserved before the old ones are released; if the
        new reservation fails, the slice keeps its original allocations and
        state. An update whose new placement only fits after releasing the
        slice's own old reservation is therefore rejected by design.
        """
        nsi = self.slices.get(nsi_id)
        if nsi is None:
            raise IllegalState(f"no slice {nsi_id!r}")
        if nsi.state not in (SliceState.ACTIVE, SliceState.DEGRADED):
            raise IllegalState(f"{nsi_id}: update requires Active or Degraded, "
                               f"is {nsi.state.value}")

        chain = self.nfvo.plan(
            new_nest.slice_type.value,
            new_nest.guaranteed_bandwidth_mbps,
            new_nest.max_device_density,
        )
        # Reserve the new allocation while the old one still stands.
        try:
            placement = place_chain(
                self.vim,
                chain,
                nsi.endpoints,
                bandwidth_mbps=new_nest.guaranteed_bandwidth_mbps,
                max_latency_ms=new_nest.max_latency_ms,
                mode="commit",
                avoid_links=avoid_links,
                dedicated_owner=nsi.id if new_nest.isolation == "dedicated" else None,
                **({"exhaustive_limit": self.exhaustive_limit}
                   if self.exhaustive_limit is not None else {}),
            )
        except NoFeasiblePlacement as e:
            raise ResourceExhausted(f"{nsi_id}: make-before-break update failed: {e}") from e

        deployed, error = self._deploy_chain(chain, placement, nsi.id)
        if error is not None:
            for inst_id in deployed:
                self.vim.teardown(inst_id)
            self.vim.release_path(placement.path, new_nest.guaranteed_bandwidth_mbps)
            raise ResourceExhausted(f"{nsi_id}: make-before-break update failed: {error}")

        # New allocation is secure: flip through Updating and break the old one.
        self._transition(nsi, SliceState.UPDATING, "update")
        old_chain = list(nsi.vnf_chain)
        old_path = nsi.path
        old_bw = nsi.nest.guaranteed_bandwidth_mbps
        for inst_id in old_chain:
            self.vim.teardown(inst_id)
        self.vim.release_path(old_path, old_bw)

        nsi.nest = new_nest
        nsi.vnf_chain = deployed
        nsi.node_allocations = [
            (node_id, vnf.demand) for vnf, node_id in zip(chain, placement.assignment)
        ]
        nsi.link_allocations = self._link_allocations(placement, new_nest)
        nsi.path = placement.path
        self._transition(nsi, SliceState.ACTIVE, "updated")
        return nsi

    # -- degradation mark (closed loop)

    def mark_degraded(self, nsi_id: str, reason: str = "") -> NetworkSliceInstance:
        nsi = self.slices.get(nsi_id)
        if nsi is None:
            raise IllegalState(f"no slice {nsi_id!r}")
        if nsi.state is SliceState.DEGRADED:
            return nsi
        self._transition(nsi, SliceState.DEGRADED, reason)
        return nsi

    # -- termination

    def terminate(self, nsi_id: str) -> NetworkSliceInstance:
        """Tear down every VNF and release every allocation.

        Terminating an already Terminated slice is an IllegalState by policy.
        A Requested slice terminates without touching MANO.
        """
        nsi = self.slices.get(nsi_id)
        if nsi is None:
            raise IllegalState(f"no slice {nsi_id!r}")
        if nsi.state is SliceState.TERMINATED:
            raise IllegalState(f"{nsi_id} is already Terminated")
        self._transition(nsi, SliceState.TERMINATING, "terminate")
        for inst_id in nsi.vnf_chain:
            self.vim.teardown(inst_id)
        if nsi.path:
            self.vim.release_path(nsi.path, nsi.nest.guaranteed_bandwidth_mbps)
        nsi.vnf_chain = []
        nsi.node_allocations = []
        nsi.link_allocations = []
        nsi.path = ()
        self._transition(nsi, SliceState.TERMINATED, "terminated")
        return nsi

    # -- state serialization

    def to_state(self) -> dict:
        return {
            "nsi_seq": self._nsi_seq,
            "slices": [
                {
                    "id": s.id,
                    "state": s.state.value,
                    "nest": nest_to_doc(s.nest),
                    "vnf_chain": list(s.vnf_chain),
                    "node_allocations": [
                        [node, d.cpu, d.memory_mb] for node, d in s.node_allocations
                    ],
                    "link_allocations": [[l, bw] for l, bw in s.link_allocations],
                    "path": list(s.path),
                    "endpoints": list(s.endpoints),
                    "created_at": s.created_at,
                    "updated_at": s.updated_at,
                    "failure_reason": s.failure_reason,
                }
                for s in sorted(self.slices.values(), key=lambda s: s.id)
            ],
        }

    def restore_state(self, state: dict) -> None:
        self._nsi_seq = state["nsi_seq"]
        self.slices = {}
        for row in state["slices"]:
            self.slices[row["id"]] = NetworkSliceInstance(
                id=row["id"],
                nest=nest_from_doc(row["nest"]),
                state=SliceState(row["state"]),
                vnf_chain=list(row["vnf_chain"]),
                node_allocations=[
                    (node, ResourceVector(cpu, mem))
                    for node, cpu, mem in row["node_allocations"]
                ],
                link_allocations=[(l, bw) for l, bw in row["link_allocations"]],
                path=tuple(row["path"]),
                endpoints=(row["endpoints"][0], row["endpoints"][1]),
                created_at=row["created_at"],
                updated_at=row["updated_at"],
                failure_reason=row["failure_reason"],
            )


def nest_to_doc(nest: Nest) -> dict:
    return {
        "gst_id": nest.gst_id,
        "slice_type": nest.slice_type.value,
        "max_latency_ms": nest.max_latency_ms,
        "min_reliability": nest.min_reliability,
        "guaranteed_bandwidth_mbps": nest.guaranteed_bandwidth_mbps,
        "max_device_density": nest.max_device_density,
        "isolation": nest.isolation,
        "source_profile": nest.source_profile,
    }


def nest_from_doc(doc: dict) -> Nest:
    return Nest(
        gst_id=doc["gst_id"],
        slice_type=SliceCategory(doc["slice_type"]),
        max_latency_ms=doc["max_latency_ms"],
        min_reliability=doc["min_reliability"],
        guaranteed_bandwidth_mbps=doc["guaranteed_bandwidth_mbps"],
        max_device_density=doc["max_device_density"],
        isolation=doc["isolation"],
        source_profile=doc["source_profile"],
    )
