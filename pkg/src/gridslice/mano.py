"""Simulated NFV management and orchestration.

Three responsibilities of the real stack are modeled:

* NFVO: plans VNF chains per slice type and scales their demands.
* VNFM: deploys and tears down VNF instances on infrastructure nodes.
* VIM:  single-writer ledger of node capacity, virtual links, and
        committed reservations; hands out immutable versioned snapshots.

Chain placement searches exhaustively while ``|nodes| ** |chain|`` stays
within a configured budget, and falls back to greedy first-fit along
shortest-latency paths beyond it. A commit either applies every link
reservation or none.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, replace
from enum import Enum

from .errors import (
    NoFeasiblePlacement,
    ResourceExhausted,
    SchemaError,
    UnknownInstance,
    UnknownLink,
)

logger = logging.getLogger(__name__)

EXHAUSTIVE_ASSIGNMENT_LIMIT = 10_000


@dataclass(frozen=True)
class ResourceVector:
    cpu: float = 0.0
    memory_mb: float = 0.0

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(self.cpu + other.cpu, self.memory_mb + other.memory_mb)

    def __sub__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(self.cpu - other.cpu, self.memory_mb - other.memory_mb)

    def fits_within(self, other: "ResourceVector", eps: float = 1e-9) -> bool:
        return self.cpu <= other.cpu + eps and self.memory_mb <= other.memory_mb + eps

    def is_nonnegative(self, eps: float = 1e-9) -> bool:
        return self.cpu >= -eps and self.memory_mb >= -eps


ZERO = ResourceVector()


@dataclass
class InfrastructureNode:
    id: str
    capacity: ResourceVector
    usage: ResourceVector = ZERO
    location: str = "edge"  # edge | regional | core

    def residual(self) -> ResourceVector:
        return self.capacity - self.usage


@dataclass
class VirtualLink:
    id: str
    endpoints: tuple[str, str]
    capacity_bw: float  # Mbps
    used_bw: float = 0.0
    base_latency: float = 1.0  # ms
    degradation: float = 0.0  # additive ms, fault-injectable
    loss_prob: float = 0.0

    def latency(self) -> float:
        return self.base_latency + self.degradation

    def residual_bw(self) -> float:
        return self.capacity_bw - self.used_bw


@dataclass(frozen=True)
class VnfDescriptor:
    vnf_type: str
    demand: ResourceVector
    processing_latency_ms: float
    scales_with_devices: bool = False


@dataclass(frozen=True)
class PlannedVnf:
    """Chain element with demand already scaled to the slice's parameters."""

    vnf_type: str
    demand: ResourceVector
    processing_latency_ms: float


class VnfState(Enum):
    DEPLOYED = "Deployed"
    DOWN = "Down"


@dataclass
class VnfInstance:
    id: str
    vnf_type: str
    node_id: str
    demand: ResourceVector
    state: VnfState = VnfState.DEPLOYED
    owner: str | None = None  # slice instance id


@dataclass(frozen=True)
class Placement:
    assignment: tuple[str, ...]  # node id per chain position
    path: tuple[str, ...]  # link ids traversed end to end, with multiplicity
    latency_ms: float  # link latencies + VNF processing


@dataclass(frozen=True)
class ResourceSnapshot:
    """Immutable, version-stamped copy of the infrastructure ledgers."""

    version: int
    nodes: dict[str, InfrastructureNode]
    links: dict[str, VirtualLink]
    node_owners: dict[str, frozenset[str]]  # node id -> owning slice ids

    def residual_node(self, node_id: str) -> ResourceVector:
        return self.nodes[node_id].residual()


# --- NFVO: chain planning ---------------------------------------------------

DEFAULT_VNF_PROFILES = {
    "forwarder": {"cpu": 1.0, "memory_mb": 512, "processing_latency_ms": 0.5},
    "aggregator": {"cpu": 1.5, "memory_mb": 1024, "processing_latency_ms": 1.0},
    "cache": {"cpu": 2.0, "memory_mb": 2048, "processing_latency_ms": 2.0},
    "collector": {
        "cpu": 1.0,
        "memory_mb": 1024,
        "processing_latency_ms": 5.0,
        "scales_with_devices": True,
    },
}

DEFAULT_CHAIN_TABLE = {
    "URLLC": ["forwarder", "aggregator"],
    "eMBB": ["forwarder", "cache", "forwarder"],
    "mMTC": ["collector", "aggregator"],
}

DEFAULT_DEMAND_SCALING = {"cpu_per_mbps": 0.01, "cpu_per_kdevice": 0.1}


class Nfvo:
    """Plans VNF chains from the configured chain table and scaling law."""

    def __init__(
        self,
        chain_table: dict[str, list[str]] | None = None,
        vnf_profiles: dict[str, dict] | None = None,
        demand_scaling: dict[str, float] | None = None,
    ):
        self.chain_table = chain_table or dict(DEFAULT_CHAIN_TABLE)
        profiles = vnf_profiles or DEFAULT_VNF_PROFILES
        self.descriptors = {
            name: VnfDescriptor(
                vnf_type=name,
                demand=ResourceVector(float(p["cpu"]), float(p["memory_mb"])),
                processing_latency_ms=float(p["processing_latency_ms"]),
                scales_with_devices=bool(p.get("scales_with_devices", False)),
            )
            for name, p in profiles.items()
        }
        self.scaling = dict(DEFAULT_DEMAND_SCALING)
        if demand_scaling:
            self.scaling.update(demand_scaling)

    def plan(self, slice_type: str, bandwidth_mbps: float, device_count: int) -> list[PlannedVnf]:
        """Deterministic chain for a slice type with demands scaled to load.

        cpu = base_cpu * (1 + cpu_per_mbps * bandwidth); descriptors that
        scale with device density gain a further (1 + cpu_per_kdevice *
        devices/1000) factor. Memory is not scaled.
        """
        if slice_type not in self.chain_table:
            raise SchemaError("slice_type", f"no chain defined for {slice_type!r}")
        bw_factor = 1.0 + self.scaling["cpu_per_mbps"] * bandwidth_mbps
        out = []
        for name in self.chain_table[slice_type]:
            desc = self.descriptors[name]
            cpu = desc.demand.cpu * bw_factor
            if desc.scales_with_devices:
                cpu *= 1.0 + self.scaling["cpu_per_kdevice"] * device_count / 1000.0
            out.append(
                PlannedVnf(
                    vnf_type=name,
                    demand=ResourceVector(cpu, desc.demand.memory_mb),
                    processing_latency_ms=desc.processing_latency_ms,
                )
            )
        return out


# --- VIM: infrastructure ledger ---------------------------------------------

class Vim:
    """Single-writer infrastructure ledger.

    Node usage changes only through deploy/teardown; link usage only through
    commit_path/release_path. Every mutation bumps the version stamp.
    """

    def __init__(self):
        self.nodes: dict[str, InfrastructureNode] = {}
        self.links: dict[str, VirtualLink] = {}
        self.instances: dict[str, VnfInstance] = {}
        self.attachments: dict[str, str] = {}  # endpoint name -> node id
        self.default_ingress: str | None = None
        self.default_egress: str | None = None
        self.version = 0
        self._instance_seq = 0

    # -- construction

    @classmethod
    def from_topology(cls, doc: dict) -> "Vim":
        vim = cls()
        for row in doc.get("nodes", []):
            vim.nodes[row["id"]] = InfrastructureNode(
                id=row["id"],
                capacity=ResourceVector(float(row["cpu"]), float(row["memory_mb"])),
                location=row.get("location", "edge"),
            )
        for row in doc.get("links", []):
            a, b = row["endpoints"]
            for end in (a, b):
                if end not in vim.nodes:
                    raise SchemaError(f"links[{row['id']}]", f"unknown node {end!r}")
            base_latency = float(row["base_latency_ms"])
            if base_latency <= 0:
                raise SchemaError(f"links[{row['id']}]", "base latency must be > 0")
            vim.links[row["id"]] = VirtualLink(
                id=row["id"],
                endpoints=(a, b),
                capacity_bw=float(row["capacity_mbps"]),
                base_latency=base_latency,
            )
        attach = doc.get("attachments", {})
        for name, node_id in attach.items():
            if name in ("default_ingress", "default_egress"):
                continue
            if node_id not in vim.nodes:
                raise SchemaError(f"attachments[{name}]", f"unknown node {node_id!r}")
            vim.attachments[name] = node_id
        vim.default_ingress = attach.get("default_ingress")
        vim.default_egress = attach.get("default_egress")
        return vim

    def resolve_attachment(self, name: str | None, role: str) -> str:
        """Map an endpoint-group name to its attachment node.

        Unknown names fall back to the topology's declared default ingress or
        egress so that what-if intents over unmodeled endpoints stay checkable.
        """
        if name is not None and name in self.attachments:
            return self.attachments[name]
        fallback = self.default_ingress if role == "ingress" else self.default_egress
        if fallback is None:
            raise SchemaError(
                "attachments", f"no attachment for {name!r} and no default {role}"
            )
        return fallback

    # -- snapshots

    def snapshot(self) -> ResourceSnapshot:
        owners: dict[str, set[str]] = {node_id: set() for node_id in self.nodes}
        for inst in self.instances.values():
            if inst.state is VnfState.DEPLOYED and inst.owner:
                owners[inst.node_id].add(inst.owner)
        return ResourceSnapshot(
            version=self.version,
            nodes={n.id: replace(n) for n in self.nodes.values()},
            links={l.id: replace(l) for l in self.links.values()},
            node_owners={k: frozenset(v) for k, v in owners.items()},
        )

    # -- VNFM: instance lifecycle

    def deploy(self, vnf: PlannedVnf, node_id: str, owner: str | None = None) -> VnfInstance:
        node = self.nodes.get(node_id)
        if node is None:
            raise SchemaError("node_id", f"unknown node {node_id!r}")
        if not (node.usage + vnf.demand).fits_within(node.capacity):
            raise ResourceExhausted(
                f"node {node_id} cannot fit {vnf.vnf_type} "
                f"(cpu {vnf.demand.cpu:.3f}, mem {vnf.demand.memory_mb:.0f})"
            )
        self._instance_seq += 1
        inst = VnfInstance(
            id=f"vnf-{self._instance_seq:04d}",
            vnf_type=vnf.vnf_type,
            node_id=node_id,
            demand=vnf.demand,
            owner=owner,
        )
        node.usage = node.usage + vnf.demand
        self.instances[inst.id] = inst
        self.version += 1
        return inst

    def teardown(self, instance_id: str) -> ResourceVector:
        inst = self.instances.get(instance_id)
        if inst is None or inst.state is not VnfState.DEPLOYED:
            raise UnknownInstance(f"no deployed instance {instance_id!r}")
        node = self.nodes[inst.node_id]
        node.usage = node.usage - inst.demand
        del self.instances[instance_id]
        self.version += 1
        return inst.demand

    # -- link reservations

    def commit_path(self, path: tuple[str, ...], bandwidth_mbps: float) -> None:
        """Atomically reserve bandwidth on every traversal of the path."""
        counts: dict[str, int] = {}
        for link_id in path:
            counts[link_id] = counts.get(link_id, 0) + 1
        for link_id, n in counts.items():
            link = self.links.get(link_id)
            if link is None:
                raise UnknownLink(f"no link {link_id!r}")
            if link.used_bw + n * bandwidth_mbps > link.capacity_bw + 1e-9:
                raise ResourceExhausted(
                    f"link {link_id} cannot fit {n}x{bandwidth_mbps} Mbps"
                )
        for link_id, n in counts.items():
            self.links[link_id].used_bw += n * bandwidth_mbps
        if counts:
            self.version += 1

    def release_path(self, path: tuple[str, ...], bandwidth_mbps: float) -> None:
        for link_id in path:
            link = self.links.get(link_id)
            if link is None:
                raise UnknownLink(f"no link {link_id!r}")
            link.used_bw = max(0.0, link.used_bw - bandwidth_mbps)
        if path:
            self.version += 1

    # -- fault injection

    def inject_link_degradation(
        self, link_id: str, extra_latency_ms: float, loss_prob: float
    ) -> tuple[float, float]:
        """Set a link's additive latency and loss; returns the previous values."""
        link = self.links.get(link_id)
        if link is None:
            raise UnknownLink(f"no link {link_id!r}")
        if not 0.0 <= loss_prob <= 1.0:
            raise SchemaError("loss_prob", f"must be in [0, 1], got {loss_prob}")
        previous = (link.degradation, link.loss_prob)
        link.degradation = extra_latency_ms
        link.loss_prob = loss_prob
        self.version += 1
        return previous

    # -- consistency

    def assert_consistent(self) -> None:
        """Conservation checks; raises AssertionError on any ledger drift."""
        per_node: dict[str, ResourceVector] = {n: ZERO for n in self.nodes}
        for inst in self.instances.values():
            if inst.state is VnfState.DEPLOYED:
                per_node[inst.node_id] = per_node[inst.node_id] + inst.demand
        for node in self.nodes.values():
            expect = per_node[node.id]
            assert abs(node.usage.cpu - expect.cpu) < 1e-6, node.id
            assert abs(node.usage.memory_mb - expect.memory_mb) < 1e-6, node.id
            assert node.usage.is_nonnegative(), node.id
            assert node.usage.fits_within(node.capacity), node.id
        for link in self.links.values():
            assert -1e-9 <= link.used_bw <= link.capacity_bw + 1e-9, link.id

    def ledger_checksum(self) -> tuple:
        """Stable fingerprint of all usage counters, for before/after checks."""
        nodes = tuple(
            (n.id, round(n.usage.cpu, 9), round(n.usage.memory_mb, 9))
            for n in sorted(self.nodes.values(), key=lambda n: n.id)
        )
        links = tuple(
            (l.id, round(l.used_bw, 9)) for l in sorted(self.links.values(), key=lambda l: l.id)
        )
        return (nodes, links)

    # -- state serialization

    def to_state(self) -> dict:
        return {
            "version": self.version,
            "instance_seq": self._instance_seq,
            "nodes": [
                {
                    "id": n.id,
                    "cpu": n.capacity.cpu,
                    "memory_mb": n.capacity.memory_mb,
                    "used_cpu": n.usage.cpu,
                    "used_memory_mb": n.usage.memory_mb,
                    "location": n.location,
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
            "links": [
                {
                    "id": l.id,
                    "endpoints": list(l.endpoints),
                    "capacity_mbps": l.capacity_bw,
                    "used_mbps": l.used_bw,
                    "base_latency_ms": l.base_latency,
                    "degradation_ms": l.degradation,
                    "loss_prob": l.loss_prob,
                }
                for l in sorted(self.links.values(), key=lambda l: l.id)
            ],
            "instances": [
                {
                    "id": i.id,
                    "vnf_type": i.vnf_type,
                    "node_id": i.node_id,
                    "cpu": i.demand.cpu,
                    "memory_mb": i.demand.memory_mb,
                    "state": i.state.value,
                    "owner": i.owner,
                }
                for i in sorted(self.instances.values(), key=lambda i: i.id)
            ],
            "attachments": dict(sorted(self.attachments.items())),
            "default_ingress": self.default_ingress,
            "default_egress": self.default_egress,
        }

    @classmethod
    def from_state(cls, state: dict) -> "Vim":
        vim = cls()
        vim.version = state["version"]
        vim._instance_seq = state["instance_seq"]
        for row in state["nodes"]:
            vim.nodes[row["id"]] = InfrastructureNode(
                id=row["id"],
                capacity=ResourceVector(row["cpu"], row["memory_mb"]),
                usage=ResourceVector(row["used_cpu"], row["used_memory_mb"]),
                location=row["location"],
            )
        for row in state["links"]:
            vim.links[row["id"]] = VirtualLink(
                id=row["id"],
                endpoints=(row["endpoints"][0], row["endpoints"][1]),
                capacity_bw=row["capacity_mbps"],
                used_bw=row["used_mbps"],
                base_latency=row["base_latency_ms"],
                degradation=row["degradation_ms"],
                loss_prob=row["loss_prob"],
            )
        for row in state["instances"]:
            vim.instances[row["id"]] = VnfInstance(
                id=row["id"],
                vnf_type=row["vnf_type"],
                node_id=row["node_id"],
                demand=ResourceVector(row["cpu"], row["memory_mb"]),
                state=VnfState(row["state"]),
                owner=row["owner"],
            )
        vim.attachments = dict(state["attachments"])
        vim.default_ingress = state["default_ingress"]
        vim.default_egress = state["default_egress"]
        return vim


# --- placement ---------------------------------------------------------------

def _adjacency(view: ResourceSnapshot | Vim) -> dict[str, list[tuple[str, str]]]:
    """node id -> [(neighbor node id, link id)], deterministically ordered."""
    adj: dict[str, list[tuple[str, str]]] = {n: [] for n in view.nodes}
    for link in view.links.values():
        a, b = link.endpoints
        adj[a].append((b, link.id))
        adj[b].append((a, link.id))
    for entries in adj.values():
        entries.sort()
    return adj


def shortest_latency_path(
    view: ResourceSnapshot | Vim,
    src: str,
    dst: str,
    min_residual_bw: float,
    avoid_links: frozenset[str] = frozenset(),
) -> tuple[float, tuple[str, ...]] | None:
    """Dijkstra over links with enough residual bandwidth; None if unreachable.

    Returns (total latency ms, ordered link ids). Ties resolve toward the
    lexicographically smaller node sequence, keeping results deterministic.
    """
    if src == dst:
        return (0.0, ())
    adj = _adjacency(view)
    best: dict[str, float] = {src: 0.0}
    heap: list[tuple[float, str, tuple[str, ...]]] = [(0.0, src, ())]
    while heap:
        dist, node, path = heapq.heappop(heap)
        if node == dst:
            return (dist, path)
        if dist > best.get(node, float("inf")):
            continue
        for neighbor, link_id in adj[node]:
            if link_id in avoid_links:
                continue
            link = view.links[link_id]
            if link.residual_bw() + 1e-9 < min_residual_bw:
                continue
            nd = dist + link.latency()
            if nd < best.get(neighbor, float("inf")) - 1e-12:
                best[neighbor] = nd
                heapq.heappush(heap, (nd, neighbor, path + (link_id,)))
    return None


def _route_for_assignment(
    view: ResourceSnapshot | Vim,
    assignment: tuple[str, ...],
    endpoints: tuple[str, str],
    bandwidth_mbps: float,
    avoid_links: frozenset[str],
) -> tuple[float, tuple[str, ...]] | None:
    """Concatenated per-segment shortest paths; None if any segment unreachable."""
    waypoints = [endpoints[0], *assignment, endpoints[1]]
    total_latency = 0.0
    full_path: list[str] = []
    for a, b in zip(waypoints, waypoints[1:]):
        if a == b:
            continue
        seg = shortest_latency_path(view, a, b, bandwidth_mbps, avoid_links)
        if seg is None:
            return None
        total_latency += seg[0]
        full_path.extend(seg[1])
    return (total_latency, tuple(full_path))


def _assignment_feasible(
    view: ResourceSnapshot | Vim,
    chain: list[PlannedVnf],
    assignment: tuple[str, ...],
    route: tuple[float, tuple[str, ...]],
    bandwidth_mbps: float,
    max_latency_ms: float,
) -> float | None:
    """Full feasibility check; returns total latency or None."""
    loads: dict[str, ResourceVector] = {}
    for vnf, node_id in zip(chain, assignment):
        loads[node_id] = loads.get(node_id, ZERO) + vnf.demand
    for node_id, load in loads.items():
        node = view.nodes[node_id]
        if not (node.usage + load).fits_within(node.capacity):
            return None
    counts: dict[str, int] = {}
    for link_id in route[1]:
        counts[link_id] = counts.get(link_id, 0) + 1
    for link_id, n in counts.items():
        if view.links[link_id].used_bw + n * bandwidth_mbps > view.links[link_id].capacity_bw + 1e-9:
            return None
    total = route[0] + sum(v.processing_latency_ms for v in chain)
    if total > max_latency_ms + 1e-9:
        return None
    return total


def _candidate_nodes(
    view: ResourceSnapshot | Vim, dedicated_owner: str | None
) -> list[str]:
    """Nodes eligible to host the chain, sorted by id.

    With dedicated isolation, a node qualifies only if it hosts no VNFs of
    other slices.
    """
    node_ids = sorted(view.nodes)
    if dedicated_owner is None:
        return node_ids
    if isinstance(view, ResourceSnapshot):
        owners = view.node_owners
    else:
        owners = {}
        for inst in view.instances.values():
            if inst.state is VnfState.DEPLOYED and inst.owner:
                owners.setdefault(inst.node_id, set()).add(inst.owner)
    return [
        n
        for n in node_ids
        if not (set(owners.get(n, set())) - {dedicated_owner})
    ]


def place_chain(
    view: ResourceSnapshot | Vim,
    chain: list[PlannedVnf],
    endpoints: tuple[str, str],
    *,
    bandwidth_mbps: float,
    max_latency_ms: float,
    mode: str = "dry_run",
    avoid_links: frozenset[str] = frozenset(),
    dedicated_owner: str | None = None,
    exhaustive_limit: int = EXHAUSTIVE_ASSIGNMENT_LIMIT,
) -> Placement:
    """Place a VNF chain between two attachment nodes.

    Searches all assignments while ``len(nodes) ** len(chain)`` is within
    ``exhaustive_limit`` (minimum total latency wins; ties break on the
    lexicographically smallest assignment); larger instances use greedy
    first-fit along shortest-latency paths. ``mode="commit"`` additionally
    reserves path bandwidth, atomically; on failure nothing is applied.

    Raises NoFeasiblePlacement when no assignment satisfies node capacity,
    link bandwidth (counting repeated traversals), and the latency bound.
    """
    if mode not in ("dry_run", "commit"):
        raise ValueError(f"mode must be dry_run or commit, got {mode!r}")
    if mode == "commit" and not isinstance(view, Vim):
        raise ValueError("commit mode requires the live ledger, not a snapshot")
    if not view.nodes:
        raise NoFeasiblePlacement("no-nodes")
    for end in endpoints:
        if end not in view.nodes:
            raise NoFeasiblePlacement(f"unknown endpoint node {end!r}")
    if not chain:
        raise NoFeasiblePlacement("empty chain")

    nodes = _candidate_nodes(view, dedicated_owner)
    if not nodes:
        raise NoFeasiblePlacement("no nodes satisfy the isolation constraint")

    best: tuple[float, tuple[str, ...], tuple[str, ...]] | None = None
    if len(nodes) ** len(chain) <= exhaustive_limit:
        for assignment in itertools.product(nodes, repeat=len(chain)):
            route = _route_for_assignment(
                view, assignment, endpoints, bandwidth_mbps, avoid_links
            )
            if route is None:
                continue
            total = _assignment_feasible(
                view, chain, assignment, route, bandwidth_mbps, max_latency_ms
            )
            if total is None:
                continue
            key = (total, assignment, route[1])
            if best is None or key < best:
                best = key
    else:
        best = _greedy_place(
            view, chain, endpoints, nodes, bandwidth_mbps, max_latency_ms, avoid_links
        )

    if best is None:
        raise NoFeasiblePlacement(
            f"no feasible placement for {len(chain)}-VNF chain "
            f"between {endpoints[0]} and {endpoints[1]}"
        )
    total, assignment, path = best
    placement = Placement(assignment=assignment, path=path, latency_ms=total)
    if mode == "commit":
        assert isinstance(view, Vim)
        view.commit_path(placement.path, bandwidth_mbps)
    return placement


def _greedy_place(
    view: ResourceSnapshot | Vim,
    chain: list[PlannedVnf],
    endpoints: tuple[str, str],
    nodes: list[str],
    bandwidth_mbps: float,
    max_latency_ms: float,
    avoid_links: frozenset[str],
) -> tuple[float, tuple[str, ...], tuple[str, ...]] | None:
    """First-fit: each VNF goes to the nearest (by latency) node that still fits."""
    position = endpoints[0]
    loads: dict[str, ResourceVector] = {}
    assignment: list[str] = []
    for vnf in chain:
        ranked = []
        for node_id in nodes:
            seg = shortest_latency_path(view, position, node_id, bandwidth_mbps, avoid_links)
            if seg is None:
                continue
            ranked.append((seg[0], node_id))
        ranked.sort()
        chosen = None
        for _, node_id in ranked:
            node = view.nodes[node_id]
            pending = loads.get(node_id, ZERO) + vnf.demand
            if (node.usage + pending).fits_within(node.capacity):
                chosen = node_id
                break
        if chosen is None:
            return None
        loads[chosen] = loads.get(chosen, ZERO) + vnf.demand
        assignment.append(chosen)
        position = chosen
    route = _route_for_assignment(
        view, tuple(assignment), endpoints, bandwidth_mbps, avoid_links
    )
    if route is None:
        return None
    total = _assignment_feasible(
        view, chain, tuple(assignment), route, bandwidth_mbps, max_latency_ms
    )
    if total is None:
        return None
    return (total, tuple(assignment), route[1])


def path_latency(view: ResourceSnapshot | Vim, path: tuple[str, ...]) -> float:
    """Current latency along an ordered link path, degradation included."""
    total = 0.0
    for link_id in path:
        link = view.links.get(link_id)
        if link is None:
            raise UnknownLink(f"no link {link_id!r}")
        total += link.latency()
    return total


def path_loss_prob(view: ResourceSnapshot | Vim, path: tuple[str, ...]) -> float:
    """Message loss probability along a path: independent per-traversal losses."""
    survive = 1.0
    for link_id in path:
        survive *= 1.0 - view.links[link_id].loss_prob
    return 1.0 - survive
