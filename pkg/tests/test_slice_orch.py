"""Slice lifecycle: instantiation, rollback, make-before-break updates."""

import json
import random
from pathlib import Path

import pytest

from gridslice.documents import load_builtin
from gridslice.errors import IllegalState, PlacementFailed, ResourceExhausted
from gridslice.intent_dsl import SliceCategory
from gridslice.mano import InfrastructureNode, Nfvo, ResourceVector, Vim, VirtualLink, path_latency
from gridslice.service_orch import Nest
from gridslice.slice_orch import (
    LEGAL_TRANSITIONS,
    NetworkSliceInstance,
    SliceOrchestrator,
    SliceState,
    check_transition,
)

GOLDEN = Path(__file__).parent / "golden"


def make_nest(
    category=SliceCategory.URLLC,
    bandwidth=1.0,
    latency=10.0,
    devices=50,
    isolation="shared",
):
    return Nest(
        gst_id="gst-test",
        slice_type=category,
        max_latency_ms=latency,
        min_reliability=0.99999,
        guaranteed_bandwidth_mbps=bandwidth,
        max_device_density=devices,
        isolation=isolation,
        source_profile="intent-0001/p1",
    )


@pytest.fixture
def orch():
    vim = Vim.from_topology(load_builtin("topology.yaml"))
    return SliceOrchestrator(vim, Nfvo())


class TestTransitions:
    def test_legal_examples(self):
        assert check_transition(SliceState.ACTIVE, SliceState.UPDATING)
        assert not check_transition(SliceState.TERMINATED, SliceState.ACTIVE)

    def test_exhaustive_table_matches_golden(self):
        doc = json.loads((GOLDEN / "transition_matrix.json").read_text())
        for f in SliceState:
            for t in SliceState:
                assert doc["matrix"][f.value][t.value] == check_transition(f, t), (f, t)

    def test_terminated_is_absorbing(self):
        assert not any(
            frm is SliceState.TERMINATED for frm, _ in LEGAL_TRANSITIONS
        )


class TestInstantiate:
    def test_wams_reaches_active(self, orch):
        nsi = orch.instantiate(make_nest(), ("edge-1", "core-1"))
        assert nsi.state is SliceState.ACTIVE
        assert len(nsi.vnf_chain) == 2
        assert nsi.path
        orch.vim.assert_consistent()

    def test_active_slice_meets_latency_bound(self, orch):
        nsi = orch.instantiate(make_nest(), ("edge-1", "core-1"))
        processing = sum(
            orch.nfvo.descriptors[orch.vim.instances[i].vnf_type].processing_latency_ms
            for i in nsi.vnf_chain
        )
        assert path_latency(orch.vim, nsi.path) + processing <= nsi.nest.max_latency_ms

    def test_bandwidth_exhaustion_rolls_back(self, orch):
        before = orch.vim.ledger_checksum()
        with pytest.raises(ResourceExhausted):
            orch.instantiate(make_nest(bandwidth=10_000.0, devices=400), ("edge-1", "core-1"))
        assert orch.vim.ledger_checksum() == before
        nsi = next(iter(orch.slices.values()))
        assert nsi.state is SliceState.TERMINATED
        assert nsi.vnf_chain == [] and nsi.link_allocations == []

    def test_unreachable_latency_is_placement_failure(self, orch):
        with pytest.raises(PlacementFailed):
            orch.instantiate(make_nest(latency=0.1), ("edge-1", "core-1"))
        assert orch.vim.ledger_checksum() == (
            (("agg-1", 0.0, 0.0), ("core-1", 0.0, 0.0), ("edge-1", 0.0, 0.0)),
            (("l-agg-core", 0.0), ("l-edge-agg", 0.0), ("l-edge-core", 0.0)),
        )


class TestUpdate:
    def test_bandwidth_raise_with_spare_capacity(self, orch):
        nsi = orch.instantiate(make_nest(bandwidth=1.0), ("edge-1", "core-1"))
        updated = orch.update(nsi.id, make_nest(bandwidth=2.0))
        assert updated.state is SliceState.ACTIVE
        assert updated.nest.guaranteed_bandwidth_mbps == 2.0
        orch.vim.assert_consistent()
        for link_id in set(updated.path):
            assert orch.vim.links[link_id].used_bw == pytest.approx(
                2.0 * updated.path.count(link_id)
            )

    def test_make_before_break_denies_self_blocking_update(self):
        """An update that only fits once the slice's own reservation is freed
        must be rejected: old resources are released only after the new ones
        are secured."""
        vim = Vim()
        vim.nodes["n0"] = InfrastructureNode(id="n0", capacity=ResourceVector(16, 16384))
        vim.nodes["n1"] = InfrastructureNode(id="n1", capacity=ResourceVector(16, 16384))
        vim.links["l0"] = VirtualLink(
            id="l0", endpoints=("n0", "n1"), capacity_bw=10.0, base_latency=1.0
        )
        orch = SliceOrchestrator(vim, Nfvo())
        nsi = orch.instantiate(make_nest(bandwidth=6.0), ("n0", "n1"))
        assert vim.links["l0"].used_bw == pytest.approx(6.0)
        # 5 Mbps fits alone (10 total) but not alongside the existing 6.
        with pytest.raises(ResourceExhausted):
            orch.update(nsi.id, make_nest(bandwidth=5.0))
        fresh = orch.get(nsi.id)
        assert fresh.state is SliceState.ACTIVE
        assert fresh.nest.guaranteed_bandwidth_mbps == 6.0
        assert vim.links["l0"].used_bw == pytest.approx(6.0)
        vim.assert_consistent()

    def test_degraded_rehome_releases_exact_vector(self, orch):
        nsi = orch.instantiate(make_nest(), ("edge-1", "core-1"))
        old_allocations = dict()
        for node_id, demand in nsi.node_allocations:
            old_allocations[node_id] = (
                old_allocations.get(node_id, ResourceVector()) + demand
            )
        usage_before = {
            n.id: (n.usage.cpu, n.usage.memory_mb) for n in orch.vim.nodes.values()
        }
        orch.mark_degraded(nsi.id, "test")
        updated = orch.update(nsi.id, nsi.nest, avoid_links=frozenset(nsi.path))
        assert updated.state is SliceState.ACTIVE
        for node_id, released in old_allocations.items():
            if node_id in {n for n, _ in updated.node_allocations}:
                continue
            usage = orch.vim.nodes[node_id].usage
            assert usage.cpu == pytest.approx(usage_before[node_id][0] - released.cpu)
        orch.vim.assert_consistent()

    def test_update_requires_active_or_degraded(self, orch):
        nsi = orch.instantiate(make_nest(), ("edge-1", "core-1"))
        orch.terminate(nsi.id)
        with pytest.raises(IllegalState):
            orch.update(nsi.id, make_nest(bandwidth=2.0))


class TestTerminate:
    def test_usage_returns_to_zero(self, orch):
        before = orch.vim.ledger_checksum()
        nsi = orch.instantiate(make_nest(), ("edge-1", "core-1"))
        orch.terminate(nsi.id)
        assert orch.vim.ledger_checksum() == before
        assert nsi.state is SliceState.TERMINATED
        assert nsi.vnf_chain == [] and nsi.node_allocations == []

    def test_requested_terminates_without_mano_calls(self, orch):
        nsi = NetworkSliceInstance(id="nsi-raw", nest=make_nest())
        orch.slices[nsi.id] = nsi
        version_before = orch.vim.version
        orch.terminate(nsi.id)
        assert nsi.state is SliceState.TERMINATED
        assert orch.vim.version == version_before

    def test_double_terminate_is_illegal(self, orch):
        nsi = orch.instantiate(make_nest(), ("edge-1", "core-1"))
        orch.terminate(nsi.id)
        with pytest.raises(IllegalState):
            orch.terminate(nsi.id)


def random_topology(rng: random.Random, max_nodes: int = 10) -> Vim:
    vim = Vim()
    n = rng.randint(1, max_nodes)
    for i in range(n):
        vim.nodes[f"n{i}"] = InfrastructureNode(
            id=f"n{i}",
            capacity=ResourceVector(rng.uniform(4, 32), rng.uniform(4096, 32768)),
        )
    # random connected-ish graph: a spanning chain plus extra edges
    link_seq = 0
    for i in range(1, n):
        vim.links[f"l{link_seq}"] = VirtualLink(
            id=f"l{link_seq}",
            endpoints=(f"n{rng.randint(0, i - 1)}", f"n{i}"),
            capacity_bw=rng.choice([10.0, 50.0, 200.0]),
            base_latency=rng.uniform(0.5, 5.0),
        )
        link_seq += 1
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(range(n), 2) if n >= 2 else (0, 0)
        if a == b:
            continue
        vim.links[f"l{link_seq}"] = VirtualLink(
            id=f"l{link_seq}",
            endpoints=(f"n{a}", f"n{b}"),
            capacity_bw=rng.choice([10.0, 50.0]),
            base_latency=rng.uniform(0.5, 5.0),
        )
        link_seq += 1
    return vim


def run_conservation_fuzz(n_ops: int, seed: int) -> int:
    """Random instantiate/update/terminate storm across random topologies.

    Asserts ledger consistency after every operation and zero residual usage
    after terminating everything; returns the number of operations executed.
    """
    rng = random.Random(seed)
    executed = 0
    while executed < n_ops:
        vim = random_topology(rng)
        orch = SliceOrchestrator(vim, Nfvo())
        node_ids = sorted(vim.nodes)
        active: list[str] = []
        batch = min(n_ops - executed, rng.randint(5, 40))
        for _ in range(batch):
            roll = rng.random()
            try:
                if roll < 0.5 or not active:
                    category = rng.choice(list(SliceCategory))
                    nest = make_nest(
                        category=category,
                        bandwidth=rng.choice([0.5, 1.0, 5.0, 25.0, 500.0]),
                        latency=rng.choice([2.0, 10.0, 100.0, 1000.0]),
                        devices=rng.choice([10, 100, 10000]),
                        isolation=rng.choice(["shared", "shared", "dedicated"]),
                    )
                    endpoints = (rng.choice(node_ids), rng.choice(node_ids))
                    nsi = orch.instantiate(nest, endpoints)
                    active.append(nsi.id)
                elif roll < 0.75:
                    nsi_id = rng.choice(active)
                    current = orch.get(nsi_id)
                    new_nest = make_nest(
                        category=current.nest.slice_type,
                        bandwidth=rng.choice([0.5, 1.0, 2.0, 10.0]),
                        latency=current.nest.max_latency_ms,
                        devices=current.nest.max_device_density,
                    )
                    orch.update(nsi_id, new_nest)
                else:
                    nsi_id = active.pop(rng.randrange(len(active)))
                    orch.terminate(nsi_id)
            except (PlacementFailed, ResourceExhausted):
                active = [
                    s for s in active if orch.get(s).state is not SliceState.TERMINATED
                ]
            vim.assert_consistent()
            executed += 1
        for nsi_id in list(active):
            orch.terminate(nsi_id)
            vim.assert_consistent()
        for node in vim.nodes.values():
            assert abs(node.usage.cpu) < 1e-6 and abs(node.usage.memory_mb) < 1e-6
        for link in vim.links.values():
            assert abs(link.used_bw) < 1e-6
    return executed


def test_conservation_fuzz_small():
    assert run_conservation_fuzz(200, seed=11) == 200
