"""Independent brute-force oracles used by the test suite.

The placement oracle deliberately shares no code with the production search:
segments are found by exhaustive simple-path enumeration (DFS) instead of
Dijkstra, and assignments are scored from scratch. Topologies fed to it are
built with subset-sum-unique link latencies so minimum-latency paths are
unique and verdicts are tie-independent.
"""

from __future__ import annotations

import itertools

from gridslice.mano import PlannedVnf, ResourceVector, Vim


def all_simple_paths(vim: Vim, src: str, dst: str) -> list[list[str]]:
    """Every simple path (as a link-id list) from src to dst, DFS order."""
    adjacency: dict[str, list[tuple[str, str]]] = {n: [] for n in vim.nodes}
    for link in vim.links.values():
        a, b = link.endpoints
        adjacency[a].append((b, link.id))
        adjacency[b].append((a, link.id))
    for entries in adjacency.values():
        entries.sort()

    paths: list[list[str]] = []

    def dfs(node: str, visited: set[str], trail: list[str]):
        if node == dst:
            paths.append(list(trail))
            return
        for neighbor, link_id in adjacency[node]:
            if neighbor in visited:
                continue
            visited.add(neighbor)
            trail.append(link_id)
            dfs(neighbor, visited, trail)
            trail.pop()
            visited.remove(neighbor)

    dfs(src, {src}, [])
    return paths


def _best_segment(
    vim: Vim, src: str, dst: str, bandwidth: float, avoid: frozenset[str]
) -> tuple[float, tuple[str, ...]] | None:
    if src == dst:
        return (0.0, ())
    best = None
    for path in all_simple_paths(vim, src, dst):
        if any(link_id in avoid for link_id in path):
            continue
        if any(vim.links[l].residual_bw() + 1e-9 < bandwidth for l in path):
            continue
        latency = sum(vim.links[l].latency() for l in path)
        key = (latency, tuple(path))
        if best is None or key < best:
            best = key
    return best


def oracle_place(
    vim: Vim,
    chain: list[PlannedVnf],
    endpoints: tuple[str, str],
    bandwidth: float,
    max_latency: float,
    avoid: frozenset[str] = frozenset(),
) -> tuple[bool, float | None]:
    """(feasible, minimum total latency) by exhaustive search."""
    zero = ResourceVector()
    nodes = sorted(vim.nodes)
    best_total = None
    for assignment in itertools.product(nodes, repeat=len(chain)):
        loads: dict[str, ResourceVector] = {}
        for vnf, node_id in zip(chain, assignment):
            loads[node_id] = loads.get(node_id, zero) + vnf.demand
        if any(
            not (vim.nodes[n].usage + load).fits_within(vim.nodes[n].capacity)
            for n, load in loads.items()
        ):
            continue
        waypoints = [endpoints[0], *assignment, endpoints[1]]
        segments = []
        reachable = True
        for a, b in zip(waypoints, waypoints[1:]):
            seg = _best_segment(vim, a, b, bandwidth, avoid)
            if seg is None:
                reachable = False
                break
            segments.append(seg)
        if not reachable:
            continue
        counts: dict[str, int] = {}
        for _, path in segments:
            for link_id in path:
                counts[link_id] = counts.get(link_id, 0) + 1
        if any(
            vim.links[l].used_bw + n * bandwidth > vim.links[l].capacity_bw + 1e-9
            for l, n in counts.items()
        ):
            continue
        total = sum(lat for lat, _ in segments) + sum(v.processing_latency_ms for v in chain)
        if total > max_latency + 1e-9:
            continue
        if best_total is None or total < best_total:
            best_total = total
    return (best_total is not None, best_total)


# --- topology grid ------------------------------------------------------------

NODE_CAPACITIES = [(4.0, 4096.0), (2.0, 2048.0), (8.0, 8192.0), (1.0, 512.0)]
LINK_CAPACITIES = [10.0, 50.0]
# Distinct powers of two: every subset of links has a unique latency sum, so
# minimum-latency paths are unique and oracle comparisons are tie-free.
LINK_LATENCIES = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]


def build_grid_vim(n_nodes: int, edge_mask: int, loaded: bool = False) -> Vim:
    """Topology from the exhaustive parameter grid.

    `edge_mask` selects a subset of the C(n,2) candidate edges. With
    loaded=True, the first node and the first link carry prior usage.
    """
    vim = Vim()
    from gridslice.mano import InfrastructureNode, VirtualLink

    names = [f"n{i}" for i in range(n_nodes)]
    for i, name in enumerate(names):
        cpu, mem = NODE_CAPACITIES[i % len(NODE_CAPACITIES)]
        vim.nodes[name] = InfrastructureNode(id=name, capacity=ResourceVector(cpu, mem))
    pairs = list(itertools.combinations(range(n_nodes), 2))
    for j, (a, b) in enumerate(pairs):
        if not edge_mask & (1 << j):
            continue
        vim.links[f"l{j}"] = VirtualLink(
            id=f"l{j}",
            endpoints=(names[a], names[b]),
            capacity_bw=LINK_CAPACITIES[j % len(LINK_CAPACITIES)],
            base_latency=LINK_LATENCIES[j],
        )
    if loaded:
        first = vim.nodes[names[0]]
        first.usage = ResourceVector(first.capacity.cpu * 0.75, first.capacity.memory_mb * 0.75)
        for link in vim.links.values():
            link.used_bw = link.capacity_bw * 0.5
            break
    return vim


def grid_cases(max_nodes: int = 4):
    """Yield (n_nodes, edge_mask, loaded) over the whole grid."""
    for n in range(1, max_nodes + 1):
        n_pairs = n * (n - 1) // 2
        for mask in range(1 << n_pairs):
            for loaded in (False, True):
                yield n, mask, loaded
