"""Max-flow, multicast rate bound and edge-disjoint path extraction."""
from __future__ import annotations

from collections import defaultdict, deque

from .topology import Link, Topology, node_key


class InfeasibleError(ValueError):
    """Not enough capacity or disjoint paths; ``cut`` lists the bottleneck link refs."""

    def __init__(self, message: str, cut: tuple[str, ...] = ()):
        super().__init__(message)
        self.cut = cut


def _capacities(topology: Topology):
    cap = defaultdict(float)
    adj = defaultdict(set)
    for l in topology.links:
        cap[(l.src, l.dst)] += l.bandwidth
        adj[l.src].add(l.dst)
        adj[l.dst].add(l.src)
    return cap, {n: sorted(vs, key=node_key) for n, vs in adj.items()}


def max_flow(topology: Topology, s: str, t: str):
    """Value of a maximum s-t flow (Edmonds-Karp on aggregated parallel links)."""
    if s == t:
        raise ValueError("source and sink must differ")
    for n in (s, t):
        if n not in topology.nodes:
            raise ValueError(f"unknown node {n}")
    cap, adj = _capacities(topology)
    flow = defaultdict(float)
    total = 0
    while True:
        parent = {s: None}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v in adj.get(u, ()):
                if v not in parent and cap[(u, v)] - flow[(u, v)] > 0:
                    parent[v] = u
                    q.append(v)
        if t not in parent:
            break
        path = []
        v = t
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(cap[e] - flow[e] for e in path)
        for u, v in path:
            flow[(u, v)] += push
            flow[(v, u)] -= push
        total += push
    return int(total) if float(total).is_integer() else total


def min_multicast_rate(topology: Topology, s: str, receivers) -> float:
    receivers = list(receivers)
    if not receivers:
        raise ValueError("receivers must be nonempty")
    return min(max_flow(topology, s, t) for t in dict.fromkeys(receivers))


def _residual_neighbors(topology: Topology, u: str, used: set[Link]):
    """Unit-capacity residual moves out of u, in deterministic order."""
    moves = []
    for l in topology.links:
        if l.src == u and l not in used:
            moves.append((node_key(l.dst), l.src_port, 0, l.dst, l, +1))
        elif l.dst == u and l in used:
            moves.append((node_key(l.src), l.dst_port, 1, l.src, l, -1))
    moves.sort(key=lambda m: m[:3])
    return [(m[3], m[4], m[5]) for m in moves]


def edge_disjoint_paths(topology: Topology, s: str, t: str, n: int) -> list[list[Link]]:
    """n pairwise edge-disjoint s-t paths, each a list of links.

    Every directed link has unit capacity; parallel links count separately.
    Ties are broken by lowest node id, then lowest port.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    used: set[Link] = set()
    found = 0
    while found < n:
        parent: dict[str, tuple[str, Link, int] | None] = {s: None}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v, link, direction in _residual_neighbors(topology, u, used):
                if v not in parent:
                    parent[v] = (u, link, direction)
                    q.append(v)
        if t not in parent:
            cut = tuple(sorted(
                (l.ref for l in topology.links if l.src in parent and l.dst not in parent),
                key=node_key))
            raise InfeasibleError(
                f"only {found} edge-disjoint {s}->{t} paths, {n} requested; bottleneck cut {', '.join(cut)}",
                cut)
        v = t
        while parent[v] is not None:
            u, link, direction = parent[v]
            if direction > 0:
                used.add(link)
            else:
                used.discard(link)
            v = u
        found += 1
    return _decompose(topology, s, t, used)


def _decompose(topology: Topology, s: str, t: str, used: set[Link]) -> list[list[Link]]:
    remaining = set(used)
    paths = []
    while True:
        outs = [l for l in remaining if l.src == s]
        if not outs:
            break
        walk: list[Link] = []
        seen = {s: 0}
        u = s
        while u != t:
            nxt = min((l for l in remaining if l.src == u and l not in walk),
                      key=lambda l: (node_key(l.dst), l.src_port))
            walk.append(nxt)
            u = nxt.dst
            if u in seen:
                # a flow cycle carries nothing end to end; drop it
                start = seen[u]
                remaining.difference_update(walk[start:])
                del walk[start:]
                seen = {node: i for node, i in seen.items() if i <= start}
            else:
                seen[u] = len(walk)
        remaining.difference_update(walk)
        paths.append(walk)
    return paths


def path_nodes(path: list[Link]) -> list[str]:
    return [path[0].src] + [l.dst for l in path]
