"""Reference implementations used only by the tests."""
import itertools

import numpy as np

from ncswitch.topology import Link, Topology


def brute_min_cut(topology: Topology, s: str, t: str) -> float:
    """Minimum s-t cut by enumerating every vertex bipartition."""
    others = [n for n in topology.nodes if n not in (s, t)]
    best = float("inf")
    for bits in itertools.product((0, 1), repeat=len(others)):
        side = {s} | {n for n, b in zip(others, bits) if b}
        cut = sum(l.bandwidth for l in topology.links if l.src in side and l.dst not in side)
        best = min(best, cut)
    return best


def random_topology(rng: np.random.Generator, max_nodes: int = 8, max_cap: int = 5) -> Topology:
    n = int(rng.integers(2, max_nodes + 1))
    topo = Topology()
    for i in range(n):
        topo.add_node(f"n{i}", "switch")
    out_port = [1] * n
    in_port = [1] * n
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < 0.35:
                for _ in range(int(rng.integers(1, 3)) if rng.random() < 0.2 else 1):
                    topo.add_link(Link(f"n{u}", out_port[u], f"n{v}", in_port[v], int(rng.integers(1, max_cap + 1)), 0.0))
                    out_port[u] += 1
                    in_port[v] += 1
    return topo
