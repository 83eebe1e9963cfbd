"""Compile coding functions into per-switch configuration documents."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from . import gf
from .codec import NextPrimitive
from .config import ConfigDocument, HostRole, StreamInfo
from .dataplane import TableEntry
from .flows import InfeasibleError, edge_disjoint_paths, min_multicast_rate
from .primitives import CodeRow, Kind, Output, PrimitiveConfig
from .topology import Link, Topology, node_key

FWD = NextPrimitive.FORWARD
GATHER = NextPrimitive.GATHER


class CompileError(ValueError):
    pass


class AdmissionError(CompileError):
    """Requested rate exceeds the multicast capacity of the topology."""


@dataclass(frozen=True)
class StreamSpec:
    stream_id: int
    source: str
    receivers: tuple[str, ...]
    rate: float = 0.0
    gen_size: int = 2
    kind: str = "diversity"
    paths: int = 3

    def __post_init__(self):
        if not self.receivers:
            raise CompileError("a stream needs at least one receiver")
        if self.kind not in ("diversity", "butterfly", "forwarding"):
            raise CompileError(f"unknown function kind {self.kind!r}")
        if self.kind == "diversity" and len(set(self.receivers)) != 1:
            raise CompileError("diversity coding is unicast")


def _new_doc(topology: Topology, spec: StreamSpec, function: str, k: int) -> ConfigDocument:
    doc = ConfigDocument()
    doc.streams[spec.stream_id] = StreamInfo(spec.stream_id, function, k)
    for i, name in enumerate(topology.switches(), 1):
        doc.switch_ids[name] = i
    return doc


def _check_hosts(topology: Topology, spec: StreamSpec) -> None:
    for h in (spec.source, *spec.receivers):
        if not topology.is_host(h):
            raise CompileError(f"{h} is not a host in the topology")


def _admit(topology: Topology, spec: StreamSpec) -> None:
    if spec.rate <= 0:
        return
    bound = min_multicast_rate(topology, spec.source, spec.receivers)
    if spec.rate > bound:
        raise AdmissionError(f"requested {spec.rate:g} bit/s exceeds min max-flow {bound:g} bit/s")


def _entry(stream_id, match, in_port, *actions) -> TableEntry:
    return TableEntry(stream_id, match, in_port, tuple(actions))


def _forward_along(doc: ConfigDocument, spec: StreamSpec, k: int, path: list[Link], label: NextPrimitive,
                   final_label: NextPrimitive) -> None:
    """Forward entries at every interior switch of ``path``, keyed by ingress port.

    Packets enter the path carrying ``label``; the last hop relabels them to
    ``final_label`` for the switch at the far end.
    """
    for prev, link in zip(path, path[1:]):
        last = link is path[-1]
        doc.add_entry(link.src, _entry(
            spec.stream_id, label, prev.dst_port,
            PrimitiveConfig(Kind.FORWARD, spec.stream_id, k, ports=(link.src_port,),
                            next_primitive=final_label if last else None)))


def _first_label(path: list[Link], final_label: NextPrimitive) -> NextPrimitive:
    return final_label if len(path) == 1 else FWD


def compile_diversity(topology: Topology, spec: StreamSpec) -> ConfigDocument:
    """k data paths plus one all-ones parity path between the edge switches."""
    if spec.kind != "diversity":
        raise CompileError("not a diversity stream")
    _check_hosts(topology, spec)
    k, p = spec.gen_size, spec.paths
    if p != k + 1:
        raise CompileError(f"diversity coding needs k+1 paths, got k={k}, paths={p}")
    _admit(topology, spec)
    up = topology.uplink(spec.source)
    down = topology.downlink(spec.receivers[0])
    ingress, egress = up.dst, down.src
    paths = edge_disjoint_paths(topology, ingress, egress, p)

    generator = [gf.basis(i, k) for i in range(k)] + [bytes([1] * k)]
    for subset in itertools.combinations(generator, k):
        if gf.rank(list(subset)) < k:
            raise CompileError("generator does not survive every single path failure")

    doc = _new_doc(topology, spec, "diversity", k)
    info = doc.streams[spec.stream_id]
    info.generator = generator
    info.paths = [[l.ref for l in path] for path in paths]
    sid = spec.stream_id

    assign = tuple(Output(paths[i][0].src_port, _first_label(paths[i], GATHER)) for i in range(k))
    parity = paths[k]
    doc.add_entry(ingress, _entry(
        sid, NextPrimitive.SPLIT, None,
        PrimitiveConfig(Kind.SPLIT, sid, k, assign=assign),
        PrimitiveConfig(Kind.CODE, sid, k, rows=(
            CodeRow(generator[k], parity[0].src_port, _first_label(parity, GATHER)),)),
    ))
    for path in paths:
        _forward_along(doc, spec, k, path, FWD, GATHER)
    doc.add_entry(egress, _entry(
        sid, GATHER, None,
        PrimitiveConfig(Kind.GATHER, sid, k),
        PrimitiveConfig(Kind.DECODE, sid, k, delivery_port=down.src_port),
    ))
    doc.hosts = [HostRole(spec.source, "send", sid, NextPrimitive.SPLIT),
                 HostRole(spec.receivers[0], "recv", sid)]
    return doc


def _shortest_path(topology: Topology, s: str, t: str, avoid: set[Link]) -> list[Link] | None:
    if s == t:
        return None
    parent: dict[str, Link | None] = {s: None}
    q = deque([s])
    while q:
        u = q.popleft()
        for l in sorted(topology.out_links(u), key=lambda l: (node_key(l.dst), l.src_port)):
            if l in avoid or l.dst in parent:
                continue
            if topology.is_host(l.dst) and l.dst != t:
                continue
            parent[l.dst] = l
            if l.dst == t:
                path = []
                v = t
                while parent[v] is not None:
                    path.append(parent[v])
                    v = parent[v].src
                return path[::-1]
            q.append(l.dst)
    return None


def _butterfly_embedding(topology: Topology, s: str, t1: str, t2: str):
    """Search (A, B, relay, tail) with nine mutually edge-disjoint segments.

    Returns the segment dict for the embedding with the fewest total hops,
    ties broken by node ids.
    """
    candidates = [n for n in topology.switches() if n not in (s, t1, t2)]
    best = None
    for a, b, r, u in itertools.permutations(candidates, 4):
        plan = [("sA", s, a), ("sB", s, b), ("At1", a, t1), ("Bt2", b, t2), ("Ar", a, r), ("Br", b, r),
                ("ru", r, u), ("ut1", u, t1), ("ut2", u, t2)]
        used: set[Link] = set()
        segs = {}
        for name, x, y in plan:
            path = _shortest_path(topology, x, y, used)
            if path is None:
                break
            segs[name] = path
            used.update(path)
        else:
            hops = sum(len(p) for p in segs.values())
            if best is None or hops < best[0]:
                best = (hops, (a, b, r, u), segs)
    if best is None:
        raise InfeasibleError(f"no butterfly embedding for {s} -> {t1}, {t2}")
    return best[1], best[2]


def compile_butterfly(topology: Topology, spec: StreamSpec) -> ConfigDocument:
    """Two-receiver multicast where a relay codes a+b onto the shared bottleneck."""
    if spec.kind != "butterfly":
        raise CompileError("not a butterfly stream")
    _check_hosts(topology, spec)
    if len(spec.receivers) != 2 or spec.receivers[0] == spec.receivers[1]:
        raise CompileError("the butterfly function serves exactly two receivers")
    if spec.gen_size != 2:
        raise CompileError("the butterfly code has generation size 2")
    _admit(topology, spec)
    k, sid = 2, spec.stream_id
    up = topology.uplink(spec.source)
    downs = [topology.downlink(h) for h in spec.receivers]
    s, t1, t2 = up.dst, downs[0].src, downs[1].src
    (a, b, r, u), seg = _butterfly_embedding(topology, s, t1, t2)

    doc = _new_doc(topology, spec, "butterfly", k)
    parity = bytes([1, 1])
    info = doc.streams[sid]
    info.generator = [gf.basis(0, k), gf.basis(1, k), parity]
    info.paths = [[l.ref for l in seg[n]] for n in ("sA", "At1", "sB", "Bt2", "Ar", "Br", "ru", "ut1", "ut2")]

    doc.add_entry(s, _entry(sid, NextPrimitive.SPLIT, None, PrimitiveConfig(
        Kind.SPLIT, sid, k, assign=(Output(seg["sA"][0].src_port, FWD), Output(seg["sB"][0].src_port, FWD)))))
    # branch heads multicast their original toward the receiver and the relay
    for head, into, direct, relay in ((a, seg["sA"], seg["At1"], seg["Ar"]), (b, seg["sB"], seg["Bt2"], seg["Br"])):
        _forward_along(doc, spec, k, into, FWD, FWD)
        doc.add_entry(head, _entry(sid, FWD, into[-1].dst_port, PrimitiveConfig(
            Kind.FORWARD, sid, k, ports=(direct[0].src_port, relay[0].src_port), next_primitive=GATHER)))
        for path in (direct, relay):
            _forward_along(doc, spec, k, path, GATHER, GATHER)
    for path in (seg["Ar"], seg["Br"]):
        doc.add_entry(r, _entry(
            sid, GATHER, path[-1].dst_port,
            PrimitiveConfig(Kind.GATHER, sid, k),
            PrimitiveConfig(Kind.CODE, sid, k, rows=(
                CodeRow(parity, seg["ru"][0].src_port, FWD),)),
        ))
    _forward_along(doc, spec, k, seg["ru"], FWD, FWD)
    doc.add_entry(u, _entry(sid, FWD, seg["ru"][-1].dst_port, PrimitiveConfig(
        Kind.FORWARD, sid, k, ports=(seg["ut1"][0].src_port, seg["ut2"][0].src_port), next_primitive=GATHER)))
    for path in (seg["ut1"], seg["ut2"]):
        _forward_along(doc, spec, k, path, GATHER, GATHER)
    for t, down, direct, shared in ((t1, downs[0], seg["At1"], seg["ut1"]), (t2, downs[1], seg["Bt2"], seg["ut2"])):
        for path in (direct, shared):
            doc.add_entry(t, _entry(
                sid, GATHER, path[-1].dst_port,
                PrimitiveConfig(Kind.GATHER, sid, k),
                PrimitiveConfig(Kind.DECODE, sid, k, delivery_port=down.src_port),
            ))

    for received in ([info.generator[0], parity], [info.generator[1], parity]):
        if gf.rank(received) < k:
            raise CompileError("a receiver cannot decode the butterfly code")
    doc.hosts = [HostRole(spec.source, "send", sid, NextPrimitive.SPLIT)]
    doc.hosts += [HostRole(h, "recv", sid) for h in spec.receivers]
    return doc


def compile_forwarding_baseline(topology: Topology, spec: StreamSpec) -> ConfigDocument:
    """Plain store-and-forward: one shortest-path multicast tree, no coding."""
    _check_hosts(topology, spec)
    _admit(topology, spec)
    sid = spec.stream_id
    parent: dict[str, Link | None] = {spec.source: None}
    q = deque([spec.source])
    while q:
        v = q.popleft()
        if topology.is_host(v) and v != spec.source:
            continue
        for l in sorted(topology.out_links(v), key=lambda l: (node_key(l.dst), l.src_port)):
            if l.dst not in parent:
                parent[l.dst] = l
                q.append(l.dst)
    tree: set[Link] = set()
    for h in spec.receivers:
        if h not in parent:
            raise InfeasibleError(f"receiver {h} unreachable from {spec.source}")
        v = h
        while parent[v] is not None:
            tree.add(parent[v])
            v = parent[v].src

    doc = _new_doc(topology, spec, "forwarding", 1)
    for sw in topology.switches():
        ports = tuple(sorted(l.src_port for l in tree if l.src == sw))
        if ports:
            doc.add_entry(sw, _entry(sid, FWD, None, PrimitiveConfig(Kind.FORWARD, sid, 1, ports=ports)))
    doc.streams[sid].paths = [[l.ref for l in sorted(tree, key=lambda l: (node_key(l.src), l.src_port))]]
    doc.hosts = [HostRole(spec.source, "send", sid, FWD)]
    doc.hosts += [HostRole(h, "recv", sid) for h in dict.fromkeys(spec.receivers)]
    return doc


def compile_stream(topology: Topology, spec: StreamSpec) -> ConfigDocument:
    return {
        "diversity": compile_diversity,
        "butterfly": compile_butterfly,
        "forwarding": compile_forwarding_baseline,
    }[spec.kind](topology, spec)
