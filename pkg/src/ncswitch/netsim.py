"""Deterministic discrete-event simulation of hosts, links and emulated switches.

Time is integer nanoseconds. Events are ordered by (time, insertion sequence),
so a run is a pure function of its inputs and seed.
"""
from __future__ import annotations

import csv
import heapq
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .codec import NextPrimitive, Packet, original_header
from .config import ConfigDocument
from .dataplane import Switch, TraversalRecord
from .topology import Link, Topology, node_key

NS = 10**9


class ScenarioError(ValueError):
    pass


class UndefinedRate(ValueError):
    pass


class EventKind(Enum):
    HOST_SEND = "host-send"
    LINK_DELIVER = "link-deliver"
    EGRESS = "egress"
    LINK_FAIL = "link-fail"
    LINK_RESTORE = "link-restore"
    STREAM_END = "stream-end"


@dataclass(frozen=True)
class HostProcess:
    """A sending host. ``rate`` is payload bits/s for the exponential law."""

    host: str
    stream_id: int
    packets: int
    payload_size: int
    law: str = "exponential"
    rate: float = 0.0
    start: float = 0.0

    def __post_init__(self):
        if self.packets < 0:
            raise ScenarioError("packet count must be non-negative")
        if not 1 <= self.payload_size <= 0xFFFF:
            raise ScenarioError("payload size must be in 1..65535")
        if self.law not in ("exponential", "back-to-back"):
            raise ScenarioError(f"unknown inter-packet law {self.law!r}")
        if self.law == "exponential" and self.rate <= 0:
            raise ScenarioError("exponential sending needs a positive rate")


@dataclass(frozen=True)
class Failure:
    time: float
    link: str
    action: str = "fail"

    def __post_init__(self):
        if self.action not in ("fail", "restore"):
            raise ScenarioError(f"unknown failure action {self.action!r}")


@dataclass(frozen=True)
class Delivery:
    timestamp_ns: int
    stream_id: int
    batch: int
    index: int
    payload: bytes


@dataclass(frozen=True)
class Sent:
    timestamp_ns: int
    stream_id: int
    seq: int
    payload_len: int


def make_payload(stream_id: int, seq: int, size: int) -> bytes:
    """Reproducible payload: 4-byte sequence number then a position pattern."""
    body = (np.arange(size, dtype=np.uint32) * 7 + seq * 13 + stream_id) & 0xFF
    return (seq.to_bytes(4, "big") + body.astype(np.uint8).tobytes())[:size]


def payload_seq(payload: bytes) -> int:
    return int.from_bytes(payload[:4], "big")


@dataclass
class LinkState:
    link: Link
    up: bool = True
    busy_until: int = 0
    epoch: int = 0
    carried: int = 0
    delivered: int = 0
    dropped: int = 0  # offered while the link was down
    lost: int = 0  # cut while queued or in flight


@dataclass
class EventTrace:
    deliveries: dict[str, list[Delivery]] = field(default_factory=dict)
    sent: dict[str, list[Sent]] = field(default_factory=dict)
    counters: dict[str, dict[str, int]] = field(default_factory=dict)
    records: dict[str, list[TraversalRecord]] = field(default_factory=dict)
    branches: dict[str, dict[int, dict[int, str]]] = field(default_factory=dict)
    link_counters: dict[str, dict[str, int]] = field(default_factory=dict)
    end_ns: int = 0

    def delivery_csv(self, receiver: str) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["timestamp_ns", "stream_id", "batch", "index", "payload_len"])
        for d in self.deliveries.get(receiver, []):
            w.writerow([d.timestamp_ns, d.stream_id, d.batch, d.index, len(d.payload)])
        return buf.getvalue()

    def counters_csv(self, switch: str) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["counter", "value"])
        for name, value in self.counters[switch].items():
            w.writerow([name, value])
        return buf.getvalue()

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for host in sorted(self.deliveries, key=node_key):
            p = out / f"deliveries_{host}.csv"
            p.write_text(self.delivery_csv(host))
            written.append(p)
        for sw in sorted(self.counters, key=node_key):
            p = out / f"counters_{sw}.csv"
            p.write_text(self.counters_csv(sw))
            written.append(p)
        return written

    def total(self, name: str) -> int:
        return sum(c.get(name, 0) for c in self.counters.values())


def _rate(timestamps: list[int], nbytes: int) -> float:
    if len(timestamps) < 2:
        raise UndefinedRate(f"need at least two events for a rate, got {len(timestamps)}")
    span = timestamps[-1] - timestamps[0]
    if span <= 0:
        raise UndefinedRate("all events share one timestamp")
    return nbytes * 8 * NS / span


def received_rate(trace: EventTrace, receiver: str) -> float:
    """Delivered payload bits over the delivery window, in bits/s."""
    log = trace.deliveries.get(receiver, [])
    return _rate([d.timestamp_ns for d in log], sum(len(d.payload) for d in log))


def send_rate(trace: EventTrace, sender: str) -> float:
    log = trace.sent.get(sender, [])
    return _rate([s.timestamp_ns for s in log], sum(s.payload_len for s in log))


class Simulator:
    def __init__(self, topology: Topology, config: ConfigDocument, hosts: list[HostProcess],
                 failures: list[Failure] = (), seed: int = 0, wallclock: bool = False):
        self.topology = topology
        self.config = config
        self.seed = seed
        self.switches: dict[str, Switch] = config.build_switches(wallclock=wallclock)
        for name in self.switches:
            if name not in topology.nodes or topology.is_host(name):
                raise ScenarioError(f"config names switch {name} missing from the topology")
        self.links = {l.ref: LinkState(l) for l in topology.links}
        self._heap: list = []
        self._seq = 0
        self.now = 0
        self.trace = EventTrace()
        self.first: dict[tuple[str, int], NextPrimitive] = {}
        for role in config.senders():
            self.first[(role.host, role.stream_id)] = role.first or NextPrimitive.FORWARD
        self.receivers = {(r.host, r.stream_id) for r in config.receivers()}
        for host, _ in self.receivers:
            self.trace.deliveries.setdefault(host, [])
        self.hosts = sorted(hosts, key=lambda h: (node_key(h.host), h.stream_id))
        seqs = np.random.SeedSequence(seed).spawn(len(self.hosts))
        self._rngs = [np.random.default_rng(s) for s in seqs]
        for i, hp in enumerate(self.hosts):
            if (hp.host, hp.stream_id) not in self.first:
                raise ScenarioError(f"host {hp.host} has no send role for stream {hp.stream_id}")
            self.trace.sent.setdefault(hp.host, [])
            if hp.packets:
                self._push(round(hp.start * NS), EventKind.HOST_SEND, (i, 0))
        for f in failures:
            if f.action == "fail":
                self.inject_failure(f.time, f.link)
            else:
                self.restore(f.time, f.link)

    def _push(self, t: int, kind: EventKind, data) -> None:
        heapq.heappush(self._heap, (t, self._seq, kind, data))
        self._seq += 1

    def _state(self, ref: str) -> LinkState:
        try:
            return self.links[ref]
        except KeyError:
            raise ScenarioError(f"unknown link {ref}") from None

    def inject_failure(self, time: float, link: str) -> None:
        self._state(link)
        self._push(round(time * NS), EventKind.LINK_FAIL, link)

    def restore(self, time: float, link: str) -> None:
        self._state(link)
        self._push(round(time * NS), EventKind.LINK_RESTORE, link)

    # event handlers
    def _transmit(self, link: Link, pkt: Packet) -> None:
        st = self.links[link.ref]
        if not st.up:
            st.dropped += 1
            return
        wire = pkt.wire()
        start = max(self.now, st.busy_until)
        st.busy_until = start + link.serialization_ns(len(wire))
        st.carried += 1
        self._push(st.busy_until + link.delay_ns, EventKind.LINK_DELIVER, (link.ref, st.epoch, wire))

    def _host_send(self, i: int, seq: int) -> None:
        hp = self.hosts[i]
        uplink = self.topology.uplink(hp.host)
        first = self.first[(hp.host, hp.stream_id)]
        payload = make_payload(hp.stream_id, seq, hp.payload_size)
        pkt = Packet(original_header(hp.stream_id, seq, first, len(payload)), payload)
        self.trace.sent[hp.host].append(Sent(self.now, hp.stream_id, seq, len(payload)))
        self._transmit(uplink, pkt)
        if seq + 1 < hp.packets:
            if hp.law == "back-to-back":
                gap = uplink.serialization_ns(len(pkt.wire()))
            else:
                gap = round(self._rngs[i].exponential(hp.payload_size * 8 / hp.rate) * NS)
            self._push(self.now + gap, EventKind.HOST_SEND, (i, seq + 1))
        elif first is NextPrimitive.SPLIT:
            self._push(self.now, EventKind.STREAM_END, i)

    def _stream_end(self, i: int) -> None:
        hp = self.hosts[i]
        first = self.first[(hp.host, hp.stream_id)]
        marker = Packet(original_header(hp.stream_id, hp.packets, first, 0), b"")
        self._transmit(self.topology.uplink(hp.host), marker)

    def _deliver(self, ref: str, epoch: int, wire: bytes) -> None:
        st = self.links[ref]
        if epoch != st.epoch:
            st.lost += 1
            return
        st.delivered += 1
        link = st.link
        pkt = Packet.from_wire(wire)
        if self.topology.is_host(link.dst):
            h = pkt.header
            if (link.dst, h.stream_id) in self.receivers and pkt.payload:
                idx = h.basis_index
                self.trace.deliveries[link.dst].append(Delivery(
                    self.now, h.stream_id, h.batch_number, 0 if idx is None else idx, pkt.payload))
            return
        sw = self.switches.get(link.dst)
        if sw is None:
            return
        for out, port in sw.ingress(pkt, link.dst_port, self.now):
            self._push(out.egress_ns, EventKind.EGRESS, (link.dst, port, out))

    def _egress(self, node: str, port: int, pkt: Packet) -> None:
        link = self.topology.link_from(node, port)
        if link is None:
            self.switches[node].counters["no_link_drops"] += 1
            return
        self._transmit(link, pkt)

    def _link_event(self, ref: str, up: bool) -> None:
        st = self.links[ref]
        if not up and st.up:
            # cut the wire: queued and in-flight packets are gone
            st.epoch += 1
            st.busy_until = self.now
        st.up = up

    def run(self, until: float | None = None) -> EventTrace:
        limit = None if until is None else round(until * NS)
        while self._heap:
            t, _, kind, data = self._heap[0]
            if limit is not None and t > limit:
                break
            heapq.heappop(self._heap)
            self.now = t
            if kind is EventKind.HOST_SEND:
                self._host_send(*data)
            elif kind is EventKind.LINK_DELIVER:
                self._deliver(*data)
            elif kind is EventKind.EGRESS:
                self._egress(*data)
            elif kind is EventKind.LINK_FAIL:
                self._link_event(data, False)
            elif kind is EventKind.LINK_RESTORE:
                self._link_event(data, True)
            elif kind is EventKind.STREAM_END:
                self._stream_end(data)
        return self._finish()

    def _finish(self) -> EventTrace:
        tr = self.trace
        tr.end_ns = self.now
        for name, sw in sorted(self.switches.items(), key=lambda kv: node_key(kv[0])):
            tr.counters[name] = sw.snapshot()
            tr.records[name] = sw.records
            tr.branches[name] = {sid: dict(b.branches) for sid, b in sw.banks.items()}
        in_flight = Counter(data[0] for _, _, kind, data in self._heap if kind is EventKind.LINK_DELIVER)
        for ref, st in sorted(self.links.items(), key=lambda kv: node_key(kv[0])):
            tr.link_counters[ref] = {"carried": st.carried, "delivered": st.delivered,
                                     "dropped": st.dropped, "lost": st.lost, "in_flight": in_flight[ref]}
        return tr


def run(topology: Topology, config: ConfigDocument, hosts: list[HostProcess],
        failures: list[Failure] = (), seed: int = 0, wallclock: bool = False) -> EventTrace:
    return Simulator(topology, config, hosts, failures, seed, wallclock).run()


@dataclass
class Scenario:
    topology: Topology
    config: ConfigDocument
    hosts: list[HostProcess]
    failures: list[Failure]
    seed: int = 0

    def run(self) -> EventTrace:
        return run(self.topology, self.config, self.hosts, self.failures, self.seed)


def load_scenario(path) -> Scenario:
    """Parse a scenario file. Relative paths resolve against the file's directory.

    ::

        topology butterfly.topo
        config butterfly.conf
        seed 7
        send h1 stream=1 packets=1000 size=4096 law=exponential rate=16000 start=0
        fail 12.5 s1:2
        restore 30 s1:2
    """
    path = Path(path)
    base = path.parent
    topo = config = None
    hosts, failures, seed = [], [], 0
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "topology":
                topo = Topology.load(base / parts[1])
            elif parts[0] == "config":
                config = ConfigDocument.load(base / parts[1])
            elif parts[0] == "seed":
                seed = int(parts[1])
            elif parts[0] == "send":
                kv = dict(p.split("=", 1) for p in parts[2:])
                hosts.append(HostProcess(parts[1], int(kv["stream"]), int(kv["packets"]), int(kv["size"]),
                                         kv.get("law", "exponential"), float(kv.get("rate", 0)),
                                         float(kv.get("start", 0))))
            elif parts[0] in ("fail", "restore"):
                failures.append(Failure(float(parts[1]), parts[2], parts[0]))
            else:
                raise ScenarioError(f"unknown directive {parts[0]!r}")
        except (ValueError, KeyError, IndexError) as exc:
            raise ScenarioError(f"{path.name} line {lineno}: {exc}") from None
    if topo is None or config is None:
        raise ScenarioError(f"{path.name}: scenario needs a topology and a config")
    for f in failures:
        if f.link not in {l.ref for l in topo.links}:
            raise ScenarioError(f"{path.name}: failure names unknown link {f.link}")
    return Scenario(topo, config, hosts, failures, seed)


def sent_by_stream(trace: EventTrace) -> dict[int, int]:
    out: dict[int, int] = defaultdict(int)
    for log in trace.sent.values():
        for s in log:
            out[s.stream_id] += 1
    return dict(out)
