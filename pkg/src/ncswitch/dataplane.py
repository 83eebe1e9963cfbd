"""Emulated programmable switch: match tables, register banks, clone and recirculate.

One call to :meth:`Switch.ingress` is one *traversal*: the arriving packet's
pass through the ingress pipeline plus every recirculated pass it triggers.
Processing latency is not measured but derived from counters through a
:class:`CostModel`, so identical inputs always give identical timestamps.
"""
from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass, replace
from typing import Callable

from .codec import NextPrimitive, Packet, Telemetry
from .primitives import ACTIONS, PrimitiveConfig
from .registers import DEFAULT_SLOTS, RegisterBank

RECIRC_PORT = 0
MAX_RECIRC = 8

FATES = ("forwarded", "stored", "consumed", "dropped_unmatched", "loop_guarded", "discarded")


@dataclass(frozen=True)
class CostModel:
    lookup_ns: int = 200
    byte_ps: int = 250
    recirc_ns: int = 1000

    def latency_ns(self, cost: "PipelineCost") -> int:
        return (
            cost.table_lookups * self.lookup_ns
            + cost.bytes_touched * self.byte_ps // 1000
            + cost.recirculations * self.recirc_ns
        )


@dataclass
class PipelineCost:
    table_lookups: int = 0
    bytes_touched: int = 0
    clones: int = 0
    recirculations: int = 0

    def copy(self) -> "PipelineCost":
        return replace(self)


@dataclass(frozen=True)
class TableEntry:
    """``actions`` run in order, like tables applied in sequence in one control block."""

    stream_id: int
    match: NextPrimitive
    in_port: int | None
    actions: tuple[PrimitiveConfig, ...]

    @property
    def key(self) -> tuple[int, NextPrimitive, int | None]:
        return (self.stream_id, self.match, self.in_port)


@dataclass
class TraversalRecord:
    stream_id: int
    batch_number: int
    match: NextPrimitive
    in_port: int | None
    arrival_ns: int
    cost: PipelineCost
    latency_ns: int
    fate: str
    actions: tuple[str, ...] = ()
    wall_ns: int | None = None


class Traversal:
    """Working state for one external packet and the passes it spawns."""

    def __init__(self, switch: "Switch", packet: Packet, now: int):
        self.switch = switch
        self.now = now
        self.origin = packet
        self.cost = PipelineCost()
        self.emissions: list[tuple[Packet, int]] = []
        self.queue: deque[Packet] = deque()
        self.fate: str | None = None
        self.self_emitted = False
        self.stored = False
        self.generated = False
        self.halted = False
        self.batch: int | None = None
        self.actions: list[str] = []

    # cost accounting
    def lookup(self) -> None:
        self.cost.table_lookups += 1

    def touch(self, nbytes: int) -> None:
        self.cost.bytes_touched += nbytes

    @property
    def elapsed_ns(self) -> int:
        return self.switch.cost_model.latency_ns(self.cost)

    def count(self, name: str, n: int = 1) -> None:
        self.switch.counters[name] += n

    def bank(self, cfg: PrimitiveConfig) -> RegisterBank:
        return self.switch.bank(cfg.stream_id, cfg.gen_size)

    def halt(self) -> None:
        self.halted = True

    # packet movement
    def emit(self, packet: Packet, port: int) -> None:
        if port == RECIRC_PORT:
            self._recirculate(packet)
            return
        if packet is self.origin:
            self.self_emitted = True
        egress = self.now + self.elapsed_ns
        rec = Telemetry(self.switch.switch_id, self.now, egress)
        out = packet.copy(header=packet.header.with_telemetry(rec), egress_ns=egress, out_port=None)
        self.emissions.append((out, port))

    def emit_clone(self, packet: Packet, port: int) -> None:
        self.cost.clones += 1
        self.count("clones")
        self.emit(packet.copy(), port)

    def clone_and_recirculate(self, packet: Packet, mutator: Callable[[Packet], Packet]) -> Packet | None:
        """Copy ``packet``, apply ``mutator`` and feed the copy back to ingress."""
        self.cost.clones += 1
        self.count("clones")
        self.generated = True
        return self._recirculate(mutator(packet.copy()))

    def _recirculate(self, packet: Packet) -> Packet | None:
        if packet.recirc_depth >= self.switch.max_recirc:
            self.count("loop_guard_hits")
            if packet is self.origin:
                self.fate = "loop_guarded"
            return None
        self.cost.recirculations += 1
        self.count("recirculations")
        again = packet.copy(recirc_depth=packet.recirc_depth + 1, in_port=RECIRC_PORT)
        if packet is self.origin:
            self.origin = again
        self.queue.append(again)
        return again


class Switch:
    def __init__(
        self,
        name: str,
        switch_id: int,
        cost_model: CostModel | None = None,
        max_recirc: int = MAX_RECIRC,
        ring_slots: int = DEFAULT_SLOTS,
        wallclock: bool = False,
    ):
        self.name = name
        self.switch_id = switch_id
        self.cost_model = cost_model or CostModel()
        self.max_recirc = max_recirc
        self.ring_slots = ring_slots
        self.wallclock = wallclock
        self.tables: dict[tuple, TableEntry] = {}
        self.banks: dict[int, RegisterBank] = {}
        self.counters: Counter = Counter()
        self.records: list[TraversalRecord] = []

    def install(self, entry: TableEntry) -> None:
        if entry.key in self.tables:
            raise ValueError(f"{self.name}: duplicate table key {entry.key}")
        if not entry.actions:
            raise ValueError(f"{self.name}: entry {entry.key} has no actions")
        self.tables[entry.key] = entry

    def bank(self, stream_id: int, gen_size: int) -> RegisterBank:
        bank = self.banks.get(stream_id)
        if bank is None:
            bank = self.banks[stream_id] = RegisterBank(stream_id, gen_size, self.ring_slots)
        return bank

    def lookup(self, stream_id: int, match: NextPrimitive, in_port: int | None) -> TableEntry | None:
        entry = self.tables.get((stream_id, match, in_port))
        if entry is None:
            entry = self.tables.get((stream_id, match, None))
        return entry

    def ingress(self, packet: Packet, port: int, now: int) -> list[tuple[Packet, int]]:
        """Run one packet through the pipeline; returns (packet, egress port) pairs.

        Each emitted packet carries this switch's telemetry record and has
        ``egress_ns`` set to ``now`` plus the modeled latency up to its emission.
        """
        started = time.perf_counter_ns() if self.wallclock else 0
        pkt = packet.copy(in_port=port, arrival_ns=now, recirc_depth=0, out_port=None, egress_ns=None)
        tr = Traversal(self, pkt, now)
        self.counters["ingress"] += 1
        self._pass(tr, pkt)
        while tr.queue:
            self._pass(tr, tr.queue.popleft())

        if tr.fate is None:
            if tr.self_emitted:
                tr.fate = "forwarded"
            elif tr.generated:
                tr.fate = "consumed"
            elif tr.stored:
                tr.fate = "stored"
            else:
                tr.fate = "discarded"
        self.counters["fate_" + tr.fate] += 1
        self.records.append(TraversalRecord(
            stream_id=packet.header.stream_id,
            batch_number=tr.batch if tr.batch is not None else packet.header.batch_number,
            match=packet.header.next_primitive,
            in_port=port,
            arrival_ns=now,
            cost=tr.cost,
            latency_ns=tr.elapsed_ns,
            fate=tr.fate,
            actions=tuple(tr.actions),
            wall_ns=time.perf_counter_ns() - started if self.wallclock else None,
        ))
        return tr.emissions

    def _pass(self, tr: Traversal, pkt: Packet) -> None:
        tr.lookup()
        if pkt.out_port is not None:
            # generated packet: the egress port was chosen when it was cloned
            port, pkt.out_port = pkt.out_port, None
            tr.emit(pkt, port)
            return
        h = pkt.header
        entry = self.lookup(h.stream_id, h.next_primitive, pkt.in_port)
        if entry is None:
            self.counters["unmatched_drops"] += 1
            if pkt is tr.origin:
                tr.fate = "dropped_unmatched"
            return
        tr.halted = False
        for i, cfg in enumerate(entry.actions):
            if i:
                tr.lookup()
            tr.actions.append(cfg.kind.value)
            ACTIONS[cfg.kind](tr, pkt, cfg)
            if tr.halted:
                break

    def snapshot(self) -> dict[str, int]:
        snap = {name: 0 for name in ("ingress", "unmatched_drops", "loop_guard_hits", "clones", "recirculations")}
        snap.update({"fate_" + f: 0 for f in FATES})
        snap.update(self.counters)
        snap["evicted_undelivered"] = sum(b.undelivered_evictions for b in self.banks.values())
        return dict(sorted(snap.items()))


def cost_of(record: TraversalRecord) -> PipelineCost:
    """Counters accumulated over one completed traversal."""
    return record.cost
