"""Configuration documents emitted by the compiler and loaded into switches.

Line-oriented text, one declaration per line::

    stream 1 function=diversity k=2
    costs lookup_ns=200 byte_ps=250 recirc_ns=1000 max_recirc=8 ring=64
    generator 1 0100 0001 0101
    path 1 1 s1:2 s2:2
    switch s1 id=1
    host h1 send stream=1 first=SPLIT
    host h2 recv stream=1
    entry s1 stream=1 match=SPLIT in=* split k=2 out=0:2:FORWARD,1:3:FORWARD
    entry s1 stream=1 match=SPLIT in=* code k=2 rows=0101:4:FORWARD
    entry s2 stream=1 match=FORWARD in=1 forward k=2 ports=2 next=GATHER
    entry s5 stream=1 match=GATHER in=* gather k=2
    entry s5 stream=1 match=GATHER in=* decode k=2 port=1

``entry`` lines sharing (switch, stream, match, in) form one table entry whose
actions run in file order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .codec import NextPrimitive
from .dataplane import MAX_RECIRC, CostModel, Switch, TableEntry
from .primitives import CodeRow, Kind, Output, PrimitiveConfig
from .registers import DEFAULT_SLOTS
from .topology import node_key


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HostRole:
    host: str
    role: str
    stream_id: int
    first: NextPrimitive | None = None


@dataclass
class StreamInfo:
    stream_id: int
    function: str
    gen_size: int
    generator: list[bytes] = field(default_factory=list)
    paths: list[list[str]] = field(default_factory=list)


@dataclass
class ConfigDocument:
    streams: dict[int, StreamInfo] = field(default_factory=dict)
    switch_ids: dict[str, int] = field(default_factory=dict)
    entries: dict[str, list[TableEntry]] = field(default_factory=dict)
    hosts: list[HostRole] = field(default_factory=list)
    cost_model: CostModel = field(default_factory=CostModel)
    max_recirc: int = MAX_RECIRC
    ring_slots: int = DEFAULT_SLOTS

    def add_entry(self, switch: str, entry: TableEntry) -> None:
        if switch not in self.switch_ids:
            raise ConfigError(f"entry for undeclared switch {switch}")
        existing = self.entries.setdefault(switch, [])
        if any(e.key == entry.key for e in existing):
            raise ConfigError(f"{switch}: duplicate key {entry.key}")
        existing.append(entry)

    def senders(self) -> list[HostRole]:
        return [h for h in self.hosts if h.role == "send"]

    def receivers(self, stream_id: int | None = None) -> list[HostRole]:
        return [h for h in self.hosts if h.role == "recv" and stream_id in (None, h.stream_id)]

    def kinds_at(self, switch: str) -> set[Kind]:
        return {a.kind for e in self.entries.get(switch, []) for a in e.actions}

    def build_switches(self, wallclock: bool = False) -> dict[str, Switch]:
        out = {}
        for name, sid in self.switch_ids.items():
            sw = Switch(name, sid, cost_model=self.cost_model, max_recirc=self.max_recirc,
                        ring_slots=self.ring_slots, wallclock=wallclock)
            for entry in self.entries.get(name, []):
                sw.install(entry)
            out[name] = sw
        return out

    # text form
    def dumps(self) -> str:
        cm = self.cost_model
        lines = ["# ncswitch config document v1"]
        for s in self.streams.values():
            lines.append(f"stream {s.stream_id} function={s.function} k={s.gen_size}")
            if s.generator:
                lines.append(f"generator {s.stream_id} " + " ".join(r.hex() for r in s.generator))
            for i, p in enumerate(s.paths, 1):
                lines.append(f"path {s.stream_id} {i} " + " ".join(p))
        lines.append(f"costs lookup_ns={cm.lookup_ns} byte_ps={cm.byte_ps} recirc_ns={cm.recirc_ns}"
                     f" max_recirc={self.max_recirc} ring={self.ring_slots}")
        for name in sorted(self.switch_ids, key=node_key):
            lines.append(f"switch {name} id={self.switch_ids[name]}")
        for h in self.hosts:
            first = f" first={h.first.name}" if h.first is not None else ""
            lines.append(f"host {h.host} {h.role} stream={h.stream_id}{first}")
        for name in sorted(self.entries, key=node_key):
            for e in self.entries[name]:
                head = f"entry {name} stream={e.stream_id} match={e.match.name} in={'*' if e.in_port is None else e.in_port}"
                for a in e.actions:
                    lines.append(f"{head} {_action_text(a)}")
        return "\n".join(lines) + "\n"

    def dump(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "ConfigDocument":
        doc = cls()
        groups: dict[tuple, list[PrimitiveConfig]] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                _parse_line(doc, groups, line.split())
            except (ValueError, KeyError, IndexError) as exc:
                raise ConfigError(f"line {lineno}: {exc}") from None
        for (switch, stream, match, in_port), actions in groups.items():
            doc.add_entry(switch, TableEntry(stream, match, in_port, tuple(actions)))
        return doc

    @classmethod
    def load(cls, path) -> "ConfigDocument":
        return cls.loads(Path(path).read_text())


def merge(*docs: ConfigDocument) -> ConfigDocument:
    """Combine documents for different streams over the same switches."""
    out = ConfigDocument(cost_model=docs[0].cost_model, max_recirc=docs[0].max_recirc,
                         ring_slots=docs[0].ring_slots)
    for d in docs:
        for sid, info in d.streams.items():
            if sid in out.streams:
                raise ConfigError(f"stream {sid} configured twice")
            out.streams[sid] = info
        for name, swid in d.switch_ids.items():
            if out.switch_ids.setdefault(name, swid) != swid:
                raise ConfigError(f"switch {name} has conflicting ids")
        out.hosts.extend(d.hosts)
        for name, entries in d.entries.items():
            for e in entries:
                out.add_entry(name, e)
    return out


def _kv(tokens) -> dict[str, str]:
    out = {}
    for tok in tokens:
        k, sep, v = tok.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {tok!r}")
        out[k] = v
    return out


def _parse_line(doc: ConfigDocument, groups, parts: list[str]) -> None:
    kind = parts[0]
    if kind == "stream":
        kv = _kv(parts[2:])
        sid = int(parts[1])
        doc.streams[sid] = StreamInfo(sid, kv["function"], int(kv["k"]))
    elif kind == "generator":
        doc.streams[int(parts[1])].generator = [bytes.fromhex(r) for r in parts[2:]]
    elif kind == "path":
        doc.streams[int(parts[1])].paths.append(parts[3:])
    elif kind == "costs":
        kv = _kv(parts[1:])
        doc.cost_model = CostModel(int(kv["lookup_ns"]), int(kv["byte_ps"]), int(kv["recirc_ns"]))
        doc.max_recirc = int(kv.get("max_recirc", MAX_RECIRC))
        doc.ring_slots = int(kv.get("ring", DEFAULT_SLOTS))
    elif kind == "switch":
        doc.switch_ids[parts[1]] = int(_kv(parts[2:])["id"])
    elif kind == "host":
        kv = _kv(parts[3:])
        if parts[2] not in ("send", "recv"):
            raise ValueError(f"unknown host role {parts[2]!r}")
        first = NextPrimitive[kv["first"]] if "first" in kv else None
        doc.hosts.append(HostRole(parts[1], parts[2], int(kv["stream"]), first))
    elif kind == "entry":
        kv = _kv(parts[2:5])
        in_port = None if kv["in"] == "*" else int(kv["in"])
        key = (parts[1], int(kv["stream"]), NextPrimitive[kv["match"]], in_port)
        groups.setdefault(key, []).append(_parse_action(int(kv["stream"]), parts[5], _kv(parts[6:])))
    else:
        raise ValueError(f"unknown declaration {kind!r}")


def _action_text(a: PrimitiveConfig) -> str:
    words = [a.kind.value, f"k={a.gen_size}"]
    if a.kind is Kind.SPLIT:
        outs = [f"{i}:-" if o is None else f"{i}:{o.port}:{o.next_primitive.name}" for i, o in enumerate(a.assign)]
        words.append("out=" + ",".join(outs))
    elif a.kind is Kind.CODE:
        words.append("rows=" + ",".join(f"{r.coeffs.hex()}:{r.port}:{r.next_primitive.name}" for r in a.rows))
    elif a.kind is Kind.FORWARD:
        words.append("ports=" + ",".join(str(p) for p in a.ports))
        if a.next_primitive is not None:
            words.append(f"next={a.next_primitive.name}")
    elif a.kind is Kind.DECODE:
        words.append(f"port={a.delivery_port}")
    return " ".join(words)


def _parse_action(stream_id: int, name: str, kv: dict[str, str]) -> PrimitiveConfig:
    kind = Kind(name)
    k = int(kv.get("k", 2))
    if kind is Kind.SPLIT:
        assign = []
        for item in kv["out"].split(","):
            fields = item.split(":")
            assign.append(None if fields[1] == "-" else Output(int(fields[1]), NextPrimitive[fields[2]]))
        return PrimitiveConfig(kind, stream_id, k, assign=tuple(assign))
    if kind is Kind.CODE:
        rows = []
        for item in kv["rows"].split(","):
            coeffs, port, nxt = item.split(":")
            rows.append(CodeRow(bytes.fromhex(coeffs), int(port), NextPrimitive[nxt]))
        return PrimitiveConfig(kind, stream_id, k, rows=tuple(rows))
    if kind is Kind.FORWARD:
        ports = tuple(int(p) for p in kv["ports"].split(",")) if kv.get("ports") else ()
        nxt = NextPrimitive[kv["next"]] if "next" in kv else None
        return PrimitiveConfig(kind, stream_id, k, ports=ports, next_primitive=nxt)
    if kind is Kind.DECODE:
        return PrimitiveConfig(kind, stream_id, k, delivery_port=int(kv["port"]))
    return PrimitiveConfig(kind, stream_id, k)
