"""Coding header and its big-endian wire image.

Layout, in order::

    version          u8   (always 1)
    stream_id        u16
    batch_number     u32
    next_primitive   u8
    gen_size         u8   k
    coeffs           k x u8
    orig_len         u16
    telemetry_count  u8
    telemetry        telemetry_count x (switch_id u16, ingress_ts u64, egress_ts u64)
    payload_len      u16
    payload          payload_len bytes
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from enum import IntEnum

from .gf import basis, is_basis

VERSION = 1
TELEMETRY_SIZE = 18
FIXED_SIZE = 14  # every field except coeffs, telemetry records and payload

_HEAD = struct.Struct(">BHIBB")
_U32 = struct.Struct(">I")
_U16 = struct.Struct(">H")
_U8 = struct.Struct(">B")
_TELEMETRY = struct.Struct(">HQQ")


class NextPrimitive(IntEnum):
    FORWARD = 1
    SPLIT = 2
    CODE = 3
    GATHER = 4
    DECODE = 5
    DELIVER = 6


class CodecError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class EncodeError(CodecError):
    pass


class ParseError(CodecError):
    pass


@dataclass(frozen=True)
class Telemetry:
    switch_id: int
    ingress_ts: int
    egress_ts: int


@dataclass(frozen=True)
class CodingHeader:
    stream_id: int
    batch_number: int
    next_primitive: NextPrimitive
    coeffs: bytes
    orig_len: int = 0
    telemetry: tuple[Telemetry, ...] = ()
    version: int = VERSION

    @property
    def gen_size(self) -> int:
        return len(self.coeffs)

    @property
    def basis_index(self) -> int | None:
        return is_basis(self.coeffs)

    def with_telemetry(self, record: Telemetry) -> "CodingHeader":
        return replace(self, telemetry=self.telemetry + (record,))


def original_header(stream_id: int, seq: int, first: NextPrimitive, length: int) -> CodingHeader:
    """Header a host puts on an uncoded payload before any switch has batched it."""
    return CodingHeader(stream_id, seq, first, basis(0, 1), orig_len=length)


def wire_length(header: CodingHeader, payload_len: int) -> int:
    return FIXED_SIZE + header.gen_size + TELEMETRY_SIZE * len(header.telemetry) + payload_len


def _check_range(name: str, value: int, bits: int) -> None:
    if not isinstance(value, int) or not 0 <= value < (1 << bits):
        raise EncodeError(name, f"{value!r} outside u{bits}")


def _check_telemetry_order(records, error) -> None:
    for prev, cur in zip(records, records[1:]):
        if cur.ingress_ts < prev.ingress_ts:
            raise error("telemetry", "records not ordered by ingress_ts")


def serialize(header: CodingHeader, payload: bytes) -> bytes:
    if header.version != VERSION:
        raise EncodeError("version", f"unsupported version {header.version}")
    _check_range("stream_id", header.stream_id, 16)
    _check_range("batch_number", header.batch_number, 32)
    try:
        nxt = NextPrimitive(header.next_primitive)
    except ValueError:
        raise EncodeError("next_primitive", f"undefined value {header.next_primitive!r}") from None
    k = header.gen_size
    if not 1 <= k <= 255:
        raise EncodeError("gen_size", f"{k} outside 1..255")
    if not any(header.coeffs):
        raise EncodeError("coeffs", "all-zero coefficient vector")
    _check_range("orig_len", header.orig_len, 16)
    if header.basis_index is None and header.orig_len:
        raise EncodeError("orig_len", "must be 0 on a coded packet")
    if header.orig_len > len(payload):
        raise EncodeError("orig_len", "exceeds payload length")
    if len(header.telemetry) > 255:
        raise EncodeError("telemetry_count", "more than 255 records")
    for rec in header.telemetry:
        _check_range("switch_id", rec.switch_id, 16)
        _check_range("ingress_ts", rec.ingress_ts, 64)
        _check_range("egress_ts", rec.egress_ts, 64)
    _check_telemetry_order(header.telemetry, EncodeError)
    _check_range("payload_len", len(payload), 16)

    parts = [
        _HEAD.pack(header.version, header.stream_id, header.batch_number, nxt, k),
        bytes(header.coeffs),
        _U16.pack(header.orig_len),
        _U8.pack(len(header.telemetry)),
    ]
    parts += [_TELEMETRY.pack(r.switch_id, r.ingress_ts, r.egress_ts) for r in header.telemetry]
    parts += [_U16.pack(len(payload)), bytes(payload)]
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n: int, name: str) -> memoryview:
        if self.pos + n > len(self.data):
            raise ParseError(name, f"truncated at offset {self.pos}, need {n} bytes")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, st: struct.Struct, name: str):
        return st.unpack(self.take(st.size, name))


def parse(data: bytes) -> tuple[CodingHeader, bytes]:
    rd = _Reader(bytes(data))
    (version,) = rd.unpack(_U8, "version")
    if version != VERSION:
        raise ParseError("version", f"unknown version {version}")
    (stream_id,) = rd.unpack(_U16, "stream_id")
    (batch,) = rd.unpack(_U32, "batch_number")
    (nxt,) = rd.unpack(_U8, "next_primitive")
    try:
        nxt = NextPrimitive(nxt)
    except ValueError:
        raise ParseError("next_primitive", f"undefined value {nxt}") from None
    (k,) = rd.unpack(_U8, "gen_size")
    if k == 0:
        raise ParseError("gen_size", "must be at least 1")
    coeffs = bytes(rd.take(k, "coeffs"))
    (orig_len,) = rd.unpack(_U16, "orig_len")
    (count,) = rd.unpack(_U8, "telemetry_count")
    records = tuple(Telemetry(*rd.unpack(_TELEMETRY, "telemetry")) for _ in range(count))
    (plen,) = rd.unpack(_U16, "payload_len")
    payload = bytes(rd.take(plen, "payload"))
    if rd.pos != len(rd.data):
        raise ParseError("payload", f"{len(rd.data) - rd.pos} trailing bytes")
    if not any(coeffs):
        raise ParseError("coeffs", "all-zero coefficient vector")
    if orig_len > plen or (orig_len and is_basis(coeffs) is None):
        raise ParseError("orig_len", f"inconsistent value {orig_len}")
    _check_telemetry_order(records, ParseError)
    return CodingHeader(stream_id, batch, nxt, coeffs, orig_len, records, version), payload


@dataclass
class Packet:
    """A header plus payload, with per-hop metadata that never hits the wire."""

    header: CodingHeader
    payload: bytes
    in_port: int | None = None
    arrival_ns: int | None = None
    recirc_depth: int = 0
    out_port: int | None = None
    egress_ns: int | None = None
    meta: dict = field(default_factory=dict)

    def wire(self) -> bytes:
        return serialize(self.header, self.payload)

    @classmethod
    def from_wire(cls, data: bytes, **meta) -> "Packet":
        header, payload = parse(data)
        return cls(header, payload, **meta)

    def copy(self, **changes) -> "Packet":
        pkt = replace(self, **changes)
        pkt.meta = dict(self.meta)
        return pkt
