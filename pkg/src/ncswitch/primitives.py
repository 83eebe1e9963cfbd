"""The five coding primitives: split, code, forward, gather and decode.

Each primitive is an action bound to a table entry. Actions receive the
current :class:`~ncswitch.dataplane.Traversal` (cost accounting, emission,
clone-and-recirculate, register access), the packet in hand and their
:class:`PrimitiveConfig`.

Payloads are stored in registers in *symbol form*: a basis-vector packet's
payload is prefixed with its 2-byte original length, so that coding and
Gaussian elimination also carry the lengths and a decoder can trim recovered
originals exactly. A symbol whose length prefix is zero is batch padding.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from enum import Enum

from . import gf
from .codec import CodingHeader, NextPrimitive, Packet
from .registers import StoreOutcome

_LEN = struct.Struct(">H")


class Kind(str, Enum):
    SPLIT = "split"
    CODE = "code"
    FORWARD = "forward"
    GATHER = "gather"
    DECODE = "decode"


class GatherOutcome(Enum):
    STORED = "stored"
    READY = "ready"
    REDUNDANT = "redundant"
    LATE = "late"


@dataclass(frozen=True)
class Output:
    port: int
    next_primitive: NextPrimitive


@dataclass(frozen=True)
class CodeRow:
    coeffs: bytes
    port: int
    next_primitive: NextPrimitive


@dataclass(frozen=True)
class PrimitiveConfig:
    kind: Kind
    stream_id: int
    gen_size: int = 2
    ports: tuple[int, ...] = ()
    next_primitive: NextPrimitive | None = None
    assign: tuple[Output | None, ...] = ()
    rows: tuple[CodeRow, ...] = ()
    delivery_port: int | None = None

    def __post_init__(self):
        if self.gen_size < 1:
            raise ValueError("gen_size must be at least 1")
        if self.kind is Kind.SPLIT and len(self.assign) != self.gen_size:
            raise ValueError("split needs one output assignment per generation index")
        if self.kind is Kind.CODE:
            if not self.rows:
                raise ValueError("code needs at least one output row")
            for row in self.rows:
                if len(row.coeffs) != self.gen_size or not any(row.coeffs):
                    raise ValueError(f"bad code row {row.coeffs.hex()}")
        if self.kind is Kind.DECODE and self.delivery_port is None:
            raise ValueError("decode needs a delivery port")


def to_symbol(header: CodingHeader, payload: bytes) -> bytes:
    if header.basis_index is not None:
        return _LEN.pack(header.orig_len) + payload[:header.orig_len]
    return payload


def from_symbol(symbol: bytes) -> bytes:
    """Original payload of a symbol; empty for padding."""
    if len(symbol) < 2:
        raise gf.DecodeIntegrityError("symbol shorter than its length prefix")
    (n,) = _LEN.unpack_from(symbol)
    if n > len(symbol) - 2:
        raise gf.DecodeIntegrityError(f"length prefix {n} exceeds symbol")
    return bytes(symbol[2:2 + n])


def _packet_for_symbol(base: Packet, batch: int, coeffs: bytes, symbol: bytes,
                       next_primitive: NextPrimitive, port: int) -> Packet:
    if gf.is_basis(coeffs) is not None:
        payload = from_symbol(symbol)
        header = replace(base.header, batch_number=batch, coeffs=coeffs,
                         next_primitive=next_primitive, orig_len=len(payload))
    else:
        payload = symbol
        header = replace(base.header, batch_number=batch, coeffs=coeffs,
                         next_primitive=next_primitive, orig_len=0)
    base.header = header
    base.payload = payload
    base.out_port = port
    return base


def _store(tr, bank, pkt: Packet) -> StoreOutcome:
    h = pkt.header
    sym = to_symbol(h, pkt.payload)
    outcome = bank.store_row(h.batch_number, h.coeffs, sym)
    if outcome in (StoreOutcome.NEW_ROW, StoreOutcome.EVICTED):
        tr.touch(len(sym))
        tr.stored = True
        tr.batch = h.batch_number
    return outcome


def _originals(tr, slot) -> list[bytes]:
    """Batch originals in generation order, solving only when a basis row is missing."""
    syms = slot.identity_order()
    if syms is not None:
        return gf.pad_symbols(syms)
    if slot.originals is None:
        rows = slot.rows
        padded = gf.pad_symbols(s for _, s in rows)
        tr.touch(len(rows) * len(padded[0]))
        slot.originals = gf.solve([(c, s) for (c, _), s in zip(rows, padded)], slot.gen_size)
    return slot.originals


def split(tr, pkt: Packet, cfg: PrimitiveConfig) -> None:
    """Assign the next generation position to a host packet, store it and send it on."""
    bank = tr.bank(cfg)
    k = cfg.gen_size
    h = pkt.header
    if not pkt.payload and h.orig_len == 0:
        # end-of-stream marker: pad out a partial batch, otherwise nothing to do
        pos = bank.split_seq % k
        if pos == 0:
            tr.halt()
            return
        batch = bank.split_seq // k
        for i in range(pos, k):
            pad = pkt.copy(header=replace(h, batch_number=batch, coeffs=gf.basis(i, k), orig_len=0), payload=b"")
            _store(tr, bank, pad)
            out = cfg.assign[i]
            if out is not None:
                pad.header = replace(pad.header, next_primitive=out.next_primitive)
                tr.emit_clone(pad, out.port)
        bank.split_seq += k - pos
        tr.batch = batch
        return
    batch, i = divmod(bank.split_seq, k)
    bank.split_seq += 1
    pkt.header = replace(h, batch_number=batch, coeffs=gf.basis(i, k))
    _store(tr, bank, pkt)
    tr.batch = batch
    out = cfg.assign[i]
    if out is not None:
        pkt.header = replace(pkt.header, next_primitive=out.next_primitive)
        tr.emit(pkt, out.port)


def code(tr, pkt: Packet, cfg: PrimitiveConfig) -> None:
    """Once a batch is complete, generate one packet per configured coefficient row."""
    bank = tr.bank(cfg)
    if tr.batch is None:
        outcome = _store(tr, bank, pkt)
        if outcome in (StoreOutcome.DUPLICATE_RANK, StoreOutcome.ALREADY_DELIVERED):
            tr.count("late" if outcome is StoreOutcome.ALREADY_DELIVERED else "redundant")
            tr.halt()
            return
    batch = tr.batch
    slot = bank.slot(batch)
    if slot is None or slot.delivered or not slot.complete:
        return
    originals = _originals(tr, slot)
    width = len(originals[0])
    for row in cfg.rows:
        sym = gf.combine(row.coeffs, originals)
        tr.touch(cfg.gen_size * width)
        tr.clone_and_recirculate(
            pkt, lambda p, row=row, sym=sym: _packet_for_symbol(p, batch, row.coeffs, sym, row.next_primitive, row.port))
    slot.delivered = True


def forward(tr, pkt: Packet, cfg: PrimitiveConfig) -> None:
    """Unicast on one port, or multicast with one clone per extra port."""
    if not cfg.ports:
        tr.count("empty_port_drops")
        tr.halt()
        return
    if cfg.next_primitive is not None:
        pkt.header = replace(pkt.header, next_primitive=cfg.next_primitive)
    for port in cfg.ports[1:]:
        tr.emit_clone(pkt, port)
    tr.emit(pkt, cfg.ports[0])


def gather(tr, pkt: Packet, cfg: PrimitiveConfig) -> GatherOutcome:
    bank = tr.bank(cfg)
    outcome = _store(tr, bank, pkt)
    if outcome is StoreOutcome.DUPLICATE_RANK:
        tr.count("redundant")
        tr.halt()
        return GatherOutcome.REDUNDANT
    if outcome is StoreOutcome.ALREADY_DELIVERED:
        tr.count("late")
        tr.halt()
        return GatherOutcome.LATE
    slot = bank.slot(pkt.header.batch_number)
    return GatherOutcome.READY if slot.complete else GatherOutcome.STORED


def decode(tr, pkt: Packet, cfg: PrimitiveConfig) -> None:
    """Deliver every original that is now deliverable, in stream order.

    An original that arrived as a basis-vector packet in this very traversal
    passes straight through. Anything else (held earlier, or recovered by
    elimination) is materialized with clone-and-recirculate.
    """
    bank = tr.bank(cfg)
    k = cfg.gen_size
    while True:
        b, i = bank.head_batch, bank.head_index
        slot = bank.slot(b)
        if slot is None:
            return
        if slot.delivered:
            bank.advance_head(b)
            continue
        sym = slot.basis_symbol(i)
        from_solve = False
        if sym is None:
            if not slot.complete:
                return
            try:
                sym = _originals(tr, slot)[i]
            except gf.DecodeIntegrityError:
                tr.count("integrity_errors")
                slot.delivered = True
                bank.advance_head(b)
                continue
            from_solve = True
            slot.used_arithmetic = True
        _deliver(tr, pkt, cfg, b, i, sym, from_solve)
        bank.head_index += 1
        if bank.head_index == k:
            slot.delivered = True
            bank.branches[b] = "arithmetic" if slot.used_arithmetic else "pass-through"
            bank.advance_head(b)


def _deliver(tr, pkt: Packet, cfg: PrimitiveConfig, batch: int, index: int, sym: bytes, from_solve: bool) -> None:
    try:
        payload = from_symbol(sym)
    except gf.DecodeIntegrityError:
        tr.count("integrity_errors")
        return
    if not payload:
        return  # padding
    h = pkt.header
    # once anything in this traversal went round the recirculation loop, later
    # deliveries must follow it there or they would overtake it
    arrived_now = (
        pkt is tr.origin and not tr.self_emitted and not from_solve and not tr.generated
        and h.batch_number == batch and h.basis_index == index
    )
    if arrived_now:
        pkt.header = replace(h, next_primitive=NextPrimitive.DELIVER)
        pkt.payload = payload
        tr.emit(pkt, cfg.delivery_port)
        return
    tr.touch(len(sym))
    tr.clone_and_recirculate(pkt, lambda p: _packet_for_symbol(
        p, batch, gf.basis(index, cfg.gen_size), sym, NextPrimitive.DELIVER, cfg.delivery_port))


ACTIONS = {
    Kind.SPLIT: split,
    Kind.CODE: code,
    Kind.FORWARD: forward,
    Kind.GATHER: gather,
    Kind.DECODE: decode,
}
