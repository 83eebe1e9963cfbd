"""Per-stream register banks: ring buffers of batch slots indexed by batch number."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import gf

DEFAULT_SLOTS = 64


class StoreOutcome(Enum):
    NEW_ROW = "new-row"
    DUPLICATE_RANK = "duplicate-rank"
    EVICTED = "evicted"
    ALREADY_DELIVERED = "already-delivered"


@dataclass
class BatchSlot:
    batch_number: int
    gen_size: int
    rows: list[tuple[bytes, bytes]] = field(default_factory=list)
    delivered: bool = False
    originals: list[bytes] | None = None
    used_arithmetic: bool = False

    @property
    def received_count(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        # dependent rows are never stored, so every stored row adds one dimension
        return len(self.rows)

    @property
    def complete(self) -> bool:
        return self.rank >= self.gen_size

    def basis_symbol(self, index: int) -> bytes | None:
        for coeffs, sym in self.rows:
            if gf.is_basis(coeffs) == index:
                return sym
        return None

    def identity_order(self) -> list[bytes] | None:
        """Stored symbols in generation order, if every row is a basis vector."""
        syms = [self.basis_symbol(i) for i in range(self.gen_size)]
        return None if any(s is None for s in syms) else syms


class RegisterBank:
    """Fixed ring of ``slots`` batch slots for one stream on one switch.

    Besides the rows themselves the bank keeps the split counter of a
    co-resident Split primitive and the in-order delivery cursor
    (``head_batch``, ``head_index``) used by Decode.
    """

    def __init__(self, stream_id: int, gen_size: int, slots: int = DEFAULT_SLOTS):
        if slots < 1:
            raise ValueError("a register bank needs at least one slot")
        self.stream_id = stream_id
        self.gen_size = gen_size
        self.size = slots
        self._slots: list[BatchSlot | None] = [None] * slots
        self.evictions: list[tuple[int, bool]] = []
        self.branches: dict[int, str] = {}
        self.split_seq = 0
        self.head_batch = 0
        self.head_index = 0

    def slot(self, batch_number: int) -> BatchSlot | None:
        s = self._slots[batch_number % self.size]
        if s is not None and s.batch_number == batch_number:
            return s
        return None

    @property
    def undelivered_evictions(self) -> int:
        return sum(1 for _, delivered in self.evictions if not delivered)

    def advance_head(self, batch_number: int) -> None:
        if self.head_batch <= batch_number:
            self.head_batch = batch_number + 1
            self.head_index = 0

    def store_row(self, batch_number: int, coeffs: bytes, symbol: bytes) -> StoreOutcome:
        if len(coeffs) != self.gen_size:
            raise gf.ShapeError(f"row of width {len(coeffs)} in a bank of gen_size {self.gen_size}")
        idx = batch_number % self.size
        cur = self._slots[idx]
        outcome = StoreOutcome.NEW_ROW
        if cur is not None and cur.batch_number != batch_number:
            if cur.batch_number > batch_number:
                return StoreOutcome.ALREADY_DELIVERED
            self.evictions.append((cur.batch_number, cur.delivered))
            if not cur.delivered:
                self.advance_head(cur.batch_number)
            cur = None
            outcome = StoreOutcome.EVICTED
        if batch_number < self.head_batch:
            return StoreOutcome.ALREADY_DELIVERED
        # batches that can no longer fit in the ring behind this one are gone
        if batch_number - self.head_batch >= self.size:
            self.head_batch = batch_number - self.size + 1
            self.head_index = 0
        if cur is None:
            cur = BatchSlot(batch_number, self.gen_size)
            self._slots[idx] = cur
        if cur.delivered:
            return StoreOutcome.ALREADY_DELIVERED
        if cur.rows and gf.rank([c for c, _ in cur.rows] + [coeffs]) == cur.rank:
            return StoreOutcome.DUPLICATE_RANK
        cur.rows.append((bytes(coeffs), bytes(symbol)))
        return outcome


def store_row(bank: RegisterBank, batch_number: int, coeffs: bytes, symbol: bytes) -> StoreOutcome:
    return bank.store_row(batch_number, coeffs, symbol)
