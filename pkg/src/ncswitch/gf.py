"""GF(2^8) arithmetic and the linear-algebra kernel behind every coder and decoder.

Elements are plain ints in [0, 255] (or ``uint8`` arrays). Addition is XOR;
multiplication is reduced modulo x^8 + x^4 + x^3 + x + 1 (0x11B). Symbols are
byte strings treated as vectors over the field.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

POLY = 0x11B
GENERATOR = 0x03


class ShapeError(ValueError):
    """Coefficient vectors and symbols do not line up."""


class InsufficientRank(Exception):
    """Fewer than k linearly independent rows have been received."""

    def __init__(self, rank: int, k: int):
        super().__init__(f"rank {rank} < {k}")
        self.rank = rank
        self.k = k


class DecodeIntegrityError(Exception):
    """Received rows are linearly dependent but their symbols disagree."""


def _xtime_mul(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= POLY
    return r


def _build_tables():
    exp = np.zeros(510, dtype=np.uint8)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = _xtime_mul(x, GENERATOR)
    exp[255:] = exp[:255]

    logs = log[np.arange(256)]
    mul = exp[logs[:, None] + logs[None, :]]
    mul[0, :] = 0
    mul[:, 0] = 0

    inv = np.zeros(256, dtype=np.uint8)
    inv[1:] = exp[(255 - log[1:]) % 255]
    return exp, log, mul, inv


EXP, LOG, MUL, INV = _build_tables()
for _t in (EXP, LOG, MUL, INV):
    _t.flags.writeable = False


def gf_add(a: int, b: int) -> int:
    return a ^ b


gf_sub = gf_add


def gf_mul(a: int, b: int) -> int:
    return int(MUL[a, b])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return int(INV[a])


def gf_div(a: int, b: int) -> int:
    return gf_mul(a, gf_inv(b))


def as_symbol(sym) -> np.ndarray:
    if isinstance(sym, np.ndarray):
        return sym.astype(np.uint8, copy=False)
    return np.frombuffer(bytes(sym), dtype=np.uint8)


def pad_symbols(symbols: Iterable) -> list[bytes]:
    """Zero-pad every symbol to the length of the longest one."""
    symbols = [bytes(s) for s in symbols]
    width = max((len(s) for s in symbols), default=0)
    return [s.ljust(width, b"\x00") for s in symbols]


def combine(coeffs: Sequence[int], symbols: Sequence) -> bytes:
    """Byte-wise linear combination ``sum(coeffs[i] * symbols[i])``."""
    if len(coeffs) != len(symbols):
        raise ShapeError(f"{len(coeffs)} coefficients for {len(symbols)} symbols")
    arrays = [as_symbol(s) for s in symbols]
    if len({a.size for a in arrays}) > 1:
        raise ShapeError("symbols differ in length")
    width = arrays[0].size if arrays else 0
    acc = np.zeros(width, dtype=np.uint8)
    for c, sym in zip(coeffs, arrays):
        c = int(c)
        if c == 0:
            continue
        acc ^= sym if c == 1 else MUL[c][sym]
    return acc.tobytes()


def encode(matrix: Sequence[Sequence[int]], symbols: Sequence) -> list[bytes]:
    """One coded symbol per row of ``matrix``."""
    return [combine(row, symbols) for row in matrix]


def _eliminate(rows: np.ndarray, data: np.ndarray | None, k: int) -> int:
    """In-place reduction to reduced row-echelon form; returns the rank.

    Pivot rows end up in the first ``rank`` positions, ordered by pivot column.
    """
    r = 0
    for col in range(k):
        nz = np.nonzero(rows[r:, col])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            rows[[r, p]] = rows[[p, r]]
            if data is not None:
                data[[r, p]] = data[[p, r]]
        scale = INV[rows[r, col]]
        if scale != 1:
            rows[r] = MUL[scale][rows[r]]
            if data is not None:
                data[r] = MUL[scale][data[r]]
        for i in range(rows.shape[0]):
            f = rows[i, col]
            if i == r or f == 0:
                continue
            rows[i] ^= MUL[f][rows[r]]
            if data is not None:
                data[i] ^= MUL[f][data[r]]
        r += 1
        if r == rows.shape[0]:
            break
    return r


def rank(vectors: Sequence[Sequence[int]]) -> int:
    if len(vectors) == 0:
        return 0
    widths = {len(v) for v in vectors}
    if len(widths) != 1:
        raise ShapeError("coefficient vectors differ in length")
    rows = np.array([list(v) for v in vectors], dtype=np.uint8)
    return _eliminate(rows, None, rows.shape[1])


def solve(received: Sequence[tuple[Sequence[int], bytes]], k: int) -> list[bytes]:
    """Recover the k originals from (coefficient vector, symbol) rows.

    Raises InsufficientRank when the rows span fewer than k dimensions and
    DecodeIntegrityError when a dependent row contradicts the others.
    """
    if not received:
        raise InsufficientRank(0, k)
    for coeffs, _ in received:
        if len(coeffs) != k:
            raise ShapeError(f"coefficient vector of length {len(coeffs)}, expected {k}")
    syms = [as_symbol(s) for _, s in received]
    if len({s.size for s in syms}) > 1:
        raise ShapeError("symbols differ in length")
    rows = np.array([list(c) for c, _ in received], dtype=np.uint8)
    data = np.array(syms, dtype=np.uint8).reshape(len(syms), -1).copy()
    r = _eliminate(rows, data, k)
    if r < k:
        raise InsufficientRank(r, k)
    if data.shape[0] > k and data[k:].any():
        raise DecodeIntegrityError("dependent rows carry inconsistent symbols")
    return [data[i].tobytes() for i in range(k)]


def is_basis(coeffs: Sequence[int]) -> int | None:
    """Index i when ``coeffs`` is the standard basis vector e_i, else None."""
    hit = None
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        if c != 1 or hit is not None:
            return None
        hit = i
    return hit


def basis(i: int, k: int) -> bytes:
    v = bytearray(k)
    v[i] = 1
    return bytes(v)
