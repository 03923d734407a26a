"""Exact GF(2) linear algebra on int bitsets: vectors, matrices, rank, Kronecker products, coset weights."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class BitVec:
    """Binary vector stored as an int bitset (bit j = coordinate j)."""

    bits: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError("bits outside declared length")

    @classmethod
    def from_bits(cls, values: Iterable[int]) -> "BitVec":
        bits = 0
        length = 0
        for v in values:
            if v not in (0, 1):
                raise ValueError("entries must be 0 or 1")
            bits |= v << length
            length += 1
        return cls(bits, length)

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.length:
            raise IndexError(j)
        return (self.bits >> j) & 1

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVec(self.bits ^ other.bits, self.length)

    def to_tuple(self) -> tuple[int, ...]:
        return tuple((self.bits >> j) & 1 for j in range(self.length))


@dataclass(frozen=True)
class BitMatrix:
    """Dense binary matrix; each row is an int bitset (bit j = column j)."""

    rows: tuple[int, ...]
    cols: int

    def __post_init__(self) -> None:
        if self.cols < 0:
            raise ValueError("cols must be nonnegative")
        for r in self.rows:
            if r < 0 or r >> self.cols:
                raise ValueError("row bits outside declared width")

    @classmethod
    def from_rows(cls, rows: Sequence[Iterable[int]]) -> "BitMatrix":
        vecs = [BitVec.from_bits(r) for r in rows]
        if vecs and any(v.length != vecs[0].length for v in vecs):
            raise ValueError("ragged rows")
        cols = vecs[0].length if vecs else 0
        return cls(tuple(v.bits for v in vecs), cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls((0,) * nrows, ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.cols)

    def entry(self, i: int, j: int) -> int:
        if not 0 <= j < self.cols:
            raise IndexError(j)
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> BitVec:
        return BitVec(self.rows[i], self.cols)

    def column(self, j: int) -> BitVec:
        if not 0 <= j < self.cols:
            raise IndexError(j)
        bits = 0
        for i, r in enumerate(self.rows):
            bits |= ((r >> j) & 1) << i
        return BitVec(bits, len(self.rows))

    def column_weights(self) -> tuple[int, ...]:
        return tuple(self.column(j).weight for j in range(self.cols))

    def transpose(self) -> "BitMatrix":
        return BitMatrix(tuple(self.column(j).bits for j in range(self.cols)), len(self.rows))

    def to_lists(self) -> list[list[int]]:
        return [list(self.row(i).to_tuple()) for i in range(len(self.rows))]

    def to_text(self) -> str:
        """Serialize as 'rows cols' header plus one 0/1 line per row."""
        lines = [f"{len(self.rows)} {self.cols}"]
        for i in range(len(self.rows)):
            lines.append(" ".join(str(b) for b in self.row(i).to_tuple()))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        """Parse the 'rows cols' + 0/1-lines format."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty matrix text")
        header = lines[0].split()
        if len(header) != 2:
            raise ValueError("first line must be 'rows cols'")
        nrows, ncols = int(header[0]), int(header[1])
        if len(lines) != nrows + 1:
            raise ValueError(f"expected {nrows} rows, found {len(lines) - 1}")
        rows = []
        for ln in lines[1:]:
            entries = [int(tok) for tok in ln.split()]
            if len(entries) != ncols:
                raise ValueError(f"expected {ncols} entries per row")
            rows.append(entries)
        return cls.from_rows(rows)


def kron(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Kronecker product: entry ((i,j),(k,m)) = a[i,k] * b[j,m]."""
    rows = []
    for ra in a.rows:
        for rb in b.rows:
            bits = 0
            for k in range(a.cols):
                if (ra >> k) & 1:
                    bits |= rb << (k * b.cols)
            rows.append(bits)
    return BitMatrix(tuple(rows), a.cols * b.cols)


def rank(m: BitMatrix) -> int:
    """GF(2) row rank via Gaussian elimination."""
    return len(_independent_ints(m.rows))


def _independent_ints(vectors: Iterable[int]) -> list[int]:
    """Reduce to a linearly independent generating set (ints over GF(2))."""
    by_msb: dict[int, int] = {}
    for v in vectors:
        cur = v
        while cur:
            msb = cur.bit_length() - 1
            if msb in by_msb:
                cur ^= by_msb[msb]
            else:
                by_msb[msb] = cur
                break
    return list(by_msb.values())


def in_span(v: BitVec, basis: Sequence[BitVec]) -> bool:
    """True iff v lies in the GF(2) span of basis."""
    return int_span_contains((b.bits for b in basis), v.bits)


def int_span_contains(vectors: Iterable[int], v: int) -> bool:
    """Span membership test on raw int bitsets."""
    table = {b.bit_length() - 1: b for b in _independent_ints(vectors)}
    cur = v
    while cur:
        msb = cur.bit_length() - 1
        if msb not in table:
            return False
        cur ^= table[msb]
    return True


def coset_min_weight(v: BitVec, basis: Sequence[BitVec]) -> int:
    """Minimum Hamming distance from v to the span of basis.

    basis vectors need not be independent; the span is enumerated after
    reduction (fine for the short vectors this library works with).
    """
    for b in basis:
        if b.length != v.length:
            raise ValueError("length mismatch between v and basis")
    gens = _independent_ints(b.bits for b in basis)
    best = v.weight
    # Gray-code walk over all 2^r span elements.
    elem = 0
    for g in range(1, 1 << len(gens)):
        elem ^= gens[_gray_flip(g)]
        best = min(best, (elem ^ v.bits).bit_count())
        if best == 0:
            break
    return best


def _gray_flip(g: int) -> int:
    # index of the bit that flips between Gray codes g-1 and g
    return (g & -g).bit_length() - 1
