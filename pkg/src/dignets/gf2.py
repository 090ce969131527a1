"""Bit-packed linear algebra over Z_2 and the digit conventions used by the nets.

Rows and vectors are plain Python ints: bit ``k`` of a row holds column ``k``.
Exact rationals are :class:`fractions.Fraction` (always in lowest terms).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

MAX_DIM = 63


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class BitVector:
    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0 or self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits {self.bits:#x} do not fit in length {self.n}")

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "BitVector":
        bits = 0
        for k, v in enumerate(values):
            if v not in (0, 1):
                raise ValueError(f"entry {v!r} is not a bit")
            bits |= v << k
        return cls(len(values), bits)

    def __getitem__(self, k: int) -> int:
        if not 0 <= k < self.n:
            raise IndexError(k)
        return (self.bits >> k) & 1

    def __len__(self) -> int:
        return self.n

    def __xor__(self, other: "BitVector") -> "BitVector":
        if other.n != self.n:
            raise ValueError("length mismatch")
        return BitVector(self.n, self.bits ^ other.bits)

    def to_list(self) -> list[int]:
        return [(self.bits >> k) & 1 for k in range(self.n)]


@dataclass(frozen=True)
class BitMatrix:
    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIM:
            raise ValueError(f"dimension must lie in 1..{MAX_DIM}, got {self.n}")
        if len(self.rows) != self.n:
            raise ValueError("matrix must be square")
        for r in self.rows:
            if r < 0 or r >> self.n:
                raise ValueError(f"row {r:#x} does not fit in {self.n} bits")

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[int]]) -> "BitMatrix":
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        return cls(n, tuple(BitVector.from_list(r).bits for r in rows))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, tuple(1 << i for i in range(n)))

    @classmethod
    def anti_identity(cls, n: int) -> "BitMatrix":
        return cls(n, tuple(1 << (n - 1 - i) for i in range(n)))

    @classmethod
    def parse(cls, text: str) -> "BitMatrix":
        """Read the flat format: one row per line, ``'0'``/``'1'`` characters."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if any(set(ln) - {"0", "1"} for ln in lines):
            raise ValueError("matrix rows may only contain '0' and '1'")
        return cls.from_lists([[int(c) for c in ln] for ln in lines])

    def dumps(self) -> str:
        return "\n".join("".join(str(b) for b in self.row(i).to_list()) for i in range(self.n)) + "\n"

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(ij)
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.n, self.rows[i])

    def to_lists(self) -> list[list[int]]:
        return [self.row(i).to_list() for i in range(self.n)]


def mat_vec_mul(m: BitMatrix, v: BitVector) -> BitVector:
    if m.n != v.n:
        raise ValueError(f"dimension mismatch: {m.n}x{m.n} matrix, vector of length {v.n}")
    out = 0
    for i, row in enumerate(m.rows):
        out |= _parity(row & v.bits) << i
    return BitVector(m.n, out)


def rank_of_stacked_rows(rows: Iterable[BitVector]) -> int:
    """GF(2) rank by elimination on packed rows."""
    rows = list(rows)
    if not rows:
        return 0
    if len({r.n for r in rows}) > 1:
        raise ValueError("rows have different lengths")
    # basis keyed by leading bit; each insertion reduces against it
    basis: dict[int, int] = {}
    for r in rows:
        x = r.bits
        while x:
            lead = x.bit_length() - 1
            if lead not in basis:
                basis[lead] = x
                break
            x ^= basis[lead]
    return len(basis)


# Digit conventions. "lsb" vectors hold r_0 at index 0 (dyadic expansion of an
# integer); "tuple" order holds the first-listed digit (t_1, b_1, ...) at index 0.

def int_to_digits_lsb(r: int, n: int) -> BitVector:
    """Digit vector (r_0, ..., r_{n-1}) of ``r = r_0 + 2 r_1 + ...``."""
    if not 0 <= r < (1 << n):
        raise ValueError(f"{r} out of range for {n} digits")
    return BitVector(n, r)


def reverse_bits(x: int, n: int) -> int:
    out = 0
    for _ in range(n):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


def radix_collapse(v: BitVector) -> int:
    """Numerator over 2^n of ``v[0]/2 + v[1]/4 + ... + v[n-1]/2^n``."""
    return reverse_bits(v.bits, v.n)


def digits_to_fraction_num(digits: Sequence[int]) -> int:
    """Numerator over 2^len of ``d_1/2 + d_2/4 + ...`` for a digit tuple in tuple order."""
    out = 0
    for d in digits:
        out = (out << 1) | d
    return out


def int_to_digit_tuple(m: int, j: int) -> list[int]:
    """Digits (d_1, ..., d_j) with ``m = 2^{j-1} d_1 + ... + d_j``."""
    if j <= 0:
        return []
    if not 0 <= m < (1 << j):
        raise ValueError(f"{m} out of range for {j} digits")
    return [(m >> (j - 1 - k)) & 1 for k in range(j)]
