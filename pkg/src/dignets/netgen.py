"""Construction of two-dimensional digital nets over Z_2 and net-property checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, NamedTuple, Sequence

import numpy as np

from .gf2 import (
    BitMatrix,
    BitVector,
    int_to_digits_lsb,
    mat_vec_mul,
    radix_collapse,
    rank_of_stacked_rows,
    reverse_bits,
)

KINDS = ("hammersley", "nut_a", "custom")


@dataclass(frozen=True)
class AVector:
    """The tuple (a_1, ..., a_{n-1}) parametrising the NUT matrix C_2."""

    n: int
    a: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(self.a) != self.n - 1:
            raise ValueError(f"a must have length n-1 = {self.n - 1}, got {len(self.a)}")
        if any(x not in (0, 1) for x in self.a):
            raise ValueError("entries of a must be bits")

    @classmethod
    def parse(cls, bits: str, n: int | None = None) -> "AVector":
        bits = bits.strip()
        if set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        if n is None:
            n = len(bits) + 1
        return cls(n, tuple(int(c) for c in bits))

    @classmethod
    def zeros(cls, n: int) -> "AVector":
        return cls(n, (0,) * (n - 1))

    @classmethod
    def ones(cls, n: int) -> "AVector":
        return cls(n, (1,) * (n - 1))

    def __str__(self) -> str:
        return "".join(map(str, self.a))

    def coef(self, i: int) -> int:
        """a_i with 1-based index; a_i = 0 outside 1..n-1 (row n of C_2 has no a)."""
        return self.a[i - 1] if 1 <= i <= self.n - 1 else 0

    @property
    def h(self) -> int:
        """Number of zeros in a."""
        return self.a.count(0)


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    c1: BitMatrix
    c2: BitMatrix
    kind: str = "custom"
    a: AVector | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.c1.n != self.n or self.c2.n != self.n:
            raise ValueError("generator matrices must be n x n")


def make_generators(kind: str, n: int, a: AVector | Sequence[int] | str | None = None) -> GeneratorSpec:
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind == "hammersley":
        if a is not None:
            raise ValueError("hammersley takes no a-vector")
        return GeneratorSpec(n, BitMatrix.anti_identity(n), BitMatrix.identity(n), "hammersley")
    if kind == "nut_a":
        if a is None:
            raise ValueError("nut_a requires an a-vector")
        if isinstance(a, str):
            a = AVector.parse(a, n)
        elif not isinstance(a, AVector):
            a = AVector(n, tuple(a))
        if a.n != n:
            raise ValueError(f"a-vector belongs to n={a.n}, expected n={n}")
        rows = []
        for i in range(n):
            row = 1 << i
            if i < n - 1 and a.a[i]:
                row |= ((1 << n) - 1) ^ ((1 << (i + 1)) - 1)
            rows.append(row)
        return GeneratorSpec(n, BitMatrix.anti_identity(n), BitMatrix(n, tuple(rows)), "nut_a", a)
    raise ValueError(f"make_generators does not build kind {kind!r}; use GeneratorSpec directly")


class DyadicPoint(NamedTuple):
    x_num: int
    y_num: int
    scale: int

    @property
    def x(self) -> Fraction:
        return Fraction(self.x_num, 1 << self.scale)

    @property
    def y(self) -> Fraction:
        return Fraction(self.y_num, 1 << self.scale)


@dataclass(frozen=True, eq=False)
class PointSet:
    """Multiset of dyadic points ``(x/2^n, y/2^n)`` in construction order."""

    x: np.ndarray
    y: np.ndarray
    n: int
    meta: dict[str, Any] = field(default_factory=dict)
    symmetrized: bool = False

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.int64).copy()
        y = np.asarray(self.y, dtype=np.int64).copy()
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        scale = 1 << self.n
        if x.size and (x.min() < 0 or x.max() >= scale):
            raise ValueError("x numerators must lie in [0, 2^n)")
        ymax = scale if self.symmetrized else scale - 1
        if y.size and (y.min() < 0 or y.max() > ymax):
            raise ValueError("y numerators out of range")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, pts: Sequence[tuple[int, int]], n: int, **kw) -> "PointSet":
        arr = np.array(pts, dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], n, **kw)

    def __len__(self) -> int:
        return int(self.x.size)

    def __iter__(self) -> Iterator[DyadicPoint]:
        for xi, yi in zip(self.x.tolist(), self.y.tolist()):
            yield DyadicPoint(xi, yi, self.n)

    @property
    def points(self) -> list[DyadicPoint]:
        return list(self)

    def as_multiset(self) -> list[tuple[int, int]]:
        return sorted(zip(self.x.tolist(), self.y.tolist()))


def generate_net(spec: GeneratorSpec) -> PointSet:
    """Digital net: digit-expand r, multiply by C_1 and C_2, radix-collapse."""
    n = spec.n
    xs, ys = [], []
    for r in range(1 << n):
        v = int_to_digits_lsb(r, n)
        xs.append(radix_collapse(mat_vec_mul(spec.c1, v)))
        ys.append(radix_collapse(mat_vec_mul(spec.c2, v)))
    meta = {"construction": "digital", "kind": spec.kind, "n": n}
    if spec.a is not None:
        meta["a"] = str(spec.a)
    return PointSet(np.array(xs), np.array(ys), n, meta)


def net_from_a(a: AVector) -> PointSet:
    """The net P_a written directly through its digit representation.

    The tuple (t_1, ..., t_n) runs lexicographically; x reads the t's in reverse
    and y reads b_k = t_k xor a_k (t_{k+1} xor ... xor t_n), b_n = t_n.
    """
    n = a.n
    xs = np.empty(1 << n, dtype=np.int64)
    ys = np.empty(1 << n, dtype=np.int64)
    for idx in range(1 << n):
        t = [(idx >> (n - 1 - k)) & 1 for k in range(n)]  # t[k] is t_{k+1}
        suffix = 0
        b = [0] * n
        for k in range(n - 1, -1, -1):
            b[k] = t[k] ^ (a.coef(k + 1) & suffix)
            suffix ^= t[k]
        x_num = 0
        for k in range(n):
            x_num |= t[k] << k
        y_num = 0
        for k in range(n):
            y_num = (y_num << 1) | b[k]
        xs[idx] = x_num
        ys[idx] = y_num
    return PointSet(xs, ys, n, {"construction": "darst", "kind": "nut_a", "n": n, "a": str(a)})


def hammersley(n: int) -> PointSet:
    return generate_net(make_generators("hammersley", n))


def is_0n2_net(P: PointSet) -> bool:
    """Direct count: every dyadic box of volume 2^-n holds exactly one point."""
    if P.symmetrized:
        raise ValueError("the (0,n,2)-net property is defined for 2^n-point sets, not symmetrized sets")
    n = P.n
    if len(P) != 1 << n:
        return False
    for j1 in range(n + 1):
        j2 = n - j1
        m1 = P.x >> (n - j1)
        m2 = P.y >> (n - j2)
        counts = np.bincount((m1 << j2) | m2, minlength=1 << n)
        if not np.all(counts == 1):
            return False
    return True


def rank_criterion(spec: GeneratorSpec) -> bool:
    n = spec.n
    for d1 in range(n + 1):
        rows = [spec.c1.row(i) for i in range(d1)] + [spec.c2.row(i) for i in range(n - d1)]
        if rank_of_stacked_rows(rows) != n:
            return False
    return True


def symmetrize(P: PointSet) -> PointSet:
    """Append the reflection (x, 1 - y) of every point; duplicates are kept."""
    if P.symmetrized:
        raise ValueError("point set is already symmetrized")
    scale = 1 << P.n
    x = np.concatenate([P.x, P.x])
    y = np.concatenate([P.y, scale - P.y])
    meta = dict(P.meta, symmetrized_from=dict(P.meta))
    return PointSet(x, y, P.n, meta, symmetrized=True)


def random_spec(n: int, rng: np.random.Generator) -> GeneratorSpec:
    """Uniformly random pair of n x n generator matrices."""
    c1 = BitMatrix(n, tuple(int(v) for v in rng.integers(0, 1 << n, size=n)))
    c2 = BitMatrix(n, tuple(int(v) for v in rng.integers(0, 1 << n, size=n)))
    return GeneratorSpec(n, c1, c2, "custom")


__all__ = [
    "AVector",
    "BitVector",
    "DyadicPoint",
    "GeneratorSpec",
    "PointSet",
    "generate_net",
    "hammersley",
    "is_0n2_net",
    "make_generators",
    "net_from_a",
    "random_spec",
    "rank_criterion",
    "reverse_bits",
    "symmetrize",
]
