"""Haar coefficients of the discrepancy function.

Two independent routes: an exact point-sum oracle valid for any dyadic point set,
and case-by-case closed forms for the nets P_a. Both return exact Fractions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterator

import numpy as np

from .discrepancy import delta_integral_direct, l2_sq_exact
from .gf2 import int_to_digit_tuple
from .netgen import AVector, PointSet, net_from_a

CASE_TAGS = tuple(f"J{i}" for i in range(1, 10))

# Implied constants of the bound-only cases: |mu| <= K * 2^(-n-j1-j2) on J7 and
# |mu| <= K * 2^(-2n) on J8. Kept in one table so a failure points either at a
# transcription error or at a genuine constant issue.
BOUND_CONSTANTS: dict[str, int] = {"J7": 4, "J8": 3}

DEFAULT_PARSEVAL_CAP = 8


@dataclass(frozen=True, order=True)
class HaarIndex:
    j1: int
    j2: int
    m1: int = 0
    m2: int = 0

    def __post_init__(self):
        for j, m in ((self.j1, self.m1), (self.j2, self.m2)):
            if j < -1:
                raise ValueError(f"level {j} < -1")
            if not 0 <= m < (1 << max(0, j)):
                raise ValueError(f"m={m} not in D_{j}")

    @property
    def level(self) -> int:
        return max(0, self.j1) + max(0, self.j2)

    @property
    def j(self) -> tuple[int, int]:
        return (self.j1, self.j2)

    @property
    def m(self) -> tuple[int, int]:
        return (self.m1, self.m2)


def iter_m(j1: int, j2: int) -> Iterator[tuple[int, int]]:
    for m1 in range(1 << max(0, j1)):
        for m2 in range(1 << max(0, j2)):
            yield m1, m2


@dataclass(frozen=True)
class CaseLabel:
    tag: str
    params: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.tag not in CASE_TAGS:
            raise ValueError(f"unknown case tag {self.tag!r}")

    def __str__(self) -> str:
        return self.tag


@dataclass(frozen=True)
class Bound:
    """Closed-form statement that is only an upper bound unless the box is empty.

    ``exact`` is set when no point lies in the open box, in which case the
    coefficient is the pure linear-part value.
    """

    case: str
    limit: Fraction
    constant: int
    exact: Fraction | None = None

    def holds_for(self, value: Fraction) -> bool:
        if self.exact is not None:
            return value == self.exact
        return abs(value) <= self.limit


@dataclass(frozen=True)
class HaarCoefficientReport:
    index: HaarIndex
    oracle_value: Fraction
    closed_value: Fraction | None
    case: CaseLabel
    match: bool
    bound: Bound | None = None

    CSV_FIELDS = ("j1", "j2", "m1", "m2", "case", "oracle_num", "oracle_den",
                  "closed_num", "closed_den", "match")

    def to_row(self) -> dict[str, Any]:
        closed = self.closed_value
        if closed is None and self.bound is not None:
            closed = self.bound.limit
        return {
            "j1": self.index.j1, "j2": self.index.j2,
            "m1": self.index.m1, "m2": self.index.m2,
            "case": self.case.tag,
            "oracle_num": str(self.oracle_value.numerator),
            "oracle_den": str(self.oracle_value.denominator),
            "closed_num": "" if closed is None else str(closed.numerator),
            "closed_den": "" if closed is None else str(closed.denominator),
            "match": self.match,
        }


# ------------------------------------------------------------------ classify

def classify(j1: int, j2: int, n: int) -> CaseLabel:
    if j1 < -1 or j2 < -1:
        raise ValueError("levels must be >= -1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if j1 == -1 and j2 == -1:
        return CaseLabel("J1")
    if j1 == -1 or j2 == -1:
        k = j1 if j2 == -1 else j2
        if k >= n:
            return CaseLabel("J3")
        # for n = 1 the index (0,-1) is both J4 and J8; J4 wins (its value is exact)
        if j2 == -1 and k == 0:
            return CaseLabel("J4")
        if k == n - 1:
            return CaseLabel("J8")
        return CaseLabel("J2") if j1 == -1 else CaseLabel("J5")
    if j1 >= n or j2 >= n:
        return CaseLabel("J9")
    if j1 + j2 <= n - 3:
        return CaseLabel("J6")
    return CaseLabel("J7")


# -------------------------------------------------------------------- oracle

def _axis(coord: np.ndarray, j: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Box index m and the integer tent weight ``2^n (1 - |2m+1-2^{j+1} z|)``."""
    S = 1 << n
    if j == -1:
        return np.zeros_like(coord), S - coord
    m = (coord << j) >> n
    w = S - np.abs((2 * m + 1) * S - (coord << (j + 1)))
    w[(m >= (1 << j)) | (w < 0)] = 0
    return m, w


def linear_part(j1: int, j2: int) -> Fraction:
    """Coefficient of the linear part -t1 t2 alone (value on empty boxes)."""
    if j1 == -1 and j2 == -1:
        return Fraction(-1, 4)
    if j2 == -1:
        return Fraction(1, 1 << (2 * j1 + 3))
    if j1 == -1:
        return Fraction(1, 1 << (2 * j2 + 3))
    return Fraction(-1, 1 << (2 * j1 + 2 * j2 + 4))


def _count_scale(j1: int, j2: int, N: int, n: int) -> Fraction:
    """Factor turning the integer point sum into the counting part."""
    S2 = 1 << (2 * n)
    if j1 == -1 and j2 == -1:
        return Fraction(1, N * S2)
    if j2 == -1:
        return Fraction(-1, N * S2 << (j1 + 1))
    if j1 == -1:
        return Fraction(-1, N * S2 << (j2 + 1))
    return Fraction(1, N * S2 << (j1 + j2 + 2))


def oracle_level(P: PointSet, j1: int, j2: int) -> tuple[Fraction, dict[tuple[int, int], Fraction]]:
    """All coefficients of level (j1, j2) as (empty-box value, {m: value}).

    Boxes missing from the dict hold no point in their interior and take the
    first value.
    """
    if len(P) == 0:
        raise ValueError("empty point set")
    n = P.n
    lin = linear_part(j1, j2)
    m1, w1 = _axis(P.x, j1, n)
    m2, w2 = _axis(P.y, j2, n)
    prod = w1 * w2
    keep = prod > 0
    if not keep.any():
        return lin, {}
    shift = max(0, j2)
    keys = (m1[keep] << shift) | m2[keep]
    uniq, inv = np.unique(keys, return_inverse=True)
    sums = np.zeros(uniq.size, dtype=np.int64)
    np.add.at(sums, inv, prod[keep])
    scale = _count_scale(j1, j2, len(P), n)
    mask = (1 << shift) - 1
    out = {}
    for key, s in zip(uniq.tolist(), sums.tolist()):
        out[(key >> shift, key & mask)] = lin + scale * s
    return lin, out


def haar_coeff_oracle(P: PointSet, idx: HaarIndex) -> Fraction:
    default, values = oracle_level(P, idx.j1, idx.j2)
    return values.get(idx.m, default)


def _halves(j: int, m: int) -> list[tuple[Fraction, Fraction, int]]:
    if j == -1:
        return [(Fraction(0), Fraction(1), 1)]
    lo, mid, hi = Fraction(2 * m, 2 ** (j + 1)), Fraction(2 * m + 1, 2 ** (j + 1)), Fraction(2 * m + 2, 2 ** (j + 1))
    return [(lo, mid, 1), (mid, hi, -1)]


def haar_coeff_direct(P: PointSet, idx: HaarIndex) -> Fraction:
    """Integral of Delta against h_{j,m} by exact cell integration; slow, for cross-checks."""
    total = Fraction(0)
    for x0, x1, s1 in _halves(idx.j1, idx.m1):
        for y0, y1, s2 in _halves(idx.j2, idx.m2):
            total += s1 * s2 * delta_integral_direct(P, x0, x1, y0, y1)
    return total


# -------------------------------------------------------------- closed forms

FORMS = ("published", "derived")


def _p2(e: int) -> Fraction:
    return Fraction(2) ** e


def _xor(bits) -> int:
    out = 0
    for b in bits:
        out ^= b
    return out


def _last_one(a: AVector, upto: int) -> int | None:
    """Greatest w in 1..upto with a_w = 1."""
    for w in range(upto, 0, -1):
        if a.coef(w):
            return w
    return None


def case2_t_digits(a: AVector, s: list[int], w: int) -> dict[int, int]:
    """Solve b_k = s_k for the digits t_k, k in 1..j2 except w.

    Where a_k = 0 the digit is s_k; for a_k = 1 it is the xor of s_k up to
    and including s at the next index carrying a one.
    """
    j2 = len(s)
    ones = [k for k in range(1, j2 + 1) if a.coef(k)]
    t = {}
    for k in range(1, j2 + 1):
        if k == w:
            continue
        if not a.coef(k):
            t[k] = s[k - 1]
        else:
            nxt = ones[ones.index(k) + 1]
            t[k] = _xor(s[k - 1:nxt])
    return t


def low_digits(a: AVector, s: list[int], tau: int) -> list[int]:
    """t_1..t_{j2} of the points in a box with b_k = s_k, given T_{j2+1} = tau.

    Only t_w (last index with a_w = 1) depends on tau.
    """
    t = [0] * len(s)
    T = tau
    for k in range(len(s), 0, -1):
        t[k - 1] = s[k - 1] ^ (a.coef(k) & T)
        T ^= t[k - 1]
    return t


def case5_epsilon(a: AVector, r: list[int]) -> Fraction:
    n = a.n
    j1 = len(r)
    eps = Fraction(r[0], 1 << n)
    for k in range(2, j1 + 1):
        d = r[k - 1] ^ (a.coef(n + 1 - k) & _xor(r[:k - 1]))
        eps += Fraction(d, 1 << (n + 1 - k))
    return eps


@lru_cache(maxsize=1024)
def _occupied(n: int, bits: tuple[int, ...], j1: int, j2: int) -> frozenset:
    _, values = oracle_level(net_from_a(AVector(n, bits)), j1, j2)
    return frozenset(values)


def _bound(a: AVector, idx: HaarIndex, tag: str) -> tuple[Bound, CaseLabel]:
    n, j1, j2 = a.n, idx.j1, idx.j2
    empty = idx.m not in _occupied(n, a.a, j1, j2)
    K = BOUND_CONSTANTS[tag]
    limit = K * (_p2(-n - j1 - j2) if tag == "J7" else _p2(-2 * n))
    exact = linear_part(j1, j2) if empty else None
    return Bound(tag, limit, K, exact), CaseLabel(tag, {"empty": empty})


def _published(a: AVector, idx: HaarIndex, tag: str) -> tuple[Fraction, CaseLabel]:
    """The closed forms as stated for Cases 1-9, transcribed term by term."""
    n = a.n
    j1, j2 = idx.j1, idx.j2
    ac = a.coef
    if tag == "J1":
        return corner_coefficient(a), CaseLabel(tag, {"h": a.h})
    if tag == "J3":
        k = max(j1, j2)
        return _p2(-2 * k - 3), CaseLabel(tag, {"k": k})
    if tag == "J4":
        return -_p2(-n - 3) + _p2(-2 * n - 2), CaseLabel(tag)
    if tag == "J9":
        return -_p2(-2 * j1 - 2 * j2 - 4), CaseLabel(tag)
    if tag == "J2":
        s = int_to_digit_tuple(idx.m2, j2)
        w = _last_one(a, j2)
        if w is None:
            inner = (-_p2(2 * j2 + 2) * (ac(j2 + 1) - 1)
                     + _p2(n + j2) * (ac(j2 + 1) * ac(j2 + 2) - 2)
                     + _p2(2 * n + 2) * sum(Fraction(s[k - 1], 1 << (n + 1 - k)) for k in range(1, j2 + 1)))
            return _p2(-2 * n - 2 * j2 - 4) * inner, CaseLabel(tag, {"w": None})
        t = case2_t_digits(a, s, w)
        eps = sum((Fraction(v, 1 << (n + 1 - k)) for k, v in t.items()), Fraction(0))
        X = _xor(s[w - 1:])
        if ac(j2 + 1) == 0:
            mu = (_p2(-2 * n - 2) - _p2(-n - j2 - 3) + _p2(-n - 2 * j2 + w - 5) + _p2(-2 * j2 - 2) * eps
                  + _p2(-2 * n - j2 + w - 4) * ac(j2 + 2) * (1 - 2 * X))
        else:
            mu = (-_p2(-n - j2 - 3) + _p2(-j2 + w - 2 * n - 3) + _p2(-2 * j2 - n + w - 4) + _p2(-2 * j2 - 2) * eps
                  - _p2(-2 * n - j2 + w - 2) * X + _p2(-n - j2 - 4) * ac(j2 + 2))
        return mu, CaseLabel(tag, {"w": w, "eps": eps, "X": X})
    if tag == "J5":
        r = int_to_digit_tuple(idx.m1, j1)
        R = _xor(r)
        eps = case5_epsilon(a, r)
        mu = (_p2(-2 * n - 2) - _p2(-n - j1 - 3) + _p2(-2 * j1 - 2) * eps - _p2(-2 * n - 1) * R
              - _p2(-n - j1 - 3) * ac(n - j1 - 1) * (1 - 2 * R))
        return mu, CaseLabel(tag, {"R": R, "eps": eps})
    if tag == "J6":
        R = _xor(int_to_digit_tuple(idx.m1, j1))
        aR = 0 if j1 == 0 else ac(n - j1) * R
        w = _last_one(a, j2) if j2 > 0 else None
        if w is None:
            return _p2(-2 * n - 2) * (1 - 2 * aR) * (1 - ac(j2 + 1)), CaseLabel(tag, {"R": R, "w": None})
        X = _xor(int_to_digit_tuple(idx.m2, j2)[w - 1:])
        if ac(j2 + 1) == 0:
            mu = _p2(-2 * n - 2) * (1 - 2 * aR)
        else:
            mu = -_p2(-2 * n - j2 + w - 3) * (1 - 2 * aR) * (1 - 2 * X)
        return mu, CaseLabel(tag, {"R": R, "w": w, "X": X})
    raise AssertionError(tag)


def _derived(a: AVector, idx: HaarIndex, tag: str) -> tuple[Fraction, CaseLabel]:
    """Re-derived closed forms for J2, J4, J5 and J6; other cases as published."""
    n = a.n
    j1, j2 = idx.j1, idx.j2
    ac = a.coef
    if tag in ("J4", "J5"):
        # one formula for 0 <= j1 <= n-2 with q = n - j1 the first free x digit
        q = n - j1
        r = int_to_digit_tuple(idx.m1, j1)
        R = _xor(r)
        eps = case5_epsilon(a, r) if j1 else Fraction(0)
        mu = (_p2(-2 * n - 2) - _p2(-n - j1 - 3) + _p2(-2 * j1 - 2) * eps
              - _p2(-2 * n - 1) * ac(q) * R + _p2(-n - j1 - 3) * ac(q - 1) * (1 - 2 * R))
        return mu, CaseLabel(tag, {"R": R, "eps": eps})
    if tag == "J2":
        p = j2 + 1
        s = int_to_digit_tuple(idx.m2, j2)
        Nf = 1 << (n - p)
        # the digit after b_p fixes the parity T_{p+1} alone when a_{p+1} = 1 or p+1 = n
        delta = 1 if (p + 1 == n or ac(p + 1)) else 0
        A1 = Fraction(Nf + 1, 2) if ac(p) else Fraction(Nf * (2 + delta), 4)
        t0 = low_digits(a, s, 0)
        L0 = sum((Fraction(d, 1 << (n - k)) for k, d in enumerate(t0)), Fraction(0))
        w = _last_one(a, j2)
        dL = Fraction(0) if w is None else (1 - 2 * _xor(s[w - 1:])) * _p2(w - 1 - n)
        mu = (_p2(-2 * n - 2) * (1 - ac(p)) - _p2(-n - p - 2) + _p2(-n - p - 3) * ac(p) * delta
              + _p2(-2 * p) * L0 + _p2(-2 * n) * Nf * A1 * dL)
        return mu, CaseLabel(tag, {"w": w, "delta": delta, "L0": L0})
    if tag == "J6":
        p, q = j2 + 1, n - j1
        R = _xor(int_to_digit_tuple(idx.m1, j1))
        aq = ac(q)
        rho = 1 - 2 * aq * R
        w = _last_one(a, j2)
        X = _xor(int_to_digit_tuple(idx.m2, j2)[w - 1:]) if w else 0
        dL = Fraction(0) if w is None else (1 - 2 * X) * _p2(w - q)
        kappa = 1 if (q == p + 2 and ac(p + 1) == 0) else 0
        eps = 1 - 2 * (1 - aq) * R
        if ac(p):
            K = Fraction(kappa * eps, 4) + dL / 2
        else:
            K = _p2(p - q - 1) + dL * _p2(q - p) * kappa * eps / 4
        return _p2(-n - j1 - j2 - 2) * rho * K, CaseLabel(tag, {"R": R, "w": w, "kappa": kappa})
    return _published(a, idx, tag)


def haar_coeff_closed_labeled(a: AVector, idx: HaarIndex, forms: str = "published") -> tuple[Fraction | Bound, CaseLabel]:
    if forms not in FORMS:
        raise ValueError(f"forms must be one of {FORMS}")
    tag = classify(idx.j1, idx.j2, a.n).tag
    if tag in ("J7", "J8"):
        return _bound(a, idx, tag)
    return (_published if forms == "published" else _derived)(a, idx, tag)


def haar_coeff_closed(a: AVector, idx: HaarIndex, forms: str = "published") -> Fraction | Bound:
    """Closed-form coefficient of P_a; a :class:`Bound` for J7 and J8.

    ``forms="published"`` evaluates the stated case formulas verbatim,
    ``forms="derived"`` the re-derived ones (they differ on J2, J4, J5, J6).
    """
    return haar_coeff_closed_labeled(a, idx, forms)[0]


def corner_coefficient(a: AVector) -> Fraction:
    return _p2(-a.n - 3) * (a.h + 5) + _p2(-2 * a.n - 2)


ClosedFn = Callable[[AVector, HaarIndex], "tuple[Fraction | Bound, CaseLabel]"]


def closed_fn(forms: str = "published") -> ClosedFn:
    return lambda a, idx: haar_coeff_closed_labeled(a, idx, forms)


def compare(a: AVector, idx: HaarIndex, oracle_value: Fraction, fn: ClosedFn | None = None) -> HaarCoefficientReport:
    closed, label = (fn or closed_fn())(a, idx)
    if isinstance(closed, Bound):
        return HaarCoefficientReport(idx, oracle_value, closed.exact, label, closed.holds_for(oracle_value), closed)
    return HaarCoefficientReport(idx, oracle_value, closed, label, closed == oracle_value)


CONSTANT_CASES = ("J1", "J3", "J4", "J9")


@dataclass
class SweepSummary:
    a: AVector
    checked: dict[str, int] = field(default_factory=dict)
    failures: list[HaarCoefficientReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def failed_by_case(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.failures:
            out[r.case.tag] = out.get(r.case.tag, 0) + 1
        return out


def sweep(a: AVector, j_max: int | None = None, forms: str = "published", fn: ClosedFn | None = None) -> SweepSummary:
    """Closed form against oracle for every j in {-1..j_max}^2 and every m.

    Levels whose closed form does not depend on m are compared once against
    each distinct oracle value occurring on the level, which covers every m.
    """
    n = a.n
    if j_max is None:
        j_max = n + 2
    fn = fn or closed_fn(forms)
    P = net_from_a(a)
    out = SweepSummary(a)
    for j1 in range(-1, j_max + 1):
        for j2 in range(-1, j_max + 1):
            tag = classify(j1, j2, n).tag
            default, values = oracle_level(P, j1, j2)
            total = (1 << max(0, j1)) * (1 << max(0, j2))
            out.checked[tag] = out.checked.get(tag, 0) + total
            if tag in CONSTANT_CASES:
                seen = dict(values)
                if len(values) < total:
                    m_empty = next(m for m in iter_m(j1, j2) if m not in values)
                    seen[m_empty] = default
                for m, v in seen.items():
                    r = compare(a, HaarIndex(j1, j2, *m), v, fn)
                    if not r.match:
                        out.failures.append(r)
                continue
            for m1, m2 in iter_m(j1, j2):
                r = compare(a, HaarIndex(j1, j2, m1, m2), values.get((m1, m2), default), fn)
                if not r.match:
                    out.failures.append(r)
    return out


def iter_reports(a: AVector, j_max: int | None = None, forms: str = "published") -> Iterator[HaarCoefficientReport]:
    """One report per (j, m); slow for large j_max, meant for small tables."""
    n = a.n
    if j_max is None:
        j_max = n + 2
    fn = closed_fn(forms)
    P = net_from_a(a)
    for j1 in range(-1, j_max + 1):
        for j2 in range(-1, j_max + 1):
            default, values = oracle_level(P, j1, j2)
            for m1, m2 in iter_m(j1, j2):
                yield compare(a, HaarIndex(j1, j2, m1, m2), values.get((m1, m2), default), fn)


def j7_exceptional_counts(a: AVector) -> dict[tuple[int, int], int]:
    """For each J7 level, how many m have |mu| different from the linear-part value."""
    n = a.n
    P = net_from_a(a)
    out = {}
    for j1 in range(n):
        for j2 in range(n):
            if classify(j1, j2, n).tag != "J7":
                continue
            lin = abs(linear_part(j1, j2))
            _, values = oracle_level(P, j1, j2)
            out[(j1, j2)] = sum(1 for v in values.values() if abs(v) != lin)
    return out


# ------------------------------------------------------------------ Parseval

def level_energy(P: PointSet, j1: int, j2: int) -> Fraction:
    """2^|j| * sum over m of mu^2 for one level."""
    default, values = oracle_level(P, j1, j2)
    count = (1 << max(0, j1)) * (1 << max(0, j2))
    total = default * default * (count - len(values))
    total += sum((v * v for v in values.values()), Fraction(0))
    return total * (1 << (max(0, j1) + max(0, j2)))


def parseval_tail(n: int) -> Fraction:
    """Energy of every level with j1 >= n or j2 >= n, where only the linear part survives.

    Rays (k,-1), (-1,k), k >= n: 2^k * 2^k * 2^(-4k-6) summed, twice.
    Both levels >= 0: sum of 2^(-2 j1 - 2 j2 - 8) over the complement of [0,n)^2.
    """
    q = Fraction(1, 4)
    ray = 2 * Fraction(1, 64) * q ** n / (1 - q)
    full = (1 / (1 - q)) ** 2
    inner = ((1 - q ** n) / (1 - q)) ** 2
    return ray + Fraction(1, 256) * (full - inner)


@dataclass(frozen=True)
class ParsevalReport:
    n: int
    lhs: Fraction
    rhs: Fraction
    finite_part: Fraction
    tail: Fraction

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


def parseval_check(a: AVector, cap: int = DEFAULT_PARSEVAL_CAP) -> ParsevalReport:
    n = a.n
    if n > cap:
        raise ValueError(f"n={n} exceeds the Parseval cap {cap}")
    P = net_from_a(a)
    finite = sum((level_energy(P, j1, j2) for j1 in range(-1, n) for j2 in range(-1, n)), Fraction(0))
    tail = parseval_tail(n)
    return ParsevalReport(n, l2_sq_exact(P), finite + tail, finite, tail)


# ------------------------------------------------------------ square function

MAX_LEVEL_CAP = 12


@dataclass(frozen=True)
class SquareFunctionResult:
    p: float
    level_cap: int
    value: float
    tail_bound: float


def _linear_tail_sq(n: int, L: int) -> Fraction:
    """sup of the squared square-function contribution of all levels |j| > L
    that carry only the linear part (j1 >= n or j2 >= n)."""
    q = Fraction(1, 4)
    M = L + 1
    # both levels >= 0: (#pairs with j1+j2 = s) * 2^(-2s-8), minus pairs with both < n
    s_sum = q ** M * (1 + M * (1 - q)) / (1 - q) ** 2
    inner = sum((q ** (j1 + j2) for j1 in range(n) for j2 in range(n) if j1 + j2 > L), Fraction(0))
    both = (s_sum - inner) / 256
    rays = 2 * Fraction(1, 64) * q ** M / (1 - q)
    return both + rays


def square_function_lp(P: PointSet, p: float, level_cap: int) -> SquareFunctionResult:
    """L_p norm of the square function truncated to |j| <= level_cap.

    The truncated S^2 is constant on the 2^-L x 2^-L grid. ``tail_bound`` bounds
    the gap to the untruncated norm by the sup norm of the omitted part.
    """
    if not p > 1:
        raise ValueError("p must be > 1")
    n = P.n
    L = level_cap
    if L < n:
        raise ValueError("level_cap must be >= n")
    if L > MAX_LEVEL_CAP:
        raise ValueError(f"level_cap above {MAX_LEVEL_CAP} is too costly")
    G = 1 << L
    S2 = np.zeros((G, G))
    tail_sq = Fraction(0)
    for j1 in range(-1, L + 1):
        for j2 in range(-1, L + 1):
            lev = max(0, j1) + max(0, j2)
            finite = j1 < n and j2 < n
            if lev > L:
                if finite:
                    default, values = oracle_level(P, j1, j2)
                    peak = max([abs(default)] + [abs(v) for v in values.values()])
                    tail_sq += (peak * (1 << lev)) ** 2
                continue
            default, values = oracle_level(P, j1, j2)
            k1, k2 = 1 << max(0, j1), 1 << max(0, j2)
            grid = np.full((k1, k2), float(default) ** 2)
            for (m1, m2), v in values.items():
                grid[m1, m2] = float(v) ** 2
            grid *= float(4 ** lev)
            S2 += np.kron(grid, np.ones((G // k1, G // k2)))
    tail_sq += _linear_tail_sq(n, L)
    value = float(np.mean(np.sqrt(S2) ** p) ** (1.0 / p))
    return SquareFunctionResult(float(p), L, value, float(tail_sq) ** 0.5)


__all__ = [
    "BOUND_CONSTANTS",
    "Bound",
    "CaseLabel",
    "HaarCoefficientReport",
    "HaarIndex",
    "ParsevalReport",
    "SquareFunctionResult",
    "classify",
    "closed_fn",
    "corner_coefficient",
    "haar_coeff_closed",
    "haar_coeff_closed_labeled",
    "haar_coeff_direct",
    "haar_coeff_oracle",
    "j7_exceptional_counts",
    "linear_part",
    "oracle_level",
    "parseval_check",
    "parseval_tail",
    "square_function_lp",
    "SweepSummary",
    "iter_reports",
    "sweep",
]
