"""Discrepancy function and its L_2, L_inf (exact) and L_p (semi-analytic) norms.

All exact routines work on the integer numerators of the dyadic coordinates and
only build a :class:`~fractions.Fraction` at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .netgen import PointSet

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class Anchor:
    t1: Fraction
    t2: Fraction

    def __post_init__(self):
        t1, t2 = Fraction(self.t1), Fraction(self.t2)
        if not (0 <= t1 <= 1 and 0 <= t2 <= 1):
            raise ValueError("anchor components must lie in [0, 1]")
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)


@dataclass(frozen=True)
class LpResult:
    p: float
    value: Fraction | float
    mode: str  # "exact" or "quadrature"
    error_bound: float = 0.0

    def __float__(self) -> float:
        return float(self.value)

    def to_record(self, measure: str) -> dict:
        rec = {"measure": measure, "mode": self.mode, "p": "inf" if math.isinf(self.p) else self.p}
        if isinstance(self.value, Fraction):
            rec["numerator"] = str(self.value.numerator)
            rec["denominator"] = str(self.value.denominator)
            rec["float"] = float(self.value)
        else:
            rec["float"] = self.value
        rec["error_bound"] = self.error_bound
        return rec


class LpConvergenceError(RuntimeError):
    def __init__(self, msg: str, estimate: float, error: float):
        super().__init__(f"{msg} (best estimate {estimate!r}, error estimate {error:.3e})")
        self.estimate = estimate
        self.error = error


def local_discrepancy(P: PointSet, t: Anchor) -> Fraction:
    scale = 1 << P.n
    # z < t  <=>  z_num < t * 2^n  for integer z_num
    inside = (P.x < t.t1 * scale) & (P.y < t.t2 * scale)
    return Fraction(int(np.count_nonzero(inside)), len(P)) - t.t1 * t.t2


# ---------------------------------------------------------------- L_2, exact


def _pair_min_sum(a: list[int], b: list[int]) -> int:
    """sum_{i,j} min(a_i, a_j) * min(b_i, b_j) in O(N log N) with Fenwick trees over b."""
    size = max(b) + 2
    cnt = [0] * (size + 1)
    tot = [0] * (size + 1)
    order = sorted(range(len(a)), key=a.__getitem__)
    acc = 0
    seen = 0
    # walk in decreasing a: every element already inserted has a_j >= a_i
    for i in reversed(order):
        bi = b[i]
        # prefix over values < bi
        c = s = 0
        k = bi  # Fenwick index of value v is v + 1; prefix up to value bi - 1
        while k > 0:
            c += cnt[k]
            s += tot[k]
            k -= k & -k
        # later elements: sum of min(bi, bj)
        acc += a[i] * (2 * (s + bi * (seen - c)) + bi)
        k = bi + 1
        while k <= size:
            cnt[k] += 1
            tot[k] += bi
            k += k & -k
        seen += 1
    return acc


def l2_sq_exact(P: PointSet) -> Fraction:
    """Squared L_2 discrepancy by Warnock's formula, in exact arithmetic.

    L_2^2 = 1/9 - (2/N) sum (1-x^2)(1-y^2)/4 + (1/N^2) sum_{z,z'} (1-max x)(1-max y).
    """
    N = len(P)
    S = 1 << P.n
    X = [int(v) for v in P.x.tolist()]
    Y = [int(v) for v in P.y.tolist()]
    single = sum((S * S - x * x) * (S * S - y * y) for x, y in zip(X, Y))
    pairs = _pair_min_sum([S - x for x in X], [S - y for y in Y])
    return Fraction(1, 9) - Fraction(single, 2 * N * S**4) + Fraction(pairs, N * N * S * S)


def _cells(P: PointSet, extra_x=(), extra_y=()) -> Iterator[tuple[Fraction, Fraction, Fraction, Fraction, Fraction]]:
    """Rectangles on which the counting part is constant, with that constant.

    Yields (x0, x1, y0, y1, count/N) covering [0,1]^2; extra breakpoints refine the grid.
    """
    N = len(P)
    S = 1 << P.n
    pts = [(Fraction(x, S), Fraction(y, S)) for x, y in zip(P.x.tolist(), P.y.tolist())]
    xs = sorted({Fraction(0), Fraction(1), *(p[0] for p in pts), *map(Fraction, extra_x)})
    ys = sorted({Fraction(0), Fraction(1), *(p[1] for p in pts), *map(Fraction, extra_y)})
    xs = [v for v in xs if 0 <= v <= 1]
    ys = [v for v in ys if 0 <= v <= 1]
    for x0, x1 in zip(xs, xs[1:]):
        left = [q[1] for q in pts if q[0] <= x0]
        for y0, y1 in zip(ys, ys[1:]):
            yield x0, x1, y0, y1, Fraction(sum(1 for v in left if v <= y0), N)


def l2_sq_direct(P: PointSet) -> Fraction:
    """Exact integral of Delta^2 cell by cell; independent check of :func:`l2_sq_exact`."""
    total = Fraction(0)
    for x0, x1, y0, y1, c in _cells(P):
        dx, dy = x1 - x0, y1 - y0
        sx, sy = (x1**2 - x0**2) / 2, (y1**2 - y0**2) / 2
        qx, qy = (x1**3 - x0**3) / 3, (y1**3 - y0**3) / 3
        total += c * c * dx * dy - 2 * c * sx * sy + qx * qy
    return total


def delta_integral_direct(P: PointSet, x0: Fraction, x1: Fraction, y0: Fraction, y1: Fraction) -> Fraction:
    """Exact integral of Delta over the rectangle [x0,x1] x [y0,y1]."""
    total = Fraction(0)
    for a0, a1, b0, b1, c in _cells(P, (x0, x1), (y0, y1)):
        if a0 >= x0 and a1 <= x1 and b0 >= y0 and b1 <= y1:
            total += c * (a1 - a0) * (b1 - b0) - (a1**2 - a0**2) * (b1**2 - b0**2) / 4
    return total


# -------------------------------------------------------------- L_inf, exact


def linf_exact(P: PointSet) -> Fraction:
    """Exact sup |Delta| over [0,1]^2.

    Delta is a step count minus t1*t2, so on each grid cell the sup is reached as
    a limit at a corner: from above-right of a coordinate (closed count) or at a
    coordinate itself (strict count). Both variants are scanned over the grid.
    """
    N = len(P)
    S = 1 << P.n
    if 3 * P.n + N.bit_length() > 62:
        raise ValueError("point set too large for the int64 scan")
    order = np.argsort(P.x, kind="stable")
    X = P.x[order]
    Y = P.y[order]
    g1 = np.unique(np.concatenate([[0, S], X]))
    g2 = np.unique(np.concatenate([[0, S], Y])).astype(np.int64)
    g2_closed = g2[g2 < S]
    hist = np.zeros(S + 1, dtype=np.int64)
    S2 = S * S
    best = 0
    pos = 0
    for c1 in g1.tolist():
        while pos < N and X[pos] < c1:
            hist[Y[pos]] += 1
            pos += 1
        cum = np.cumsum(hist)
        open_cnt = np.where(g2 > 0, cum[np.maximum(g2 - 1, 0)], 0)
        d = open_cnt * S2 - N * c1 * g2
        best = max(best, int(np.abs(d).max()))
        if c1 < S:
            start = pos
            while pos < N and X[pos] == c1:
                hist[Y[pos]] += 1
                pos += 1
            if pos != start:
                cum = np.cumsum(hist)
            d = cum[g2_closed] * S2 - N * c1 * g2_closed
            best = max(best, int(np.abs(d).max()))
    return Fraction(best, N * S2)


# ----------------------------------------------------------- L_p, quadrature

@lru_cache(maxsize=None)
def _gauss(k: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(k)


_GL_LO = np.polynomial.legendre.leggauss(4)
_GL_HI = np.polynomial.legendre.leggauss(8)


def _row_integral(t: np.ndarray, breaks: np.ndarray, counts: np.ndarray, p: float) -> np.ndarray:
    """F(t) = int_0^1 |c(t2) - t*t2|^p dt2 for a step function c on ``breaks``.

    Each step is integrated with the antiderivative of |u|^p in a cancellation-free
    form. ``t`` has shape (M,); the result has shape (M,).
    """
    q = p + 1.0
    t = t[:, None]
    y0 = breaks[None, :-1]
    dy = (breaks[1:] - breaks[:-1])[None, :]
    c = counts[None, :]
    u0 = c - t * y0
    u1 = u0 - t * dy
    cross = (u0 > 0) & (u1 < 0)
    # on same-sign steps |u| runs from lo to hi = lo + t*dy
    lo = np.where(u1 >= 0, u1, -u0)
    if float(p).is_integer() and p <= 8:
        # (hi^q - lo^q) / (q t) = dy * sum_i hi^i lo^(q-1-i) / q
        hi = lo + t * dy
        acc = np.zeros_like(lo)
        for i in range(int(q)):
            acc += hi**i * lo ** (int(q) - 1 - i)
        same_val = dy * acc / q
    else:
        gap = t * dy
        with np.errstate(divide="ignore", invalid="ignore"):
            grow = np.where(lo > 0, lo**q * np.expm1(q * np.log1p(gap / lo)), gap**q)
        same_val = grow / (q * t)
    val = same_val.sum(axis=1)
    if cross.any():
        rows, cols = np.nonzero(cross)
        a0 = u0[rows, cols]
        a1 = -u1[rows, cols]
        tt = t[rows, 0]
        extra = (a0**q + a1**q) / (q * tt) - same_val[rows, cols]
        np.add.at(val, rows, extra)
    return val


def _interval_data(P: PointSet):
    """Per x-interval (t0, t1, breaks, counts) with the counting step function in t2."""
    N = len(P)
    S = 1 << P.n
    order = np.argsort(P.x, kind="stable")
    X = P.x[order]
    Y = P.y[order]
    edges = np.unique(np.concatenate([[0, S], X]))
    out = []
    for k in range(edges.size - 1):
        lo_e, hi_e = int(edges[k]), int(edges[k + 1])
        left = np.sort(Y[X <= lo_e])
        brk = np.unique(np.concatenate([[0, S], left[left < S]]))
        cnt = np.searchsorted(left, brk[:-1], side="right") / N
        out.append((lo_e / S, hi_e / S, brk / S, cnt))
    return out


def _sign_change_points(breaks: np.ndarray, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For each step: t above which c - t*y1 < 0, and t above which c - t*y0 <= 0."""
    y0, y1 = breaks[:-1], breaks[1:]
    tau1 = counts / y1
    with np.errstate(divide="ignore", invalid="ignore"):
        tau0 = np.where(y0 > 0, counts / np.where(y0 > 0, y0, 1.0), np.where(counts > 0, np.inf, 0.0))
    return tau1, tau0


def _kinks(t0: float, t1: float, breaks: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Values of t in (t0, t1) where c - t*y changes sign at a step edge."""
    tau1, tau0 = _sign_change_points(breaks, counts)
    cand = np.concatenate([tau1, tau0])
    width = t1 - t0
    cand = cand[(cand > t0 + 1e-14 * width) & (cand < t1 - 1e-14 * width)]
    return np.unique(cand)


def _step_coefficients(breaks: np.ndarray, counts: np.ndarray, p: int, t_ref: float):
    """Per-step expansions of int_{y0}^{y1} |c - t s|^p ds in tau = t - t_ref.

    Returns (pos, neg, cross). ``pos``/``neg`` hold tau^0..tau^p coefficients for a
    step on which c - t s keeps one sign; ``cross`` holds tau^0..tau^{p+1}
    coefficients of the numerator of a step where the sign flips inside (the
    value is that polynomial divided by t). Expanding about t_ref keeps every
    coefficient of the size of the integrand, so no cancellation occurs.
    """
    from math import comb

    y0, y1 = breaks[:-1], breaks[1:]
    c = counts
    q = p + 1
    nodes, weights = _gauss(max(1, (p + 2) // 2))
    half = (y1 - y0) / 2
    s_nodes = (y1 + y0)[:, None] / 2 + half[:, None] * nodes[None, :]
    u_ref = c[:, None] - t_ref * s_nodes
    pos = np.empty((c.size, p + 1))
    for k in range(p + 1):
        integrand = u_ref ** (p - k) * s_nodes**k
        pos[:, k] = comb(p, k) * (-1.0) ** k * half * (integrand @ weights)
    neg = (-1.0) ** p * pos
    beta0 = c - t_ref * y0
    beta1 = c - t_ref * y1
    cross = np.empty((c.size, q + 1))
    for k in range(q + 1):
        cross[:, k] = comb(q, k) * (beta0 ** (q - k) * (-y0) ** k + (-beta1) ** (q - k) * y1**k) / q
    return pos, neg, cross


def lp_norm(P: PointSet, p: float, tol: float = DEFAULT_TOL, *, max_pieces: int = 2_000_000,
            max_rounds: int = 60) -> LpResult:
    """L_p discrepancy by exact integration in t2 and adaptive Gauss-Legendre in t1.

    The t1-axis is cut at the point coordinates and at every t1 where the line
    t2 -> c - t1*t2 crosses zero at a step edge, so each piece is smooth.
    """
    if not math.isfinite(p):
        raise ValueError("use linf_exact for p = inf")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    data = _interval_data(P)
    integer_p = float(p).is_integer() and p <= 16
    a_list, b_list, k_list, coef_rows, ref_list = [], [], [], [], []
    for k, (t0, t1, brk, cnt) in enumerate(data):
        if t1 <= t0:
            continue
        cuts = np.concatenate([[t0], _kinks(t0, t1, brk, cnt), [t1]])
        a_list.append(cuts[:-1])
        b_list.append(cuts[1:])
        k_list.append(np.full(cuts.size - 1, k))
        if integer_p:
            t_ref = 0.5 * (t0 + t1)
            coef_rows.append(_piece_coefficients(cuts, brk, cnt, int(p), t_ref))
            ref_list.append(np.full(cuts.size - 1, t_ref))
    a = np.concatenate(a_list)
    b = np.concatenate(b_list)
    owner = np.arange(a.size)  # piece id for coefficient lookup
    kk = np.concatenate(k_list)
    coefs = np.concatenate(coef_rows) if integer_p else None
    t_refs = np.concatenate(ref_list) if integer_p else None
    n_same = int(p) + 1

    def evaluate(a, b, owner):
        """(Q_hi, |Q_hi - Q_lo|) for each piece."""
        half, mid = (b - a) / 2, (b + a) / 2
        out = []
        for nodes, weights in (_GL_HI, _GL_LO):
            tt = mid[:, None] + half[:, None] * nodes[None, :]
            if integer_p:
                cf = coefs[owner]
                tau = tt - t_refs[owner][:, None]
                f = _horner(cf[:, :n_same], tau) + _horner(cf[:, n_same:], tau) / tt
            else:
                f = np.empty_like(tt)
                ks = kk[owner]
                for k in np.unique(ks):
                    sel = np.nonzero(ks == k)[0]
                    _, _, brk, cnt = data[k]
                    f[sel] = _row_integral(tt[sel].ravel(), brk, cnt, p).reshape(sel.size, -1)
            out.append(half * (f @ weights))
        return out[0], np.abs(out[0] - out[1])

    q, err = evaluate(a, b, owner)
    integral = float(q.sum())
    lp_est = max(integral, 0.0) ** (1.0 / p)
    # absolute budget on the integral that keeps the L_p value within tol
    budget = 0.5 * tol * p * max(lp_est, 1e-300) ** (p - 1.0) if p > 1 else 0.5 * tol
    accepted_q = 0.0
    accepted_err = 0.0
    for _ in range(max_rounds):
        if accepted_err + float(err.sum()) <= budget:
            accepted_q += float(q.sum())
            accepted_err += float(err.sum())
            break
        bad = err > budget * (b - a)
        if not bad.any():
            # local tests pass but rounding noise adds up: split the worst tenth
            bad = err >= np.quantile(err, 0.9)
        ok = ~bad
        accepted_q += float(q[ok].sum())
        accepted_err += float(err[ok].sum())
        if 2 * int(bad.sum()) > max_pieces:
            est = max(accepted_q + float(q[bad].sum()), 0.0) ** (1.0 / p)
            raise LpConvergenceError("piece budget exhausted", est, float(err[bad].sum()) + accepted_err)
        m = 0.5 * (a[bad] + b[bad])
        a, b = np.concatenate([a[bad], m]), np.concatenate([m, b[bad]])
        owner = np.concatenate([owner[bad], owner[bad]])
        q, err = evaluate(a, b, owner)
    else:
        est = max(accepted_q + float(q.sum()), 0.0) ** (1.0 / p)
        raise LpConvergenceError("round budget exhausted", est, accepted_err + float(err.sum()))
    value = max(accepted_q, 0.0) ** (1.0 / p)
    upper = (accepted_q + accepted_err) ** (1.0 / p)
    lower = max(accepted_q - accepted_err, 0.0) ** (1.0 / p)
    return LpResult(p, value, "quadrature", max(upper - value, value - lower))


def _horner(coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-wise polynomial values: coef (M, d) ascending powers, x (M, K)."""
    out = np.zeros_like(x)
    for k in range(coef.shape[1] - 1, -1, -1):
        out = out * x + coef[:, k : k + 1]
    return out


def _piece_coefficients(cuts: np.ndarray, breaks: np.ndarray, counts: np.ndarray, p: int,
                        t_ref: float) -> np.ndarray:
    """Summed step expansions valid on each piece between consecutive cuts.

    Row layout: tau^0..tau^p of the same-sign part, then tau^0..tau^{p+1} of the
    crossing numerator.
    """
    pos, neg, cross = _step_coefficients(breaks, counts, p, t_ref)
    zp = np.zeros_like(pos)
    zc = np.zeros_like(cross)
    P_ = np.hstack([pos, zc])
    N_ = np.hstack([neg, zc])
    X_ = np.hstack([zp, cross])
    tau1, tau0 = _sign_change_points(breaks, counts)
    mid = 0.5 * (cuts[0] + cuts[1])
    status_pos = mid < tau1
    status_neg = mid > tau0
    start = np.where(status_pos[:, None], P_, np.where(status_neg[:, None], N_, X_)).sum(axis=0)
    inner = cuts[1:-1]
    delta = np.zeros((cuts.size - 1, P_.shape[1]))
    # a step leaves the positive regime at tau1 and the crossing regime at tau0
    for tau, before, after in ((tau1, P_, X_), (tau0, X_, N_)):
        hit = (tau > cuts[0]) & (tau < cuts[-1]) & np.isin(tau, inner)
        if hit.any():
            idx = np.searchsorted(inner, tau[hit]) + 1
            np.add.at(delta, idx, after[hit] - before[hit])
    return start + np.cumsum(delta, axis=0)


def l2_exact_result(P: PointSet) -> LpResult:
    """L_2^2 as an exact result record (the value is the square)."""
    return LpResult(2.0, l2_sq_exact(P), "exact")


def linf_exact_result(P: PointSet) -> LpResult:
    return LpResult(math.inf, linf_exact(P), "exact")
