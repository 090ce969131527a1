"""Command-line front-end: construction, measurement, verification sweeps and the scaling study.

Outputs are tables (CSV or JSON). Exact quantities are written as numerator and
denominator strings; floats only appear in convenience columns.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import formulas
from .discrepancy import DEFAULT_TOL, LpConvergenceError, l2_exact_result, linf_exact_result, lp_norm
from .gf2 import BitMatrix
from .haar import (
    Bound,
    CaseLabel,
    ClosedFn,
    FORMS,
    HaarIndex,
    closed_fn,
    corner_coefficient,
    haar_coeff_closed_labeled,
    haar_coeff_oracle,
    parseval_check,
    sweep,
)
from .netgen import (
    AVector,
    GeneratorSpec,
    PointSet,
    generate_net,
    is_0n2_net,
    make_generators,
    net_from_a,
    rank_criterion,
    symmetrize,
)

FAMILIES = ("zero", "one", "balanced", "custom", "random")
VERIFY_MAX_N = 8
# largest n per p for which the scaling study is run (p=2 exact, p=1 quadrature)
SCALING_MAX_N = {2: 16, 1: 12}


# ------------------------------------------------------------------- families

def balanced_a(n: int) -> AVector:
    """Zeros at indices floor(k (n-1) / ceil(sqrt n)), k < ceil(sqrt n); ones elsewhere."""
    if n == 1:
        return AVector(1, ())
    c = math.isqrt(n - 1) + 1
    zeros = {k * (n - 1) // c for k in range(c)}
    return AVector(n, tuple(0 if i in zeros else 1 for i in range(n - 1)))


def family_a(family: str, n: int, *, bits: str | None = None, rng: np.random.Generator | None = None) -> AVector:
    if family == "zero":
        return AVector.zeros(n)
    if family == "one":
        return AVector.ones(n)
    if family == "balanced":
        return balanced_a(n)
    if family == "custom":
        if bits is None:
            raise ValueError("family 'custom' needs an a-bitstring")
        return AVector.parse(bits, n)
    if family == "random":
        if rng is None:
            raise ValueError("family 'random' needs a seeded generator")
        return AVector(n, tuple(int(b) for b in rng.integers(0, 2, size=n - 1)))
    raise ValueError(f"unknown family {family!r}")


# -------------------------------------------------------------- scaling study

@dataclass(frozen=True)
class ScalingRow:
    n: int
    family: str
    a: str
    seed: int | None
    h: int
    N: int
    p: int
    l2_sq: Fraction | None
    value: float
    normalized: float

    def to_record(self) -> dict[str, str]:
        rec = {
            "n": str(self.n), "family": self.family, "a": self.a,
            "seed": "" if self.seed is None else str(self.seed),
            "h": str(self.h), "N": str(self.N), "p": str(self.p),
            "l2_sq_num": "" if self.l2_sq is None else str(self.l2_sq.numerator),
            "l2_sq_den": "" if self.l2_sq is None else str(self.l2_sq.denominator),
            "value": repr(self.value), "normalized": repr(self.normalized),
        }
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "ScalingRow":
        l2 = None
        if str(rec.get("l2_sq_num", "")) != "":
            l2 = Fraction(int(rec["l2_sq_num"]), int(rec["l2_sq_den"]))
        seed = rec.get("seed", "")
        return cls(
            n=int(rec["n"]), family=str(rec["family"]), a=str(rec["a"]),
            seed=None if seed in ("", None) else int(seed),
            h=int(rec["h"]), N=int(rec["N"]), p=int(rec["p"]), l2_sq=l2,
            value=float(rec["value"]), normalized=float(rec["normalized"]),
        )


SCALING_FIELDS = tuple(ScalingRow(1, "", "", None, 0, 0, 0, None, 0.0, 0.0).to_record())


def scaling_row(a: AVector, p: int, family: str, seed: int | None = None, tol: float = DEFAULT_TOL) -> ScalingRow:
    n = a.n
    P = net_from_a(a)
    if p == 2:
        l2 = l2_exact_result(P)
        sq = Fraction(l2.value)
        value = math.sqrt(sq)
    else:
        sq = None
        value = lp_norm(P, p, tol).value
    norm = (1 << n) * value / max(math.sqrt(n), a.h)
    return ScalingRow(n, family, str(a), seed, a.h, 1 << n, p, sq, value, norm)


def run_scaling_study(p: int, n_range: Iterable[int], a_family: str, *, bits: str | None = None,
                      seed: int | None = None, tol: float = DEFAULT_TOL) -> list[ScalingRow]:
    if p not in SCALING_MAX_N:
        raise ValueError("the scaling study supports p in {1, 2}")
    ns = list(n_range)
    if not ns:
        raise ValueError("empty n range")
    if max(ns) > SCALING_MAX_N[p] or min(ns) < 1:
        raise ValueError(f"n must lie in 1..{SCALING_MAX_N[p]} for p={p}")
    if a_family == "random" and seed is None:
        raise ValueError("family 'random' requires an explicit seed")
    if a_family == "custom":
        if bits is None:
            raise ValueError("family 'custom' needs an a-bitstring")
        ns = [len(bits) + 1]
    rng = np.random.default_rng(seed) if a_family == "random" else None
    rows = []
    for n in ns:
        a = family_a(a_family, n, bits=bits, rng=rng)
        rows.append(scaling_row(a, p, a_family, seed, tol))
    return rows


# ------------------------------------------------------------------- verify

VERIFY_FIELDS = ("check", "n", "a", "j1", "j2", "m1", "m2", "case",
                 "oracle_num", "oracle_den", "closed_num", "closed_den", "match")


@dataclass
class VerifyResult:
    n_cap: int
    forms: str
    checks: int
    failures: list[dict[str, Any]]

    @property
    def exit_code(self) -> int:
        return 0 if not self.failures else 1


def _frac_cols(prefix: str, v: Fraction | None) -> dict[str, str]:
    if v is None:
        return {f"{prefix}_num": "", f"{prefix}_den": ""}
    return {f"{prefix}_num": str(v.numerator), f"{prefix}_den": str(v.denominator)}


def _formula_row(check: str, n: int, a: str, got: Fraction, want: Fraction) -> dict[str, Any]:
    row = {"check": check, "n": n, "a": a, "j1": "", "j2": "", "m1": "", "m2": "", "case": ""}
    row.update(_frac_cols("oracle", got))
    row.update(_frac_cols("closed", want))
    row["match"] = got == want
    return row


def inject_fault(fn: ClosedFn, tag: str, delta: Fraction = Fraction(1, 1 << 60)) -> ClosedFn:
    """Perturb the closed form of one case; used to check that verify catches it."""
    def wrapped(a: AVector, idx: HaarIndex):
        value, label = fn(a, idx)
        if label.tag != tag:
            return value, label
        if isinstance(value, Bound):
            exact = None if value.exact is None else value.exact + delta
            return Bound(value.case, Fraction(0), value.constant, exact), label
        return value + delta, label
    return wrapped


def run_verify(n_cap: int, forms: str = "published", fn: ClosedFn | None = None) -> VerifyResult:
    """Exhaustive Haar sweep and formula checks for all a with n <= n_cap."""
    if not 1 <= n_cap <= VERIFY_MAX_N:
        raise ValueError(f"n_cap must lie in 1..{VERIFY_MAX_N} for exhaustive mode")
    fn = fn or closed_fn(forms)
    failures: list[dict[str, Any]] = []
    checks = 0
    for n in range(1, n_cap + 1):
        for bits in itertools.product((0, 1), repeat=n - 1):
            a = AVector(n, bits)
            s = sweep(a, forms=forms, fn=fn)
            checks += sum(s.checked.values())
            for r in s.failures:
                row = {"check": "haar", "n": n, "a": str(a)}
                row.update(r.to_row())
                failures.append(row)
            par = parseval_check(a, cap=VERIFY_MAX_N)
            checks += 1
            if not par.equal:
                failures.append(_formula_row("parseval", n, str(a), par.rhs, par.lhs))
        P1 = net_from_a(AVector.ones(n))
        P0 = net_from_a(AVector.zeros(n))
        pairs = [
            ("l2_hammersley", str(AVector.zeros(n)), Fraction(l2_exact_result(P0).value), formulas.l2_sq_hammersley(n)),
        ]
        # at n=1 the all-ones vector is empty, so P_1 is the Hammersley net and
        # the all-ones formula does not apply; likewise the L_inf formula
        if n >= 2:
            pairs.append(("l2_all_ones", str(AVector.ones(n)), Fraction(l2_exact_result(P1).value),
                          formulas.l2_sq_all_ones(n)))
            pairs.append(("linf_hammersley", str(AVector.zeros(n)), Fraction(linf_exact_result(P0).value),
                          formulas.linf_hammersley(n)))
        for check, a_str, got, want in pairs:
            checks += 1
            if got != want:
                failures.append(_formula_row(check, n, a_str, got, want))
    return VerifyResult(n_cap, forms, checks, failures)


# ------------------------------------------------------------------- output

def _emit(records: Sequence[dict[str, Any]], fieldnames: Sequence[str], fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(list(records), indent=2, default=str) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r)
        text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def read_scaling_rows(text: str, fmt: str) -> list[ScalingRow]:
    if fmt == "json":
        recs = json.loads(text)
    else:
        recs = list(csv.DictReader(io.StringIO(text)))
    return [ScalingRow.from_record(r) for r in recs]


# ------------------------------------------------------------------ parsing

def _a_from_args(args) -> AVector:
    bits = args.a if args.a is not None else ""
    if args.n is None:
        raise SystemExit("--n is required")
    if len(bits) != args.n - 1:
        raise SystemExit(f"--a must have length n-1 = {args.n - 1}")
    return AVector.parse(bits, args.n)


def _point_set(args) -> PointSet:
    if getattr(args, "kind", "nut_a") == "hammersley":
        P = generate_net(make_generators("hammersley", args.n))
    else:
        P = net_from_a(_a_from_args(args))
    if getattr(args, "sym", False):
        P = symmetrize(P)
    return P


def _cmd_gen(args) -> int:
    P = _point_set(args)
    recs = [{"index": i, "x_num": pt.x_num, "y_num": pt.y_num, "den": 1 << pt.scale,
             "x": float(pt.x), "y": float(pt.y)} for i, pt in enumerate(P)]
    _emit(recs, ("index", "x_num", "y_num", "den", "x", "y"), args.format, args.out)
    return 0


def _cmd_check(args) -> int:
    if args.c1_file or args.c2_file:
        if not (args.c1_file and args.c2_file):
            raise SystemExit("--c1-file and --c2-file go together")
        c1 = BitMatrix.parse(Path(args.c1_file).read_text())
        c2 = BitMatrix.parse(Path(args.c2_file).read_text())
        if c1.n != c2.n:
            raise SystemExit("generator matrices differ in size")
        spec = GeneratorSpec(c1.n, c1, c2, "custom")
    else:
        a = _a_from_args(args)
        spec = make_generators("nut_a", a.n, a)
    P = generate_net(spec)
    net, rank = is_0n2_net(P), rank_criterion(spec)
    rec = {"n": spec.n, "kind": spec.kind, "is_0n2_net": net, "rank_criterion": rank}
    _emit([rec], tuple(rec), args.format, args.out)
    return 0 if net and rank else 1


def _cmd_measure(args) -> int:
    P = _point_set(args)
    if args.verb == "l2":
        res = l2_exact_result(P)
        rec = res.to_record("l2_sq")
    elif args.verb == "linf":
        rec = linf_exact_result(P).to_record("linf")
    else:
        try:
            rec = lp_norm(P, args.p, args.tol).to_record("lp")
        except LpConvergenceError as e:
            print(f"lp: {e}", file=sys.stderr)
            return 2
    _emit([rec], tuple(rec), args.format, args.out)
    return 0


def _cmd_haar(args) -> int:
    a = _a_from_args(args)
    idx = HaarIndex(args.j1, args.j2, args.m1, args.m2)
    oracle = haar_coeff_oracle(net_from_a(a), idx)
    closed, label = haar_coeff_closed_labeled(a, idx, args.forms)
    rec = {"n": a.n, "a": str(a), "j1": idx.j1, "j2": idx.j2, "m1": idx.m1, "m2": idx.m2, "case": label.tag}
    rec.update(_frac_cols("oracle", oracle))
    if isinstance(closed, Bound):
        rec.update(_frac_cols("closed", closed.exact))
        rec.update(_frac_cols("bound", closed.limit))
        rec["match"] = closed.holds_for(oracle)
    else:
        rec.update(_frac_cols("closed", closed))
        rec.update(_frac_cols("bound", None))
        rec["match"] = closed == oracle
    rec["oracle"] = float(oracle)
    _emit([rec], tuple(rec), args.format, args.out)
    return 0


def _cmd_verify(args) -> int:
    fn = closed_fn(args.forms)
    if args.inject_fault:
        fn = inject_fault(fn, args.inject_fault)
    res = run_verify(args.n_cap, args.forms, fn)
    _emit(res.failures, VERIFY_FIELDS, args.format, args.out)
    print(f"verify n_cap={res.n_cap} forms={res.forms}: {res.checks} checks, {len(res.failures)} failures",
          file=sys.stderr)
    return res.exit_code


def _cmd_parseval(args) -> int:
    rep = parseval_check(_a_from_args(args), cap=args.cap)
    rec = {"n": rep.n, "equal": rep.equal}
    rec.update(_frac_cols("lhs", rep.lhs))
    rec.update(_frac_cols("rhs", rep.rhs))
    rec.update(_frac_cols("tail", rep.tail))
    _emit([rec], tuple(rec), args.format, args.out)
    return 0 if rep.equal else 1


def _cmd_scaling(args) -> int:
    try:
        rows = run_scaling_study(args.p, range(args.n_from, args.n_to + 1), args.family,
                                 bits=args.a, seed=args.seed, tol=args.tol)
    except ValueError as e:
        raise SystemExit(f"scaling: {e}")
    _emit([r.to_record() for r in rows], SCALING_FIELDS, args.format, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write to PATH instead of stdout")

    net = argparse.ArgumentParser(add_help=False)
    net.add_argument("--n", type=int)
    net.add_argument("--a", default=None, help="bitstring a_1..a_{n-1}")

    ap = argparse.ArgumentParser(prog="dignets", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", parents=[common, net], help="list the points of a net")
    p.add_argument("--kind", choices=("nut_a", "hammersley"), default="nut_a")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("check", parents=[common, net], help="(0,n,2)-net and rank criterion")
    p.add_argument("--c1-file")
    p.add_argument("--c2-file")
    p.set_defaults(func=_cmd_check)

    for verb in ("l2", "linf", "lp"):
        p = sub.add_parser(verb, parents=[common, net], help=f"{verb} discrepancy")
        p.add_argument("--kind", choices=("nut_a", "hammersley"), default="nut_a")
        p.add_argument("--sym", action="store_true", help="symmetrize the net first")
        if verb == "lp":
            p.add_argument("--p", type=float, required=True)
            p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("haar", parents=[common, net], help="one Haar coefficient, oracle vs closed form")
    p.add_argument("--j1", type=int, required=True)
    p.add_argument("--j2", type=int, required=True)
    p.add_argument("--m1", type=int, default=0)
    p.add_argument("--m2", type=int, default=0)
    p.add_argument("--forms", choices=FORMS, default="published")
    p.set_defaults(func=_cmd_haar)

    p = sub.add_parser("verify", parents=[common], help="exhaustive sweep; nonzero exit on any failure")
    p.add_argument("--n-cap", type=int, required=True)
    p.add_argument("--forms", choices=FORMS, default="published")
    p.add_argument("--inject-fault", choices=[f"J{i}" for i in range(1, 10)], default=None,
                   help="test hook: perturb one case's closed form")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("parseval", parents=[common, net], help="exact Parseval identity")
    p.add_argument("--cap", type=int, default=8)
    p.set_defaults(func=_cmd_parseval)

    p = sub.add_parser("scaling", parents=[common], help="normalized L_p over a range of n")
    p.add_argument("--p", type=int, choices=(1, 2), default=2)
    p.add_argument("--n-from", type=int, default=4)
    p.add_argument("--n-to", type=int, default=14)
    p.add_argument("--family", choices=FAMILIES, default="one")
    p.add_argument("--a", default=None, help="bits for family custom")
    p.add_argument("--seed", type=int, default=None, help="seed for family random")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=_cmd_scaling)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        print(f"dignets {args.verb}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
