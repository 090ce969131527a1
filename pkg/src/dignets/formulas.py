"""Closed-form reference values for the nets P_0 (Hammersley) and P_1."""
from __future__ import annotations

from fractions import Fraction


def l2_sq_hammersley(n: int) -> Fraction:
    """Squared L_2 discrepancy of the 2^n-point Hammersley net."""
    N = Fraction(1 << n)
    inner = (Fraction(n * n, 64) + Fraction(29 * n, 192) + Fraction(3, 8)
             - n / (16 * N) + 1 / (4 * N) - 1 / (72 * N * N))
    return inner / (N * N)


def l2_sq_all_ones(n: int) -> Fraction:
    """Squared L_2 discrepancy of P_a with a = (1, ..., 1)."""
    N = Fraction(1 << n)
    inner = Fraction(5 * n, 192) + Fraction(15, 32) + 1 / (4 * N) - 1 / (72 * N * N)
    return inner / (N * N)


def linf_hammersley(n: int) -> Fraction:
    """Star discrepancy of the Hammersley net. Only valid for n >= 2; n = 1 gives 1, the true value is 3/4."""
    N = Fraction(1 << n)
    return (Fraction(n, 3) + Fraction(13, 9) - (-1) ** n * Fraction(4, 9) / N) / N
