"""Rational brackets for roots that are irrational in general."""

from __future__ import annotations

from fractions import Fraction


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def root_bracket(q: Fraction, k: int, bits: int = 96) -> tuple[Fraction, Fraction]:
    """Rationals lo <= q**(1/k) <= hi with hi - lo <= 2**-bits (equal when exact)."""
    q = Fraction(q)
    if q < 0 or k < 1:
        raise ValueError("need q >= 0 and k >= 1")
    if k == 1:
        return q, q
    num, den = q.numerator, q.denominator
    rn, rd = _iroot(num, k), _iroot(den, k)
    if rn ** k == num and rd ** k == den:
        r = Fraction(rn, rd)
        return r, r
    scale = 1 << bits
    # floor(q^(1/k) * 2^bits) = floor((num * 2^(bits*k) / den)^(1/k))
    lo_int = _iroot(num * (scale ** k) // den, k)
    return Fraction(lo_int, scale), Fraction(lo_int + 1, scale)


def root_upper(q: Fraction, k: int, bits: int = 96) -> Fraction:
    return root_bracket(q, k, bits)[1]


def ratio_exceeds_root(a: Fraction, b: Fraction, base: Fraction, t: int) -> bool:
    """Exact test of a > base**(1/t) * b for a, b >= 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    if b == 0:
        return a > 0
    return a ** t > base * b ** t
