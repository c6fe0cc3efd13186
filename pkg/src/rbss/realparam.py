"""Decimal streams, stage checkers and certified logarithm/exponential.

A real is handed around as a :class:`DigitStream`: a sign and the exact
truncations ``x_n = floor(|x| 10^n) / 10^n``. Relations between streams are
checked stage by stage; a check can refute at a finite stage but can only
ever report consistency up to the stage examined.

``ln`` is enclosed by the upper and lower Riemann sums of ``1/t`` on
``[1, x]`` with ``n`` equal pieces, whose gap is exactly
``(x - 1)^2 / (n x)``. ``exp`` is obtained from ``ln`` by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional


__all__ = [
    "DigitStream",
    "xi",
    "Xi",
    "CheckVerdict",
    "eq_check",
    "arith_check",
    "Enclosure",
    "ln_bounds",
    "ln_cert",
    "exp_cert",
]


@dataclass(frozen=True)
class DigitStream:
    """``sign`` is +1 or -1; ``producer(n)`` is the unsigned stage-``n``
    truncation. ``source`` is the exact value when the stream wraps one.
    ``canonical`` streams are floor expansions, which never end in 9s."""

    sign: int
    producer: Callable[[int], Fraction]
    source: Optional[Fraction] = None
    canonical: bool = False

    def truncation(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("stages are natural numbers")
        return Fraction(self.producer(n))

    def stage(self, n: int) -> Fraction:
        """Signed truncation; a zero truncation is never negative."""
        t = self.truncation(n)
        return -t if self.sign < 0 and t else t

    def digit(self, m: int) -> int:
        """The ``m``-th decimal digit after the point (``m = 0`` gives the
        integer part)."""
        if m == 0:
            return int(self.truncation(0))
        return int((self.truncation(m) - self.truncation(m - 1)) * 10**m)

    def last_digit(self, n: int) -> int:
        return int(self.truncation(n) * 10**n) % 10

    @classmethod
    def nines(cls, x) -> "DigitStream":
        """The expansion of a terminating decimal ``x > 0`` ending in 9s
        (1 as 0.999...)."""
        x = Fraction(x)
        if x <= 0 or 10 ** _decimals(x) * x % 1:
            raise ValueError("nines expansions exist for positive terminating decimals")
        return cls(1, lambda n: Fraction(math.ceil(x * 10**n) - 1, 10**n), None)


def _decimals(x: Fraction) -> int:
    d = x.denominator
    k = 0
    while d % 10 == 0 or d % 2 == 0 or d % 5 == 0:
        if d % 10 == 0:
            d //= 10
        elif d % 2 == 0:
            d //= 2
        else:
            d //= 5
        k += 1
    return k


def xi(x) -> DigitStream:
    """Decimal expansion of a rational: sign and floor truncations of ``|x|``."""
    x = Fraction(x)
    p, q = abs(x.numerator), x.denominator

    @lru_cache(maxsize=None)
    def truncate(n: int) -> Fraction:
        return Fraction(p * 10**n // q, 10**n)

    return DigitStream(-1 if x < 0 else 1, truncate, x, True)


def Xi(x, m: int) -> int:
    """Stage access ``xi(x)[m]``."""
    return xi(x).digit(m)


@dataclass(frozen=True)
class CheckVerdict:
    consistent: bool
    stage: int

    def __str__(self) -> str:
        return f"{'consistent' if self.consistent else 'refuted'}@{self.stage}"

    @classmethod
    def parse(cls, text: str) -> "CheckVerdict":
        kind, _, n = text.partition("@")
        if kind not in ("consistent", "refuted"):
            raise ValueError(f"not a verdict: {text!r}")
        return cls(kind == "consistent", int(n))


def _scan(n: int, ok: Callable[[int], bool]) -> CheckVerdict:
    if n < 1:
        raise ValueError("checks start at stage 1")
    for k in range(1, n + 1):
        if not ok(k):
            return CheckVerdict(False, k)
    return CheckVerdict(True, n)


def _eq_stage(x: DigitStream, y: DigitStream, k: int) -> bool:
    a, b = x.stage(k), y.stage(k)
    if a == b:
        return True
    if (a < 0 < b) or (b < 0 < a):
        return False
    # one unit apart in the last place is what 0.4999... against 0.5000...
    # looks like at every stage; floor expansions never end in 9s, so the
    # smaller magnitude must come from a stream that may
    low = x if abs(a) < abs(b) else y
    return abs(a - b) == Fraction(1, 10**k) and not low.canonical


def eq_check(x: DigitStream, y: DigitStream, n: int) -> CheckVerdict:
    """Stage test of ``x = y`` through stage ``n``.

    At each stage the truncations agree, or they differ by one unit in the
    last place and the smaller magnitude may be a 9-terminated expansion.
    """
    return _scan(n, lambda k: _eq_stage(x, y, k))


def arith_check(op: str, x: DigitStream, y: DigitStream, z: DigitStream, n: int) -> CheckVerdict:
    """Stage test of ``x + y = z`` or ``x * y = z`` through stage ``n``.

    ``add``: ``|x_k + y_k - z_k| <= 10^(1-k)``. ``mul``:
    ``|x_k y_k - z_k| <= 10^(1-k) (1 + |x_k| + |y_k|)``; the extra factor
    absorbs how truncation errors scale with the operands.
    """
    if op == "add":
        return _scan(n, lambda k: abs(x.stage(k) + y.stage(k) - z.stage(k)) <= Fraction(10, 10**k))
    if op == "mul":

        def ok(k):
            a, b = x.stage(k), y.stage(k)
            return abs(a * b - z.stage(k)) <= Fraction(10, 10**k) * (1 + abs(a) + abs(b))

        return _scan(n, ok)
    raise ValueError(f"unknown operation {op!r}")


# ------------------------------------------------------------ enclosures


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty enclosure")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, q) -> bool:
        return self.lo <= q <= self.hi

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __str__(self) -> str:
        return f"[{_pq(self.lo)}, {_pq(self.hi)}]"

    def decimal(self, digits: int) -> str:
        """Outward-rounded decimal display."""
        scale = 10**digits
        lo = Fraction(math.floor(self.lo * scale), scale)
        hi = Fraction(math.ceil(self.hi * scale), scale)
        return f"[{_dec(lo, digits)}, {_dec(hi, digits)}]"


def _pq(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _dec(q: Fraction, digits: int) -> str:
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole = math.floor(q)
    if digits == 0:
        return f"{sign}{whole}"
    frac = int((q - whole) * 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def ln_bounds(x, n: int) -> Enclosure:
    """``[L_n, U_n]`` for ``ln x``, ``x > 1``, as exact rationals.

    With ``h = (x - 1)/n`` the upper sum is ``sum_{k<n} h/(1 + k h)`` and the
    lower one ``sum_{1<=k<=n} h/(1 + k h)``.
    """
    x = Fraction(x)
    if x <= 1:
        raise ValueError("ln_bounds needs x > 1; use ln_cert below 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    # h/(1 + k h) = (p - q)/(n q + k (p - q)) for x = p/q
    p, q = x.numerator, x.denominator
    d = p - q
    upper = _harmonic(d, n * q, d, 0, n)
    lower = _harmonic(d, n * q, d, 1, n + 1)
    return Enclosure(lower, upper)


def _harmonic(num: int, a: int, b: int, start: int, stop: int) -> Fraction:
    """``sum_{start<=k<stop} num/(a + k b)`` by pairwise exact addition."""
    terms = [Fraction(num, a + k * b) for k in range(start, stop)]
    while len(terms) > 1:
        nxt = [terms[i] + terms[i + 1] for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0] if terms else Fraction(0)


def _gap(x: Fraction, n: int) -> Fraction:
    return (x - 1) ** 2 / (n * x)


def _least_n(x: Fraction, eps: Fraction) -> int:
    """Least ``n`` with ``(x - 1)^2 / (n x) <= eps``."""
    return max(1, math.ceil((x - 1) ** 2 / (x * eps)))


def _ln_direct(x: Fraction, eps: Fraction) -> Enclosure:
    # x > 1: least n whose exact gap is within eps
    return ln_bounds(x, _least_n(x, eps))


def _log_estimate(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


_TARGET_TERMS = 128
_ROOT_BITS = 40


def ln_cert(x, eps) -> Enclosure:
    """Enclosure of ``ln x`` of width at most ``eps``.

    ``x < 1`` is handled as ``-ln(1/x)``. For ``x > 1`` the argument is
    split as ``x = s^m t`` with ``s`` a rational near ``x^(1/m)``: the sums
    for ``s`` need about ``1/m`` as many terms, and ``t`` is so close to 1
    that one term does. ``m`` is picked to keep every sum short.
    """
    x, eps = Fraction(x), Fraction(eps)
    if x <= 0:
        raise ValueError("ln is defined for x > 0")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if x == 1:
        return Enclosure(Fraction(0), Fraction(0))
    if x < 1:
        return -ln_cert(1 / x, eps)
    est = _log_estimate(x)
    m = max(1, math.ceil(2 * est * est / (float(eps) * _TARGET_TERMS)))
    if m == 1:
        return _ln_direct(x, eps)
    # enough binary places that m (s - 1) is resolved to about sqrt(eps),
    # which keeps the sum for t to a term or two
    bits = _ROOT_BITS + m.bit_length() + max(0, math.ceil(-math.log2(eps) / 2))
    s = 1 + Fraction(math.ceil(math.expm1(est / m) * 2**bits), 2**bits)
    root = _ln_direct(s, eps / (2 * m))
    # s^m exactly would have millions of bits; bracket it instead and use
    # that ln is increasing: ln t lies between the logs of the bracket ends
    bits = 64 + max(0, -math.floor(math.log2(eps))) + 2 * m.bit_length()
    while True:
        p_lo, p_hi = _pow_bracket(s, m, bits)
        t_lo, t_hi = x / p_hi, x / p_lo
        if t_hi / t_lo - 1 <= eps / 8:
            break
        bits *= 2
    rest = Enclosure(_ln_signed(t_lo, eps / 8).lo, _ln_signed(t_hi, eps / 8).hi)
    # width so far is at most 7 eps / 8; round outward on a grid of eps / 16
    grid = max(0, math.ceil(-math.log2(eps))) + 4
    return Enclosure(_round_down(m * root.lo + rest.lo, grid), _round_up(m * root.hi + rest.hi, grid))


def _round_down(q: Fraction, bits: int) -> Fraction:
    return Fraction(math.floor(q * 2**bits), 2**bits)


def _round_up(q: Fraction, bits: int) -> Fraction:
    return Fraction(math.ceil(q * 2**bits), 2**bits)


def _pow_bracket(s: Fraction, m: int, bits: int) -> tuple[Fraction, Fraction]:
    """``lo <= s^m <= hi`` for ``s >= 1``, with ``bits`` binary places kept."""
    lo = hi = Fraction(1)
    base_lo = base_hi = s
    while m:
        if m & 1:
            lo = _round_down(lo * base_lo, bits)
            hi = _round_up(hi * base_hi, bits)
        m >>= 1
        if m:
            base_lo = _round_down(base_lo * base_lo, bits)
            base_hi = _round_up(base_hi * base_hi, bits)
    return lo, hi


def _ln_signed(t: Fraction, eps: Fraction) -> Enclosure:
    if t == 1:
        return Enclosure(Fraction(0), Fraction(0))
    if t > 1:
        return _ln_direct(t, eps)
    return -_ln_direct(1 / t, eps)


def exp_cert(x, eps) -> Enclosure:
    """Enclosure of ``e^x`` of width at most ``eps`` by bisection against
    certified ``ln``; ``x < 0`` goes through the reciprocal of ``e^{-x}``."""
    x, eps = Fraction(x), Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if x == 0:
        return Enclosure(Fraction(1), Fraction(1))
    if x < 0:
        pos = exp_cert(-x, eps)
        return Enclosure(1 / pos.hi, 1 / pos.lo)
    # 1 < e^x <= 4^x <= 4^ceil(x)
    lo, hi = Fraction(1), Fraction(4) ** math.ceil(x)
    tol = (hi - lo) / 8
    while hi - lo > eps:
        mid = (lo + hi) / 2
        while True:
            enc = ln_cert(mid, tol)
            if enc.hi < x:
                lo = mid
                break
            if enc.lo > x:
                hi = mid
                break
            tol /= 4
        tol = min(tol, (hi - lo) / 8)
    return Enclosure(lo, hi)
