"""Generalized hypergeometric series, exact where they terminate.

Terminating series with rational parameters and rational argument are summed
in :class:`fractions.Fraction` arithmetic. Non-terminating series are summed
term by term in extended precision when the argument is inside the unit disk;
at ``|z| = 1`` convergence is algebraic rather than geometric, and those are
handed to :func:`mpmath.hyper`, which applies series acceleration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import mpmath

from ..errors import NonConvergence

REL_TOL = 1e-18
CONFIRMATIONS = 3
TERM_CAP = 100_000


def poch(a, n: int):
    """Rising factorial ``a (a+1) ... (a+n-1)``; exact for rational ``a``."""
    out = Fraction(1) if isinstance(a, (int, Fraction)) else mpmath.mpf(1)
    for i in range(n):
        out *= a + i
    return out


def factorial_ratio(num: list[int], den: list[int]) -> Fraction:
    """``prod(num_i!) / prod(den_i!)`` for non-negative integers."""
    top = 1
    for n in num:
        top *= factorial(n)
    bot = 1
    for n in den:
        bot *= factorial(n)
    return Fraction(top, bot)


def gamma_int(n) -> int:
    """Gamma at a positive integer."""
    n = Fraction(n)
    if n.denominator != 1 or n <= 0:
        raise ValueError(f"gamma_int needs a positive integer, got {n}")
    return factorial(int(n) - 1)


def _nonpositive_int(x) -> int | None:
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        if x.denominator == 1 and x <= 0:
            return int(-x)
    return None


@dataclass(frozen=True)
class HyperSeries:
    """``pFq(upper; lower; z)``.

    ``terminates_at`` is the degree of the polynomial when an upper parameter
    is a non-positive integer (the smallest such), otherwise ``None``.
    """

    upper: tuple
    lower: tuple
    z: object

    @property
    def terminates_at(self) -> int | None:
        degrees = [n for n in map(_nonpositive_int, self.upper) if n is not None]
        return min(degrees) if degrees else None

    @property
    def is_exact(self) -> bool:
        vals = (*self.upper, *self.lower, self.z)
        return self.terminates_at is not None and all(isinstance(v, (int, Fraction)) for v in vals)

    def _check_lower(self, nterms: int | None):
        for b in self.lower:
            m = _nonpositive_int(b)
            if m is not None and (nterms is None or m < nterms):
                raise ZeroDivisionError(f"lower parameter {b} hits a pole of the series")

    def exact(self) -> Fraction:
        n = self.terminates_at
        if not self.is_exact:
            raise TypeError("series is not terminating with rational data")
        self._check_lower(n)
        z = Fraction(self.z)
        upper = [Fraction(a) for a in self.upper]
        lower = [Fraction(b) for b in self.lower]
        term = Fraction(1)
        total = Fraction(1)
        for i in range(n):
            for a in upper:
                term *= a + i
            for b in lower:
                term /= b + i
            term *= z
            term /= i + 1
            total += term
        return total

    def numeric(self, dps: int = 30):
        """High-precision value as an ``mpmath.mpf``."""
        if self.is_exact:
            v = self.exact()
            with mpmath.workdps(dps):
                return mpmath.mpf(v.numerator) / v.denominator
        with mpmath.workdps(dps):
            upper = [_mp(a) for a in self.upper]
            lower = [_mp(b) for b in self.lower]
            z = _mp(self.z)
            n = self.terminates_at
            if n is not None:
                self._check_lower(n)
                return _direct_sum(upper, lower, z, n + 1)
            if abs(z) < 1:
                return _direct_sum(upper, lower, z, None)
            return mpmath.hyper(upper, lower, z)

    def __float__(self) -> float:
        return float(self.numeric())


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _direct_sum(upper, lower, z, nterms):
    """Term-by-term sum; stops after ``nterms`` or on the relative criterion."""
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    quiet = 0
    limit = nterms if nterms is not None else TERM_CAP
    for i in range(limit - 1 if nterms is not None else limit):
        for a in upper:
            term *= a + i
        for b in lower:
            term /= b + i
        term *= z / (i + 1)
        total += term
        if nterms is None:
            if abs(term) < REL_TOL * abs(total):
                quiet += 1
                if quiet >= CONFIRMATIONS:
                    return total
            else:
                quiet = 0
    if nterms is None:
        raise NonConvergence(f"series did not settle within {TERM_CAP} terms")
    return total


def hyper(upper, lower, z):
    """Exact ``Fraction`` when the series terminates on rational data, else ``mpf``."""
    s = HyperSeries(tuple(upper), tuple(lower), z)
    return s.exact() if s.is_exact else s.numeric()


def hyper_regularized(upper, lower, z):
    """``pFq`` divided by the product of ``Gamma(b)`` over lower parameters."""
    value = hyper(upper, lower, z)
    integral = all(_nonpositive_int(1 - Fraction(b)) is not None
                   for b in lower if isinstance(b, (int, Fraction)))
    if isinstance(value, Fraction) and integral and all(isinstance(b, (int, Fraction)) for b in lower):
        scale = Fraction(1)
        for b in lower:
            scale *= gamma_int(b)
        return value / scale
    value = _mp(value)
    g = mpmath.mpf(1)
    for b in lower:
        g *= mpmath.gamma(_mp(b))
    return value / g
