"""Separability functions of the singular-value ratio.

For even Dyson index ``d = 2a`` and integer ``k >= 0`` the function is a
polynomial in ``z = eps**2`` of the form ``1 + (1 - z)**(k+1) * p(z)`` with
``deg p = d - 1``; :class:`ChiPoly` stores ``p`` with exact rational
coefficients. Three independent constructions are provided (hand-simplified
closed forms for ``d <= 6``, the general coefficient formula, and the
terminating double sum), so that each can serve as an oracle for the others.
Odd ``d`` only exists numerically, through :func:`master_chi`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import mpmath

from ..errors import DomainError, Unsupported
from .hyper import gamma_int, hyper, hyper_regularized, poch

_DPS = 30


@dataclass(frozen=True)
class ChiPoly:
    """``chi(z) = 1 + (1 - z)**(k+1) * p(z)``, ``p`` given by ascending coefficients."""

    d: int
    k: int
    p: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(Fraction(c) for c in self.p))

    def p_at(self, z):
        acc = 0 * z
        for c in reversed(self.p):
            acc = acc * z + (c if isinstance(z, (int, Fraction)) else float(c))
        return acc

    def __call__(self, z):
        """Value at ``z = eps**2``; exact for rational input."""
        if isinstance(z, (int, Fraction)):
            z = Fraction(z)
            return 1 + (1 - z) ** (self.k + 1) * self.p_at(z)
        return 1.0 + (1.0 - z) ** (self.k + 1) * self.p_at(z)

    def of_eps(self, eps):
        return self(eps * eps)

    def coefficients(self) -> list[Fraction]:
        """Ascending coefficients of the full polynomial ``chi(z)``."""
        base = [Fraction((-1) ** i * _binom(self.k + 1, i)) for i in range(self.k + 2)]
        out = [Fraction(0)] * (len(base) + len(self.p) - 1)
        for i, b in enumerate(base):
            for j, c in enumerate(self.p):
                out[i + j] += b * c
        out[0] += 1
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return out


def _binom(n, r):
    return factorial(n) // (factorial(r) * factorial(n - r))


def _check_dk(d, k):
    if k < 0:
        raise ValueError("k must be >= 0")
    if d % 2:
        raise Unsupported(f"odd d={d} has no polynomial form")


def chi_closed(d: int, k: int) -> ChiPoly:
    """Hand-simplified closed forms for ``d`` in {2, 4, 6}."""
    if d not in (2, 4, 6):
        raise Unsupported(f"closed form only for d in (2, 4, 6), not {d}")
    _check_dk(d, k)
    F = Fraction
    if d == 2:
        p = [F(-1), F(1, k + 3)]
    elif d == 4:
        p = [
            F(-1),
            F(-(k + 1)),
            F(2 * (2 * k * k + 14 * k + 21), (k + 5) * (k + 6)),
            F(-6 * (k + 3), (k + 6) * (k + 7)),
        ]
    else:
        p = [
            F(-1),
            F(-(k + 1)),
            F(-(k + 1) * (k + 2), 2),
            F(3 * (3 * k**4 + 60 * k**3 + 423 * k**2 + 1230 * k + 1264),
              2 * (k + 7) * (k + 8) * (k + 9)),
            F(-6 * (k + 4) * (3 * k * k + 33 * k + 80), (k + 8) * (k + 9) * (k + 10)),
            F(30 * (k + 4) * (k + 5), (k + 9) * (k + 10) * (k + 11)),
        ]
    return ChiPoly(d, k, tuple(p))


def chi_general(a: int, k: int) -> ChiPoly:
    """Exact polynomial for ``d = 2a`` from the general coefficient formula.

    The coefficient of ``z**i`` in ``p`` is ``-(k+1)_i / i!`` for ``i < a``;
    the upper half ``i = a + j`` adds a triple sum over ``(s, u, i)``.
    """
    if a < 1:
        raise ValueError("a must be >= 1")
    _check_dk(2 * a, k)
    p = [-poch(k + 1, i) / factorial(i) for i in range(a)]
    g = gamma_int
    for j in range(a):
        pre = Fraction(
            a * g(2 * a + k + 1) ** 2 * g(2 * a + k + 1 + j),
            g(a) * g(a + k + 1) ** 2 * g(3 * a + k + 1),
        )
        total = Fraction(0)
        for s in range(j + 1):
            outer_s = poch(a + 1, s) / ((a + s) * factorial(s) * poch(a + k + 1, s))
            for u in range(j + 1):
                inner = Fraction(0)
                for i in range(max(0, s + u - j), min(s, u) + 1):
                    inner += (
                        poch(-s, i) * poch(-u, i) * poch(2 * a + k + 1 + j, i)
                        / (factorial(i) * factorial(j - s - u + i) * poch(3 * a + k + 1, i))
                    )
                total += (-1) ** (u + s) * outer_s / ((a + u) * factorial(u)) * inner
        p.append(-poch(k + 1, a + j) / factorial(a + j) + pre * total)
    return ChiPoly(2 * a, k, tuple(p))


def chi_double_sum(d: int, k: int, z) -> Fraction:
    """Exact value at rational ``z`` from the terminating hypergeometric double sum."""
    _check_dk(d, k)
    z = Fraction(z)
    if not 0 <= z <= 1:
        raise ValueError("z must lie in [0, 1]")
    h = d // 2
    scale = Fraction(
        factorial(d + k) ** 2 * factorial(d),
        2 * factorial(h + k) * factorial(h) ** 2 * factorial(3 * h + k),
    )
    total = 2 * hyper([-h - k, h, d], [1 + h, 1 + k + 3 * h], z)
    for j in range(k):
        total += (
            poch(d, k - j) / poch(h + 1, k - j) * (1 - z) ** (k - j)
            * hyper([-h - j, h, d + k - j], [1 + h + k - j, 1 + k + 3 * h], z)
        )
    return scale * z**h * total


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _half(d):
    return Fraction(d, 2)


def master_chi(d: int, eps) -> float:
    """Hilbert-Schmidt (``k = 0``) separability function for any ``d >= 1``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    with mpmath.workdps(_DPS):
        e = _mp(eps)
        if e == 0:
            return 0.0
        h = _half(d)
        f = hyper_regularized([-h, h, d], [h + 1, 3 * h + 1], Fraction(eps) ** 2
                              if isinstance(eps, (int, Fraction)) else e * e)
        val = e**d * mpmath.gamma(d + 1) ** 3 * _mp(f) / mpmath.gamma(_mp(h) + 1) ** 2
        return float(val)


def _z_of(eps):
    if isinstance(eps, (int, Fraction)):
        return Fraction(eps) ** 2
    return mpmath.mpf(eps) ** 2


def half_J(d: int, k: int, eps) -> float:
    """Share of the separability function where ``det(rho^PT) >= det(rho)``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    with mpmath.workdps(_DPS):
        e = _mp(eps)
        if e == 0:
            return 0.0
        h = _half(d)
        f = hyper_regularized([h, d, -h - k], [h + 1, 3 * h + k + 1], _z_of(eps))
        val = (
            factorial(d) * e**d * mpmath.gamma(d + k + 1) ** 2 * _mp(f)
            / (d * mpmath.gamma(_mp(h)) * mpmath.gamma(_mp(h) + k + 1))
        )
        return float(val)


def half_I(d: int, k: int, eps) -> float:
    """Complementary share; ``half_I + half_J`` is the full function."""
    if k < 0:
        raise ValueError("k must be >= 0")
    with mpmath.workdps(_DPS):
        e = _mp(eps)
        if e == 0:
            return 0.0
        h = _half(d)
        hm = _mp(h)
        z = _z_of(eps)
        total = mpmath.mpf(0)
        for j in range(k + 1):
            weight = _mp(poch(d, k - j) / poch(h + 1, k - j))
            total += weight * (1 - _mp(z)) ** (k - j) * _mp(
                hyper([-h - j, h, d + k - j], [1 + h + k - j, 1 + k + 3 * h], z))
        scale = (
            2 * mpmath.gamma(1 + d + k) ** 2 * mpmath.gamma(d)
            / (d * mpmath.gamma(hm) ** 2 * mpmath.gamma(1 + hm + k) * mpmath.gamma(3 * hm + 1 + k))
        )
        return float(scale * e**d * total)


def chi_special(eps) -> float:
    """Closed form for ``d = 2`` at ``k = -5/2``; diverges as ``eps -> 1``."""
    if not 0 <= eps < 1:
        raise DomainError("chi_special needs 0 <= eps < 1")
    z = eps * eps
    return 2.0 * ((z - 0.5) / (1.0 - z) ** 1.5 + 0.5)


def half_J_coefficients(a: int, k: int) -> list[Fraction]:
    """Exact ascending ``z``-coefficients of :func:`half_J` for ``d = 2a``.

    For even ``d`` the hypergeometric factor terminates, so this half is a
    polynomial in ``z`` starting at ``z**a``.
    """
    if a < 1 or k < 0:
        raise ValueError("need a >= 1 and k >= 0")
    d = 2 * a
    scale = Fraction(
        factorial(d) * factorial(d + k) ** 2,
        d * factorial(a - 1) * factorial(a + k) * factorial(a) * factorial(3 * a + k),
    )
    coeffs = [Fraction(0)] * a
    for n in range(a + k + 1):
        term = (poch(a, n) * poch(d, n) * poch(-a - k, n)
                / (poch(a + 1, n) * poch(3 * a + k + 1, n) * factorial(n)))
        coeffs.append(scale * term)
    return coeffs
