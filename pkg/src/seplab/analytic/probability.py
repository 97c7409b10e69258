"""Separability probabilities from a separability function.

Three routes are implemented:

* :func:`sep_prob_exact` integrates a polynomial separability function
  exactly: the ``z`` integral is done by a polynomial recursion, leaving a
  rational function of an auxiliary variable ``t`` that is finished with Beta
  integrals.
* :func:`sep_prob_quadrature` evaluates the defining two-dimensional integral
  numerically.
* :func:`t_route_probability` integrates over ``eps`` alone against a
  Gauss hypergeometric kernel.

Closed forms in the Dyson index and induced parameter, the determinantal
split ``Q(k, alpha)`` and the interpolation curve ``u(eta)`` live here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable

import mpmath
import numpy as np

from ..errors import NonConvergence
from . import quadrature
from .chi import ChiPoly, chi_general, half_J_coefficients
from .hyper import HyperSeries, hyper, poch


# --------------------------------------------------------------------------
# exponent rules for the measure kernel


@dataclass(frozen=True)
class Induced:
    """Induced measure; ``k = 0`` is Hilbert-Schmidt. Kernel exponent ``d + k``."""

    k: int = 0

    def exponent(self, d) -> Fraction:
        return Fraction(d) + Fraction(self.k)


@dataclass(frozen=True)
class OpMonotoneSqrt:
    """Measure from the operator monotone function ``sqrt(x)``; exponent ``k - d/4``."""

    k: int = 0

    def exponent(self, d) -> Fraction:
        return Fraction(self.k) - Fraction(d, 4)


def _as_eps_function(chi) -> Callable:
    if isinstance(chi, ChiPoly):
        coeffs = [float(c) for c in chi.coefficients()]
        return lambda eps: np.polynomial.polynomial.polyval(eps * eps, coeffs)
    return chi


def sep_prob_quadrature(chi, d, rule=Induced(0), tol: float = quadrature.TOL) -> float:
    """Numerical separability probability.

    ``chi`` is a :class:`ChiPoly` or a vectorised function of ``eps``; ``rule``
    an :class:`Induced` or :class:`OpMonotoneSqrt` instance, or a bare kernel
    exponent.
    """
    e = rule.exponent(d) if hasattr(rule, "exponent") else rule
    return quadrature.weighted_ratio(_as_eps_function(chi), d, float(e), tol=tol)


# --------------------------------------------------------------------------
# exact route


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _one_minus_pow(n):
    """Ascending coefficients of ``(1 - t)**n``."""
    return [Fraction((-1) ** i * factorial(n), factorial(i) * factorial(n - i)) for i in range(n + 1)]


def _divide_one_minus(poly, times):
    """Exact quotient of ``poly`` by ``(1 - t)**times``; insists on zero remainder."""
    q = list(poly)
    for _ in range(times):
        # poly(t) = (1 - t) * r(t): r_0 = c_0, r_i = c_i + r_{i-1}; remainder is the top
        r = []
        acc = Fraction(0)
        for c in q:
            acc += c
            r.append(acc)
        if r[-1] != 0:
            raise ArithmeticError("polynomial is not divisible by (1 - t)")
        q = r[:-1]
    return q


def _z_integral(beta: list[Fraction], m: int) -> list[Fraction]:
    """``h(t)`` with ``int_0^1 p(z) / (1 - (1-z) t)^m dz = h(t) / (1-t)^(m-n-1)``.

    ``beta`` are the coefficients of ``p`` (degree ``m - 2``) and ``n`` is its
    order of vanishing at ``z = 0``. Works with ``gamma_j`` as polynomials in
    ``u = 1/t``.
    """
    beta = list(beta) + [Fraction(0)] * (m - 1 - len(beta))
    n = next(i for i, b in enumerate(beta) if b != 0)
    gam = [None] * (m - 1)
    gam[m - 2] = [Fraction(0), -beta[m - 2]]
    for j in range(m - 3, -1, -1):
        nxt = gam[j + 1]
        # (j+1)(u - 1) * gamma_{j+1} - beta_j u, over (m - 1 - j)
        cur = [Fraction(0)] * (len(nxt) + 1)
        for i, c in enumerate(nxt):
            cur[i + 1] += (j + 1) * c
            cur[i] -= (j + 1) * c
        cur[1] -= beta[j]
        gam[j] = [c / (m - 1 - j) for c in cur]

    def to_t(poly_u):
        # t^(m-1) * sum c_i u^i = sum c_i t^(m-1-i)
        out = [Fraction(0)] * m
        for i, c in enumerate(poly_u):
            out[m - 1 - i] += c
        return out

    total_u = [Fraction(0)] * (m + 1)
    for g in gam:
        for i, c in enumerate(g):
            total_u[i] += c
    numer = _polymul(to_t(total_u), _one_minus_pow(m - 1))
    g0 = to_t(gam[0])
    for i, c in enumerate(g0):
        numer[i] -= c
    if any(numer[: m - 1]):
        raise ArithmeticError("integrand is not analytic at t = 0")
    numer = numer[m - 1:]
    h = _divide_one_minus(numer, (m - 1) - (m - n - 1))
    while len(h) > 1 and h[-1] == 0:
        h.pop()
    return h


def _hs_terminating_sum(d: int, k: int) -> Fraction:
    """The terminating ``3F2`` at 1 left over from the normalization."""
    return hyper([-d - k, 2 + 3 * d + 2 * k, 1 + d], [2 + 2 * d + k, -2 * d - 2 * k], 1)


def exact_probability(chi_coeffs, a: int, k: int) -> Fraction:
    """Exact probability for a polynomial separability function ``chi(z)``.

    ``chi_coeffs`` are ascending coefficients in ``z``; the polynomial must
    vanish to order at least ``a`` at ``z = 0`` and have degree at most
    ``2a + k`` (every even-``d`` separability function and each of its
    halves qualifies).
    """
    d = 2 * a
    chi = [Fraction(c) for c in chi_coeffs]
    if any(chi[:a]):
        raise ValueError("chi must vanish to order a at z = 0")
    p = _polymul([Fraction(0)] * (d + k) + [Fraction(1)], chi)
    p = _polymul(p, _one_minus_pow(d))
    m = 6 * a + 2 * k + 2
    while len(p) > m - 1 and p[-1] == 0:
        p.pop()
    if len(p) > m - 1:
        raise ValueError("chi has too high a degree for this (a, k)")
    h = _z_integral(p, m)
    big_m = 6 * a + 2 * k + 2
    big_n = 3 * a + k + 1
    beta_sum = sum(b * poch(big_m, i) / poch(big_m + big_n, i) for i, b in enumerate(h))
    t_integral = Fraction(factorial(big_m - 1) * factorial(big_n - 1), factorial(big_m + big_n - 1)) * beta_sum
    prefactor = Fraction(
        factorial(1 + 2 * d + k) * factorial(2 + 5 * d + 4 * k),
        factorial(1 + 3 * d + 2 * k) * factorial(d + k) * factorial(2 * d + 2 * k) * factorial(d),
    )
    return prefactor * t_integral / _hs_terminating_sum(d, k)


def sep_prob_exact(a: int, k: int) -> Fraction:
    """Exact separability probability for Dyson index ``d = 2a`` and induced ``k``."""
    if a < 1 or k < 0:
        raise ValueError("need a >= 1 and k >= 0")
    return exact_probability(chi_general(a, k).coefficients(), a, k)


def det_split_exact(a: int, k: int) -> Fraction:
    """Exact probability carried by the ``det(rho^PT) >= det(rho)`` half."""
    return exact_probability(half_J_coefficients(a, k), a, k)


# --------------------------------------------------------------------------
# closed forms in k


def _gamma_half(twice: int) -> tuple[Fraction, int]:
    """``Gamma(twice / 2)`` as ``(q, r)`` meaning ``q * sqrt(pi)**r``."""
    if twice % 2 == 0:
        n = twice // 2
        if n <= 0:
            raise ZeroDivisionError("Gamma pole")
        return Fraction(factorial(n - 1)), 0
    n = (twice - 1) // 2  # Gamma(n + 1/2)
    if n >= 0:
        return Fraction(factorial(2 * n), 4**n * factorial(n)), 1
    m = -n
    return Fraction((-4) ** m * factorial(m), factorial(2 * m)), 1


def induced_closed_form(field: str, k: int) -> Fraction:
    """Closed-form induced-measure separability probability of two qubits over ``field``.

    ``field`` is ``"R"``, ``"C"`` or ``"H"`` (rebits, qubits, quaterbits).
    Every half-integer Gamma arrives paired with a ``sqrt(pi)``, so the result
    is rational.
    """
    k = int(k)
    if field == "C":
        if k < -2:
            raise ValueError("complex closed form needs k >= -2")
        g1, r1 = _gamma_half(2 * k + 7)
        g2, _ = _gamma_half(2 * (2 * k + 9))
        g3, _ = _gamma_half(2 * (3 * k + 13))
        coef = 3 * Fraction(4) ** (k + 3) * (2 * k * (k + 7) + 25)
        value = 1 - coef * g1 * g2 / g3
    elif field == "R":
        if k < -1:
            raise ValueError("real closed form needs k >= -1")
        g1, _ = _gamma_half(2 * (k + 2))
        g2, r1 = _gamma_half(4 * k + 9)
        g3, _ = _gamma_half(2 * (3 * k + 7))
        value = 1 - Fraction(4) ** (k + 1) * (8 * k + 15) * g1 * g2 / g3
    elif field == "H":
        if k < -3:
            raise ValueError("quaternionic closed form needs k >= -3")
        g1, r1 = _gamma_half(2 * k + 13)
        g2, _ = _gamma_half(2 * (2 * k + 15))
        g3, _ = _gamma_half(2 * (3 * k + 22))
        poly = k * (k * (2 * k * (k + 21) + 355) + 1452) + 2430
        value = 1 - Fraction(4) ** (k + 6) * poly * g1 * g2 / (3 * g3)
    else:
        raise ValueError(f"field must be R, C or H, not {field!r}")
    assert r1 == 1
    return value


# --------------------------------------------------------------------------
# t route


def t_route_normalization(d: int, k: int, rule: str = "induced"):
    """Normalization of the single-variable integral.

    For ``rule="induced"`` the regularized ``3F2`` at 1 is rewritten as a
    terminating sum, so the value is an exact ``Fraction`` for integer ``d``.
    ``rule="sqrtx"`` returns the Gamma-product factor of the ``sqrt(x)``
    measure as a float.
    """
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    if rule == "induced":
        return (
            Fraction(2) ** (5 * d + 4 * k + 2)
            * Fraction(
                factorial(d) * factorial(d + k) * factorial(3 * d + 2 * k + 1) * factorial(2 * d + 2 * k),
                factorial(2 * d + k + 1) * factorial(5 * d + 4 * k + 2),
            )
            * _hs_terminating_sum(d, k)
        )
    if rule == "sqrtx":
        with mpmath.workdps(30):
            q = mpmath.mpf(d) / 4
            val = (
                mpmath.power(4, q + k) * mpmath.gamma(mpmath.mpf(d) / 2 + 0.5)
                * mpmath.gamma(-q + k + 1) ** 2 * mpmath.gamma(q + k + 1)
                / (mpmath.gamma(2 * k + 2) * mpmath.gamma(q + k + mpmath.mpf(3) / 2))
            )
            return float(val)
    raise ValueError(f"unknown rule {rule!r}")


def t_route_normalization_series(d: int, k: int) -> float:
    """The same normalization summed directly as a regularized ``3F2`` at 1."""
    a = 3 * d + 2 * k + 2
    with mpmath.workdps(30):
        f = HyperSeries((a, a, d + 1), (2 * a, 2 * d + k + 2), 1).numeric()
        val = (
            mpmath.mpf(2) ** (5 * d + 4 * k + 2) * mpmath.factorial(d) * mpmath.factorial(d + k)
            * mpmath.gamma(a) ** 2 * f / (mpmath.gamma(2 * a) * mpmath.gamma(2 * d + k + 2))
        )
        return float(val)


def t_route_probability(d: int, k: int, chi) -> float:
    """Probability as a one-dimensional ``eps`` integral.

    ``chi`` is a :class:`ChiPoly` or a scalar function of ``eps`` (for
    example ``lambda e: master_chi(1, e)`` for rebits).
    """
    if isinstance(chi, ChiPoly):
        poly = chi

        def chi_eps(e):
            return mpmath.mpf(float(poly(float(e * e))))
    else:
        def chi_eps(e):
            return mpmath.mpf(chi(float(e)))
    a = 3 * d + 2 * k + 2
    with mpmath.workdps(20):
        ga = mpmath.gamma(a) ** 2 / mpmath.gamma(2 * a)

        def integrand(e):
            if e < mpmath.mpf("1e-12"):
                return mpmath.mpf(0)
            z = e * e
            return (
                (1 - z) ** d * e ** (1 + 2 * d + 2 * k) * ga
                * mpmath.hyp2f1(a, a, 2 * a, 1 - z) * chi_eps(e)
            )

        val = mpmath.quad(integrand, [0, 0.5, 1])
        norm = t_route_normalization(d, k)
        return float(2 * mpmath.mpf(2) ** (5 * d + 4 * k + 2) * val
                     / (mpmath.mpf(norm.numerator) / norm.denominator))


# --------------------------------------------------------------------------
# u(eta) and Q(k, alpha)


def _u_raw(eta):
    pi = mpmath.pi
    num = (
        -3 * eta * (eta + 4) * ((eta - 6) * eta - 15)
        + mpmath.power(16, 2 * eta + 3) * ((eta - 10) * eta - 5)
        * mpmath.gamma(eta + 1.5) * mpmath.gamma(eta + 2.5) ** 3
        / (pi**2 * (2 * eta + 3) * mpmath.gamma(4 * eta + 5))
        + 60
    )
    return -num / (3 * (eta - 1) ** 2 * eta**2)


def u_eta(eta) -> float:
    """Two-qubit separability probability along the one-parameter kernel family.

    ``eta`` is the kernel exponent with ``d = 2``: ``eta = 2`` is
    Hilbert-Schmidt and ``eta = -1/2`` the ``sqrt(x)`` measure. The points
    0 and 1 are removable singularities, evaluated as symmetric limits.
    """
    if eta < -1:
        raise ValueError("u(eta) needs eta >= -1")
    with mpmath.workdps(90):
        e = mpmath.mpf(eta)
        for pole in (0, 1):
            if abs(e - pole) < mpmath.mpf("1e-6"):
                h = mpmath.mpf("1e-20")
                return float((_u_raw(e + h) + _u_raw(e - h)) / 2)
        return float(_u_raw(e))


def q_split(k: int, alpha) -> float:
    """Share of the induced-measure probability with ``det(rho^PT) > det(rho)``.

    ``alpha`` is half the Dyson index (1/2 real, 1 complex, 2 quaternionic).
    The ``6F5`` at unit argument has parameter excess 1/2, so its terms decay
    like ``n**-1.5``; it is summed with convergence acceleration.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    with mpmath.workdps(30):
        a = mpmath.mpf(Fraction(alpha).numerator) / Fraction(alpha).denominator
        kk = mpmath.mpf(k)
        g = mpmath.gamma
        upper = [1, 5 * a / 2 + kk + 1, 5 * a / 2 + kk + 1.5, 2 * a + kk + 1.5,
                 3 * a + kk + 1.5, 5 * a / 2 + kk + mpmath.mpf(19) / 8]
        lower = [a + kk + 2, 4 * a + kk + 2, 5 * a / 2 + kk + mpmath.mpf(7) / 4,
                 5 * a / 2 + kk + mpmath.mpf(9) / 4, 5 * a / 2 + kk + mpmath.mpf(11) / 8]
        try:
            f = mpmath.hyper(upper, lower, 1)
        except mpmath.libmp.NoConvergence as exc:
            raise NonConvergence(str(exc)) from exc
        pre = (
            a * (20 * a + 8 * kk + 11) * g(5 * a + 2 * kk + 2) * g(3 * a + kk + 1.5)
            * g(2 * a + kk + 1.5)
            / (4 * mpmath.sqrt(mpmath.pi) * g(5 * a + 2 * kk + 3.5) * g(a + kk + 2) * g(4 * a + kk + 2))
        )
        return float(mpmath.mpf(1) / 2 - pre * f)


# --------------------------------------------------------------------------
# reference closed forms for the sqrt(x) rule (chi = chi_closed(d, k))

def _pi_form(a, b, pi_power):
    """``a + b * pi**pi_power`` evaluated at 40 digits (the terms cancel heavily)."""
    with mpmath.workdps(40):
        a, b = (Fraction(v) for v in (a, b))
        mp = [mpmath.mpf(v.numerator) / v.denominator for v in (a, b)]
        return float(mp[0] + mp[1] * mpmath.pi**pi_power)


SQRTX_CLOSED_FORMS = {
    (2, 0): ("1 - 256/(27*pi^2)", (1, Fraction(-256, 27), -2)),
    (2, 1): ("4427 - 131072/(3*pi^2)", (4427, Fraction(-131072, 3), -2)),
    (2, 2): ("-1713917/3 + 26642219008/(4725*pi^2)",
             (Fraction(-1713917, 3), Fraction(26642219008, 4725), -2)),
    (4, 1): ("27637/168 - 50*pi^2/3", (Fraction(27637, 168), Fraction(-50, 3), 2)),
}


def sqrtx_closed_form(d: int, k: int) -> tuple[str, float] | None:
    """Known closed form of the sqrt(x)-rule probability, as ``(text, value)``."""
    entry = SQRTX_CLOSED_FORMS.get((d, k))
    return None if entry is None else (entry[0], _pi_form(*entry[1]))
