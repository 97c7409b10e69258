"""Exact volumes of state spaces, induced-measure multipliers and the
registry of known or conjectured separability probabilities.

Values have the form ``q * sqrt(r) * pi**e`` with ``q`` rational, ``r`` a
squarefree integer and ``e`` an integer or half-integer; see
:class:`PiRational`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer by trial division."""
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    step = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _squarefree_split(n: int) -> tuple[int, int]:
    """``n = a**2 * b`` with ``b`` squarefree; returns ``(a, b)``."""
    a, b = 1, 1
    for p, e in factorize(n).items():
        a *= p ** (e // 2)
        if e % 2:
            b *= p
    return a, b


@dataclass(frozen=True)
class PiRational:
    """Exact ``coeff * sqrt(surd) * pi**pi_power``.

    ``surd`` is a squarefree positive integer; ``pi_power`` an integer or a
    half-integer (half powers of pi come from Gamma at half-integers).
    """

    coeff: Fraction
    pi_power: Fraction = Fraction(0)
    surd: int = 1

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "pi_power", Fraction(self.pi_power))
        if self.pi_power.denominator not in (1, 2):
            raise ValueError("pi power must be an integer or half-integer")
        a, b = _squarefree_split(int(self.surd))
        object.__setattr__(self, "coeff", self.coeff * a)
        object.__setattr__(self, "surd", b)
        if self.coeff == 0:
            object.__setattr__(self, "surd", 1)
            object.__setattr__(self, "pi_power", Fraction(0))

    @classmethod
    def sqrt(cls, n) -> "PiRational":
        n = Fraction(n)
        # sqrt(p/q) = sqrt(p q) / q
        return cls(Fraction(1, n.denominator), 0, n.numerator * n.denominator)

    @classmethod
    def pi(cls, power=1) -> "PiRational":
        return cls(Fraction(1), Fraction(power))

    @property
    def factorization(self) -> dict[int, int]:
        """Prime exponents of ``coeff``; negative exponents belong to the denominator."""
        if self.coeff == 0:
            return {}
        out = dict(factorize(abs(self.coeff.numerator)))
        for p, e in factorize(self.coeff.denominator).items():
            out[p] = out.get(p, 0) - e
        return dict(sorted(out.items()))

    def __mul__(self, other):
        if not isinstance(other, PiRational):
            other = PiRational(Fraction(other))
        g = math.gcd(self.surd, other.surd)
        surd = (self.surd // g) * (other.surd // g)
        return PiRational(self.coeff * other.coeff * g, self.pi_power + other.pi_power, surd)

    __rmul__ = __mul__

    def inverse(self) -> "PiRational":
        return PiRational(1 / (self.coeff * self.surd), -self.pi_power, self.surd)

    def __truediv__(self, other):
        if not isinstance(other, PiRational):
            other = PiRational(Fraction(other))
        return self * other.inverse()

    def __rtruediv__(self, other):
        return PiRational(Fraction(other)) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = PiRational(Fraction(1))
        for _ in range(n):
            out = out * self
        return out

    def __float__(self) -> float:
        # log-space keeps huge factorial ratios inside double range
        if self.coeff == 0:
            return 0.0
        lg = (math.log(abs(self.coeff.numerator)) - math.log(self.coeff.denominator)
              + 0.5 * math.log(self.surd) + float(self.pi_power) * math.log(math.pi))
        return math.copysign(math.exp(lg), self.coeff)

    def is_rational(self) -> bool:
        return self.surd == 1 and self.pi_power == 0

    def __str__(self) -> str:
        def fmt(fac: dict[int, int]) -> str:
            return "*".join(f"{p}^{e}" if e != 1 else f"{p}" for p, e in fac.items())

        f = self.factorization
        num = {p: e for p, e in f.items() if e > 0}
        den = {p: -e for p, e in f.items() if e < 0}
        top = [fmt(num)] if num else []
        if self.surd != 1:
            top.append(f"sqrt({self.surd})")
        if self.pi_power > 0:
            top.append(f"pi^{self.pi_power}" if self.pi_power != 1 else "pi")
        bottom = [fmt(den)] if den else []
        if self.pi_power < 0:
            bottom.append(f"pi^{-self.pi_power}")
        sign = "-" if self.coeff < 0 else ""
        s = sign + ("*".join(top) if top else "1")
        if bottom:
            s += "/(" + "*".join(bottom) + ")"
        return s


def gamma_exact(x) -> PiRational:
    """Gamma at a positive integer or half-integer."""
    x = Fraction(x)
    if x.denominator == 1:
        if x <= 0:
            raise ZeroDivisionError("Gamma pole")
        return PiRational(factorial(int(x) - 1))
    if x.denominator != 2:
        raise ValueError("only integer and half-integer arguments are exact")
    n = int(x - Fraction(1, 2))
    if n >= 0:
        return PiRational(Fraction(factorial(2 * n), 4**n * factorial(n)), Fraction(1, 2))
    m = -n
    return PiRational(Fraction((-4) ** m * factorial(m), factorial(2 * m)), Fraction(1, 2))


def _prod(values) -> PiRational:
    out = PiRational(1)
    for v in values:
        out = out * v
    return out


# --------------------------------------------------------------------------
# volumes


def vol_hs_complex(N: int) -> PiRational:
    """Hilbert-Schmidt volume of complex N x N density matrices."""
    _check_n(N)
    return (PiRational.sqrt(N) * PiRational(2) ** (N * (N - 1) // 2)
            * PiRational.pi(Fraction(N * (N - 1), 2))
            * _prod(gamma_exact(i) for i in range(1, N + 1)) / gamma_exact(N * N))


def vol_hs_real(N: int) -> PiRational:
    """Hilbert-Schmidt volume of real N x N density matrices."""
    _check_n(N)
    two_pi = Fraction(N * (N - 1), 4)
    return (PiRational.sqrt(N) * PiRational(2) ** N
            * PiRational(Fraction(2) ** int(two_pi), 0, 2 if two_pi.denominator == 2 else 1)
            * PiRational.pi(two_pi)
            * gamma_exact(Fraction(N + 1, 2))
            * _prod(gamma_exact(1 + Fraction(i, 2)) for i in range(1, N + 1))
            / (gamma_exact(N * (N + 1) // 2) * gamma_exact(Fraction(1, 2))))


def vol_lebesgue_complex(N: int) -> PiRational:
    """Lebesgue volume of complex N x N density matrices."""
    _check_n(N)
    num = 1
    for i in range(1, N):
        num *= factorial(i)
    return PiRational(Fraction(num, factorial(N * N - 1)), N * (N - 1) // 2)


def vol_lebesgue_real(l: int) -> PiRational:
    """Lebesgue volume of real ``2l x 2l`` density matrices."""
    if l < 1:
        raise ValueError("l must be >= 1")
    num = factorial(2 * l)
    for i in range(1, l):
        num *= factorial(2 * i)
    q = Fraction(num, 2 ** (l * l + l) * factorial(l) * factorial(2 * l * l + l - 1))
    return PiRational(q, l * l)


def vol_lebesgue_quaternionic(N: int) -> PiRational:
    """Lebesgue volume of quaternionic N x N density matrices."""
    _check_n(N)
    num = factorial(2 * N - 2)
    for i in range(1, N - 1):
        num *= factorial(2 * i)
    return PiRational(Fraction(num, factorial(2 * N * N - N - 1)), N * N - N)


def _check_n(N):
    if N < 2:
        raise ValueError("N must be >= 2")


def lebesgue_volume(field: str, N: int) -> PiRational:
    """Lebesgue volume by field letter; real needs even ``N``."""
    if field == "C":
        return vol_lebesgue_complex(N)
    if field == "H":
        return vol_lebesgue_quaternionic(N)
    if field == "R":
        if N % 2:
            raise ValueError("real Lebesgue volume is tabulated for even N only")
        return vol_lebesgue_real(N // 2)
    raise ValueError(f"unknown field {field!r}")


# --------------------------------------------------------------------------
# induced multipliers

_MULTIPLIER_CONSTANT = {4: 217945728000, 6: 86109566386551207747222094479360000000}


def _poch_int(a: int, n: int) -> int:
    out = 1
    for i in range(n):
        out *= a + i
    return out


def induced_multiplier(N: int, k: int) -> Fraction:
    """Factor converting the Hilbert-Schmidt volume element to the induced-``k`` one."""
    if N not in _MULTIPLIER_CONSTANT:
        from .errors import Unsupported

        raise Unsupported(f"multiplier tabulated for N in (4, 6), not {N}")
    if k < 0:
        raise ValueError("k must be >= 0")
    num = _MULTIPLIER_CONSTANT[N] * factorial(k + N - 1)
    for i in range(1, N):
        num *= _poch_int(i, k)
    return Fraction(num, factorial(N * (k + N) - 1))


def induced_multiplier_gamma(N: int, k: int) -> Fraction:
    """The same factor built from ``Gamma(N^2) / Gamma(N)`` for any ``N``."""
    num = factorial(N * N - 1) * factorial(k + N - 1)
    for i in range(1, N):
        num *= _poch_int(i, k)
    return Fraction(num, factorial(N - 1) * factorial(N * (k + N) - 1))


# --------------------------------------------------------------------------
# qubit-qudit volume as a function of the qubit Bloch radius


def milz_strunz_volume(m: int) -> Callable[[Fraction], PiRational]:
    """``r -> V(0) (1 - r^2)^(2(m^2-1))`` for ``2 x m`` states at qubit Bloch radius ``r``."""
    if m < 2:
        raise ValueError("m must be >= 2")
    base = (PiRational.sqrt(m) * PiRational(Fraction(2) ** (6 * m * m - m - 12), 0, 2)
            * PiRational.pi(Fraction(2 * m * m - m) - Fraction(3, 2))
            * _prod(gamma_exact(k) for k in range(1, 2 * m + 1))
            * gamma_exact(Fraction(1, 2) + 2 * m * m)
            / (gamma_exact(4 * m * m) * gamma_exact(2 * m * m - 1)))

    def volume(r) -> PiRational:
        r = Fraction(r)
        if not 0 <= r <= 1:
            raise ValueError("r must lie in [0, 1]")
        return base * (1 - r * r) ** (2 * (m * m - 1))

    return volume


def milz_strunz_ball_integral(m: int) -> PiRational:
    """``4 pi * int_0^1 r^2 V(r) dr``, the total volume implied by the radial profile."""
    n = 2 * (m * m - 1)
    # int_0^1 r^2 (1 - r^2)^n dr = B(3/2, n + 1) / 2
    beta = gamma_exact(Fraction(3, 2)) * gamma_exact(n + 1) / gamma_exact(Fraction(5, 2) + n)
    return milz_strunz_volume(m)(0) * PiRational(2) * PiRational.pi() * beta


# --------------------------------------------------------------------------
# registry

PROVEN = "proven"
STRONG = "strongly-supported"
CONJECTURED = "conjectured-here"


@dataclass(frozen=True)
class ConjectureRecord:
    system: tuple[str, int, int]
    measure: tuple[str, int]
    value: object  # Fraction or PiRational
    status: str
    source: str = field(default="")

    def __post_init__(self):
        v = float(self.value)
        if not 0 <= v <= 1:
            raise ValueError(f"probability {self.value} outside [0, 1]")

    def value_str(self) -> str:
        v = self.value
        if isinstance(v, PiRational):
            s = f"{v.coeff.numerator}/{v.coeff.denominator}"
            if v.pi_power:
                s += f"*pi^{v.pi_power}"
            return s
        v = Fraction(v)
        return f"{v.numerator}/{v.denominator}"

    def to_json(self) -> dict:
        return {
            "system": list(self.system),
            "measure": list(self.measure),
            "value": self.value_str(),
            "status": self.status,
            "source": self.source,
        }


_F = Fraction
_X_REBIT = PiRational(Fraction(16, 3), -2)
_REGISTRY = (
    ConjectureRecord(("C", 2, 2), ("HS", 0), _F(8, 33), STRONG, "exact integration, confirmed by Monte Carlo"),
    ConjectureRecord(("R", 2, 2), ("HS", 0), _F(29, 64), PROVEN, "formally derived"),
    ConjectureRecord(("H", 2, 2), ("HS", 0), _F(26, 323), STRONG, "exact integration"),
    ConjectureRecord(("C", 2, 3), ("HS", 0), _F(27, 1000), CONJECTURED, "rational fit to 2.9e9 samples"),
    ConjectureRecord(("R", 2, 3), ("HS", 0), _F(860, 6561), CONJECTURED, "rational fit to 3.53e9 samples"),
    ConjectureRecord(("C", 2, 4), ("HS", 0), _F(16, 12375), CONJECTURED, "rational fit, Monte Carlo"),
    ConjectureRecord(("R", 2, 4), ("HS", 0), _F(201, 8192), CONJECTURED, "rational fit, Monte Carlo"),
    ConjectureRecord(("C", 2, 5), ("HS", 0), _F(125, 4790016), CONJECTURED, "rational fit, Monte Carlo"),
    ConjectureRecord(("R", 2, 5), ("HS", 0), _F(29058, 9765625), CONJECTURED, "rational fit, Monte Carlo"),
    ConjectureRecord(("C", 3, 3), ("HS", 0), _F(323, 3161088), CONJECTURED, "rational fit, Monte Carlo"),
    ConjectureRecord(("C", 2, 2), ("X-HS", 0), _F(2, 5), PROVEN, "X-state integration"),
    ConjectureRecord(("R", 2, 2), ("X-HS", 0), _X_REBIT, PROVEN, "X-state integration"),
    ConjectureRecord(("R", 2, 3), ("X-HS", 0), _X_REBIT, PROVEN, "X-state integration"),
    ConjectureRecord(("R", 3, 3), ("X-HS", 0), _X_REBIT, PROVEN, "X-state integration"),
)


def registry() -> tuple[ConjectureRecord, ...]:
    return _REGISTRY


def lookup(field: str, m_a: int, m_b: int, family: str = "HS", k: int = 0) -> ConjectureRecord | None:
    for rec in _REGISTRY:
        if rec.system == (field, m_a, m_b) and rec.measure == (family, k):
            return rec
    return None


def registry_json(indent: int | None = 2) -> str:
    return json.dumps([r.to_json() for r in _REGISTRY], indent=indent)


def separable_volume(system: tuple[str, int, int], conjecture: ConjectureRecord) -> PiRational:
    """Lebesgue volume of the separable states implied by a registry probability."""
    if conjecture.system != tuple(system):
        raise ValueError(f"record is for {conjecture.system}, not {system}")
    field_, m_a, m_b = system
    total = lebesgue_volume(field_, m_a * m_b)
    return total * conjecture.value

