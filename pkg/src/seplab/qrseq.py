"""Additive-recurrence (Korobov) quasirandom points driven by powers of
the generalized golden ratio, plus the inverse-normal transform.

Point ``n`` in dimension ``s`` is ``frac(alpha0 + n * alpha)`` with
``alpha_j = phi_s ** -j`` and ``phi_s`` the real root above 1 of
``x**(s+1) = x + 1``. The increments are stored as 128-bit fixed-point
fractions, so evaluating any index costs one wide multiply per coordinate,
and the result is exact to 2**-53 however large ``n`` gets.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from numba import njit

from . import _kernels
from .errors import DomainError

_TWO64 = 1 << 64


@lru_cache(maxsize=None)
def _phi_mp(s: int, dps: int = 80):
    with mpmath.workdps(dps):
        x = mpmath.mpf(2)
        for _ in range(400):
            f = x ** (s + 1) - x - 1
            step = f / ((s + 1) * x**s - 1)
            x -= step
            if abs(step) < mpmath.mpf(10) ** (-dps + 5):
                break
        return +x


def solve_phi(s: int) -> float:
    """Real root greater than 1 of ``x**(s+1) - x - 1``.

    Newton's method from ``x0 = 2`` carried out in extended precision and
    rounded once, so the result is the double nearest the true root.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    return float(_phi_mp(int(s)))


@lru_cache(maxsize=None)
def _alpha_words(s: int) -> tuple[np.ndarray, np.ndarray]:
    phi = _phi_mp(s)
    hi = np.empty(s, dtype=np.uint64)
    lo = np.empty(s, dtype=np.uint64)
    with mpmath.workdps(80):
        for j in range(s):
            w = int(mpmath.floor(phi ** -(j + 1) * mpmath.mpf(2) ** 128))
            hi[j] = w >> 64
            lo[j] = w & (_TWO64 - 1)
    hi.setflags(write=False)
    lo.setflags(write=False)
    return hi, lo


def _offset_word(alpha0) -> int:
    a = Fraction(alpha0)
    if not 0 <= a < 1:
        raise ValueError("alpha0 must lie in [0, 1)")
    return int(a * _TWO64)


@dataclass
class QrState:
    """Position in the s-dimensional sequence; ``n`` is the next index."""

    s: int
    alpha0: float = 0.5
    n: int = 0
    phi_s: float = field(init=False)
    alpha: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if not 0 <= self.n < 2**63:
            raise ValueError("index must lie in [0, 2**63)")
        self.phi_s = solve_phi(self.s)
        hi, lo = _alpha_words(self.s)
        self.alpha = np.array([(int(h) * _TWO64 + int(l)) / 2.0**128 for h, l in zip(hi, lo)])
        self._off = np.uint64(_offset_word(self.alpha0))

    @property
    def words(self) -> tuple[np.ndarray, np.ndarray, np.uint64]:
        """(high words, low words, offset word) for the compiled samplers."""
        hi, lo = _alpha_words(self.s)
        return hi, lo, self._off

    def next_point(self) -> np.ndarray:
        return next_point(self)

    def points(self, count: int) -> np.ndarray:
        """The next ``count`` points as a ``(count, s)`` array; advances ``n``."""
        if self.n + count > 2**63:
            raise ValueError("index overflow")
        hi, lo, off = self.words
        out = np.empty((int(count), self.s))
        _fill_points(np.uint64(self.n), hi, lo, off, out)
        self.n += int(count)
        return out


def next_point(state: QrState) -> np.ndarray:
    """Emit point ``state.n`` and advance the index."""
    return state.points(1)[0]


def skip_to(state: QrState, n0: int) -> QrState:
    """Copy of ``state`` whose next emission is index ``n0``."""
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    return replace(state, n=int(n0))


@njit(cache=True)
def _fill_points(n0, hi, lo, off, out):
    count, s = out.shape
    for i in range(count):
        n = n0 + np.uint64(i)
        for j in range(s):
            out[i, j] = _kernels.word_to_unit(_kernels.frac_word(n, hi[j], lo[j], off))


@njit(cache=True)
def _ndtri_array(u, out):
    for i in range(u.size):
        out[i] = _kernels.ndtri(u[i])


def to_normal(u):
    """Standard normal quantile of ``u`` (scalar or array) in the open unit interval.

    Endpoints raise :class:`DomainError` rather than being clamped, since a
    clamp would silently put mass at a finite tail value.
    """
    arr = np.asarray(u, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("normal quantile needs 0 < u < 1")
    if arr.ndim == 0:
        return float(_kernels.ndtri(float(arr)))
    flat = np.ascontiguousarray(arr).ravel()
    out = np.empty_like(flat)
    _ndtri_array(flat, out)
    return out.reshape(arr.shape)
