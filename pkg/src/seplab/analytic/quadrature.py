"""Tensor Gauss-Legendre evaluation of the two-dimensional probability integral.

The integral runs over ``-1 <= y <= x <= 1`` with weight
``(1-x^2)^e (1-y^2)^e (x-y)^d`` and the separability function evaluated at
``eps = sqrt((1-x)(1+y) / ((1+x)(1-y)))``. Two changes of variable make the
integrand smooth enough for a plain product rule:

* ``x = -cos(theta)``, ``y = -cos(phi)`` absorbs the ``(1-x^2)^e`` endpoint
  behaviour, which is singular for negative ``e``; in these angles
  ``eps = tan(phi/2) / tan(theta/2)``.
* ``phi = theta * (1 - s^2)`` maps the triangle to a square and squares away
  the half-integer powers of ``theta - phi`` that appear when the separability
  function has a pole at ``eps = 1``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from ..errors import NonConvergence

TOL = 1e-10
MIN_ORDER = 16
MAX_ORDER = 2048


@lru_cache(maxsize=None)
def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _grid(n: int):
    x, w = _gauss(n)
    theta = 0.5 * np.pi * (x + 1.0)
    w_theta = 0.5 * np.pi * w
    s = 0.5 * (x + 1.0)
    w_s = 0.5 * w
    th, ss = np.meshgrid(theta, s, indexing="ij")
    t = 1.0 - ss * ss
    ph = th * t
    # d(phi) = theta * 2 s ds
    jac = np.outer(w_theta, w_s) * th * 2.0 * ss
    return th, ph, jac


def _weight(th, ph, d, e):
    x = -np.cos(th)
    y = -np.cos(ph)
    # x - y written without cancellation
    diff = 2.0 * np.sin(0.5 * (th + ph)) * np.sin(0.5 * (th - ph))
    return np.sin(th) ** (2 * e + 1) * np.sin(ph) ** (2 * e + 1) * diff**d, x, y


def _eps(th, ph):
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = np.tan(0.5 * ph) / np.tan(0.5 * th)
    return np.clip(np.nan_to_num(eps, nan=0.0), 0.0, 1.0)


def _rule(fn: Callable, n: int, d, e):
    th, ph, jac = _grid(n)
    w, _, _ = _weight(th, ph, d, e)
    eps = _eps(th, ph)
    chi = np.asarray(fn(eps), dtype=float)
    return float(np.sum(jac * w * chi)), float(np.sum(jac * w))


def weighted_ratio(chi_of_eps: Callable, d, e, tol: float = TOL) -> float:
    """Ratio of the weighted integral of ``chi(eps)`` to the bare weight integral.

    ``chi_of_eps`` must accept a numpy array of ``eps`` values. The rule order
    doubles from 16 until successive ratios agree to ``tol``.
    """
    prev = None
    n = MIN_ORDER
    while n <= MAX_ORDER:
        num, den = _rule(chi_of_eps, n, d, e)
        val = num / den
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    raise NonConvergence(f"quadrature did not settle by order {MAX_ORDER}")


def weight_integral(d, e, tol: float = TOL) -> float:
    """The bare double integral of ``(1-x^2)^e (1-y^2)^e (x-y)^d`` over the triangle."""
    prev = None
    n = MIN_ORDER
    while n <= MAX_ORDER:
        th, ph, jac = _grid(n)
        w, _, _ = _weight(th, ph, d, e)
        val = float(np.sum(jac * w))
        if prev is not None and abs(val - prev) < tol * abs(val):
            return val
        prev = val
        n *= 2
    raise NonConvergence(f"quadrature did not settle by order {MAX_ORDER}")
