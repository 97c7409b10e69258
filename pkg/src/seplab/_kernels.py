"""Compiled scalar and small-matrix primitives.

Everything here is ``numba.njit`` code operating on preallocated buffers so
that the Monte Carlo loops in :mod:`seplab._mc` can call it without
allocating. The public, validated entry points live in :mod:`seplab.matcore`,
:mod:`seplab.qrseq` and :mod:`seplab.ensembles`.
"""

import math

import numpy as np
from numba import njit

_GOLDEN64 = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK32 = np.uint64(0xFFFFFFFF)
_TWO_M53 = 1.0 / 9007199254740992.0
_INV_SQRT2 = 0.70710678118654752440
_INV_SQRT2PI = 0.39894228040143267794
_FAR_TAIL = math.exp(-25.0)


# --------------------------------------------------------------------------
# counter-based uniform generator (SplitMix64 finalizer applied to a counter)


@njit(cache=True)
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def stream_key(seed, stream_id):
    return mix64(mix64(np.uint64(seed)) ^ (np.uint64(stream_id) * _GOLDEN64 + _M2))


@njit(cache=True)
def uniform_at(key, counter):
    """Uniform double in the open interval (0, 1) for position ``counter``."""
    bits = mix64(np.uint64(key) + (np.uint64(counter) + np.uint64(1)) * _GOLDEN64)
    return (float(bits >> np.uint64(11)) + 0.5) * _TWO_M53


# --------------------------------------------------------------------------
# 128-bit fixed point helpers for the additive-recurrence sequence


@njit(cache=True)
def mulhi64(a, b):
    a_lo = a & _MASK32
    a_hi = a >> np.uint64(32)
    b_lo = b & _MASK32
    b_hi = b >> np.uint64(32)
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    hi_hi = a_hi * b_hi
    cross = (lo_lo >> np.uint64(32)) + (hi_lo & _MASK32) + lo_hi
    return hi_hi + (hi_lo >> np.uint64(32)) + (cross >> np.uint64(32))


@njit(cache=True)
def frac_word(n, a_hi, a_lo, off):
    """Top 64 bits of frac(offset + n * alpha) with alpha held in 128 bits."""
    return n * a_hi + mulhi64(n, a_lo) + off


@njit(cache=True)
def word_to_unit(w):
    return float(w >> np.uint64(11)) * _TWO_M53


# --------------------------------------------------------------------------
# inverse normal CDF: Wichura's AS241 (PPND16), relative error below 1e-15,
# with a Newton polish in the far tail


@njit(cache=True)
def _ppnd16(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    x = num / den
    return -x if q < 0.0 else x


@njit(cache=True)
def ndtri(u):
    """Normal quantile for 0 < u < 1; caller guarantees the open interval.

    Below ``exp(-25)`` one Newton step on the lower-tail CDF sharpens the
    result to about an ulp; sampled uniforms never reach that region.
    """
    if u > 0.5:
        return -ndtri(1.0 - u)
    x = _ppnd16(u)
    if u < _FAR_TAIL:
        cdf = 0.5 * math.erfc(-x * _INV_SQRT2)
        pdf = _INV_SQRT2PI * math.exp(-0.5 * x * x)
        if pdf > 0.0:
            x -= (cdf - u) / pdf
    return x


# --------------------------------------------------------------------------
# Hermitian eigenvalues: Householder tridiagonalisation + implicit QL


@njit(cache=True)
def _tridiagonalize(a, n, d, e):
    """Reduce Hermitian ``a`` (overwritten) to real tridiagonal (d, e).

    ``e[i]`` holds |a[i+1, i]| after reduction; phases are discarded because a
    diagonal unitary similarity makes the off-diagonal real and non-negative.
    """
    v = np.empty(n, dtype=np.complex128)
    p = np.empty(n, dtype=np.complex128)
    for k in range(n - 2):
        m = k + 1
        norm2 = 0.0
        for i in range(m, n):
            norm2 += a[i, k].real * a[i, k].real + a[i, k].imag * a[i, k].imag
        if norm2 == 0.0:
            continue
        norm = math.sqrt(norm2)
        x0 = a[m, k]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        alpha = -phase * norm
        for i in range(m, n):
            v[i] = a[i, k]
        v[m] = v[m] - alpha
        vn2 = 0.0
        for i in range(m, n):
            vn2 += v[i].real * v[i].real + v[i].imag * v[i].imag
        if vn2 == 0.0:
            continue
        inv = 1.0 / math.sqrt(vn2)
        for i in range(m, n):
            v[i] *= inv
        # p = A v on the trailing block
        for i in range(m, n):
            s = 0.0j
            for j in range(m, n):
                s += a[i, j] * v[j]
            p[i] = s
        c = 0.0
        for i in range(m, n):
            c += (v[i].conjugate() * p[i]).real
        for i in range(m, n):
            p[i] = p[i] - c * v[i]
        for i in range(m, n):
            for j in range(m, n):
                a[i, j] = a[i, j] - 2.0 * (v[i] * p[j].conjugate() + p[i] * v[j].conjugate())
        a[m, k] = alpha
        a[k, m] = alpha.conjugate()
        for i in range(m + 1, n):
            a[i, k] = 0.0
            a[k, i] = 0.0
    for i in range(n):
        d[i] = a[i, i].real
    for i in range(n - 1):
        e[i] = abs(a[i + 1, i])
    e[n - 1] = 0.0


@njit(cache=True)
def _tql(d, e, n):
    """Implicit-shift QL on a symmetric tridiagonal matrix (eigenvalues only).

    ``e[0:n-1]`` is the sub-diagonal. Returns False if an eigenvalue failed to
    converge within 60 sweeps.
    """
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                return False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return True


@njit(cache=True)
def _sort_desc(d, n):
    for i in range(1, n):
        x = d[i]
        j = i - 1
        while j >= 0 and d[j] < x:
            d[j + 1] = d[j]
            j -= 1
        d[j + 1] = x


@njit(cache=True)
def eigvalsh_into(m, n, work, d, e):
    """Eigenvalues of Hermitian ``m`` (left untouched) into ``d``, descending."""
    for i in range(n):
        for j in range(n):
            work[i, j] = m[i, j]
    if n == 1:
        d[0] = work[0, 0].real
        return True
    _tridiagonalize(work, n, d, e)
    ok = _tql(d, e, n)
    _sort_desc(d, n)
    return ok


@njit(cache=True)
def eigvalsh(m):
    n = m.shape[0]
    work = np.empty((n, n), dtype=np.complex128)
    d = np.empty(n)
    e = np.empty(n)
    ok = eigvalsh_into(m, n, work, d, e)
    return d, ok


# --------------------------------------------------------------------------
# factorisations used by the classifier


@njit(cache=True)
def is_pd_shifted(m, n, shift, work):
    """Cholesky attempt on ``m + shift*I``; True iff every pivot is positive."""
    for i in range(n):
        for j in range(i + 1):
            s = m[i, j]
            if i == j:
                s += shift
            for k in range(j):
                s -= work[i, k] * work[j, k].conjugate()
            if i == j:
                if s.real <= 0.0:
                    return False
                work[i, i] = math.sqrt(s.real)
            else:
                work[i, j] = s / work[j, j].real
    return True


@njit(cache=True)
def det_hermitian(m, n, work):
    """Determinant of Hermitian ``m`` via LDL* with diagonal pivots.

    Falls back to partially pivoted LU (complex) when a pivot vanishes.
    """
    for i in range(n):
        for j in range(n):
            work[i, j] = m[i, j]
    det = 1.0
    for k in range(n):
        piv = work[k, k].real
        if piv == 0.0:
            return det_lu(m, n, work).real
        det *= piv
        inv = 1.0 / piv
        for i in range(k + 1, n):
            f = work[i, k] * inv
            for j in range(k + 1, i + 1):
                work[i, j] -= f * work[j, k].conjugate()
            work[i, i] = work[i, i].real + 0.0j
    return det


@njit(cache=True)
def det_lu(m, n, work):
    for i in range(n):
        for j in range(n):
            work[i, j] = m[i, j]
    det = 1.0 + 0.0j
    for k in range(n):
        piv = k
        best = abs(work[k, k])
        for i in range(k + 1, n):
            if abs(work[i, k]) > best:
                best = abs(work[i, k])
                piv = i
        if best == 0.0:
            return 0.0 + 0.0j
        if piv != k:
            for j in range(n):
                t = work[k, j]
                work[k, j] = work[piv, j]
                work[piv, j] = t
            det = -det
        det *= work[k, k]
        inv = 1.0 / work[k, k]
        for i in range(k + 1, n):
            f = work[i, k] * inv
            if f != 0.0:
                for j in range(k + 1, n):
                    work[i, j] -= f * work[k, j]
    return det


@njit(cache=True)
def partial_transpose_into(rho, ma, mb, out, over_b):
    for i1 in range(ma):
        for j1 in range(mb):
            r = i1 * mb + j1
            for i2 in range(ma):
                for j2 in range(mb):
                    c = i2 * mb + j2
                    if over_b:
                        out[i1 * mb + j2, i2 * mb + j1] = rho[r, c]
                    else:
                        out[i2 * mb + j1, i1 * mb + j2] = rho[r, c]


@njit(cache=True)
def spectrum_separable(lam, m):
    """Eigenvalue-only separability test for 2 x m spectra sorted descending."""
    n = 2 * m
    a = lam[n - 2]
    b = lam[n - 3]
    c = lam[n - 1]
    if b < 0.0:
        b = 0.0
    if c < 0.0:
        c = 0.0
    return lam[0] < a + 2.0 * math.sqrt(b * c)
