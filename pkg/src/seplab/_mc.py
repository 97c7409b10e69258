"""Fused Monte Carlo kernels.

One call processes a contiguous block of samples from a single stream and
returns integer tallies, so the Python layer only sees a handful of numbers
per block. The matrix construction routines here are also used, one sample
at a time, by :mod:`seplab.ensembles`; both paths therefore produce
bit-identical matrices from identical streams.

Integer parameters travel in one ``int64`` array (see the ``P_*`` indices)
to keep the compiled signatures stable.
"""

import math

import numpy as np
from numba import njit

from . import _kernels as K

# field codes
REAL, COMPLEX, QUATERNION = 0, 1, 2
# source codes
PSEUDO, QUASI = 0, 1

P_SOURCE = 0
P_FIELD = 1
P_N = 2  # complex dimension of rho
P_MA = 3
P_MB = 4
P_COLS = 5  # columns of the Ginibre block (field units)
P_MIX = 6  # 1 if a Haar unitary enters (Bures / interpolated)
P_COUPLED = 7  # 1: tally HS and mixed verdicts from one A
P_XSTATE = 8
P_XK = 9  # det power for induced X-states
P_SPECTRUM = 10  # 1 if the 2 x m spectrum test applies
P_SIZE = 11

# tallies
T_TRIALS = 0
T_PPT = 1
T_DET_GREATER = 2
T_SPECTRUM = 3
T_REJECTED = 4  # quasi points with an endpoint coordinate
T_HS_PPT = 5  # coupled runs: HS verdict from the shared A
T_COUNTER = 6  # X states: stream counter after the block
T_SIZE = 7

PPT_SHIFT = 1e-10


@njit(cache=True)
def normals_per_sample(ip):
    f = ip[P_FIELD]
    n = ip[P_N]
    c = ip[P_COLS]
    if f == REAL:
        cnt = n * c
    elif f == COMPLEX:
        cnt = 2 * n * c
    else:
        cnt = 4 * (n // 2) * c
    if ip[P_MIX] == 1:
        if f == REAL:
            cnt += n * n
        else:
            cnt += 2 * n * n
    return cnt


@njit(cache=True)
def fill_normals_pseudo(key, ctr, buf, count):
    for i in range(count):
        buf[i] = K.ndtri(K.uniform_at(key, ctr + np.uint64(i)))


@njit(cache=True)
def fill_normals_quasi(index, hi, lo, off, buf, count):
    """Coordinates of point ``index`` mapped to normals; False if any is 0."""
    for j in range(count):
        u = K.word_to_unit(K.frac_word(index, hi[j], lo[j], off))
        if u == 0.0:
            return False
        buf[j] = K.ndtri(u)
    return True


@njit(cache=True)
def ginibre_from(buf, start, field, rows, cols, out):
    """Fill ``out`` (complex, rows x cols in complex units) from normals."""
    p = start
    if field == REAL:
        for i in range(rows):
            for j in range(cols):
                out[i, j] = buf[p] + 0.0j
                p += 1
    elif field == COMPLEX:
        for i in range(rows):
            for j in range(cols):
                out[i, j] = buf[p] + 1j * buf[p + 1]
                p += 2
    else:
        rq = rows // 2
        cq = cols // 2
        for i in range(rq):
            for j in range(cq):
                z1 = buf[p] + 1j * buf[p + 1]
                z2 = buf[p + 2] + 1j * buf[p + 3]
                p += 4
                out[2 * i, 2 * j] = z1
                out[2 * i, 2 * j + 1] = z2
                out[2 * i + 1, 2 * j] = -z2.conjugate()
                out[2 * i + 1, 2 * j + 1] = z1.conjugate()
    return p


@njit(cache=True)
def orthonormalize_columns(z, n):
    """Gram-Schmidt (two passes) on the columns of square ``z``, in place.

    The implied R has a positive real diagonal, which is the phase fix that
    turns the QR of a Ginibre matrix into a Haar-distributed unitary.
    """
    for j in range(n):
        for _ in range(2):
            for l in range(j):
                s = 0.0j
                for i in range(n):
                    s += z[i, l].conjugate() * z[i, j]
                for i in range(n):
                    z[i, j] -= s * z[i, l]
        nrm = 0.0
        for i in range(n):
            nrm += z[i, j].real * z[i, j].real + z[i, j].imag * z[i, j].imag
        inv = 1.0 / math.sqrt(nrm)
        for i in range(n):
            z[i, j] *= inv


@njit(cache=True)
def gram_normalized(m, n, cols, rho):
    """``rho = M M^H / tr(M M^H)`` using the first ``cols`` columns of ``m``."""
    tr = 0.0
    for i in range(n):
        for j in range(i + 1):
            s = 0.0j
            for l in range(cols):
                s += m[i, l] * m[j, l].conjugate()
            rho[i, j] = s
            if i == j:
                rho[i, i] = s.real + 0.0j
                tr += s.real
    inv = 1.0 / tr
    for i in range(n):
        for j in range(i + 1):
            v = rho[i, j] * inv
            rho[i, j] = v
            rho[j, i] = v.conjugate()
        rho[i, i] = rho[i, i].real + 0.0j


@njit(cache=True)
def mix_with_unitary(a, u, n, cols, x, out):
    """``out = ((1 - x) I + x U) A``."""
    y = 1.0 - x
    for i in range(n):
        for j in range(cols):
            s = 0.0j
            for l in range(n):
                s += u[i, l] * a[l, j]
            out[i, j] = y * a[i, j] + x * s


@njit(cache=True)
def build_density(buf, ip, x, a, u, m, rho):
    """Matrix for one draw of normals ``buf`` (HS / induced / interpolated)."""
    n = ip[P_N]
    field = ip[P_FIELD]
    cols = ip[P_COLS] if field != QUATERNION else 2 * ip[P_COLS]
    p = ginibre_from(buf, 0, field, n, cols, a)
    if ip[P_MIX] == 1:
        ginibre_from(buf, p, field, n, n, u)
        orthonormalize_columns(u, n)
        mix_with_unitary(a, u, n, cols, x, m)
        gram_normalized(m, n, cols, rho)
    else:
        gram_normalized(a, n, cols, rho)


@njit(cache=True)
def x_state_from(key, ctr, ip, rho):
    """Flat-measure X state; returns the advanced counter.

    Marginalising the flat measure over each anti-diagonal entry leaves a
    Dirichlet law on the diagonal with parameter 2 (complex) or 3/2 (real)
    for each paired index and 1 for an unpaired centre; the entry itself is
    then uniform in the disk (or interval) allowed by positivity.
    """
    n = ip[P_N]
    complex_field = ip[P_FIELD] == COMPLEX
    diag = np.empty(n)
    tot = 0.0
    for i in range(n):
        j = n - 1 - i
        if j == i:
            g = -math.log(K.uniform_at(key, ctr))
            ctr += np.uint64(1)
        elif complex_field:
            g = -math.log(K.uniform_at(key, ctr)) - math.log(K.uniform_at(key, ctr + np.uint64(1)))
            ctr += np.uint64(2)
        else:
            z = K.ndtri(K.uniform_at(key, ctr + np.uint64(1)))
            g = -math.log(K.uniform_at(key, ctr)) + 0.5 * z * z
            ctr += np.uint64(2)
        diag[i] = g
        tot += g
    for i in range(n):
        for j in range(n):
            rho[i, j] = 0.0j
        rho[i, i] = diag[i] / tot + 0.0j
    for i in range(n // 2):
        j = n - 1 - i
        radius = math.sqrt(rho[i, i].real * rho[j, j].real)
        if complex_field:
            r = radius * math.sqrt(K.uniform_at(key, ctr))
            th = 2.0 * math.pi * K.uniform_at(key, ctr + np.uint64(1))
            ctr += np.uint64(2)
            c = r * math.cos(th) + 1j * r * math.sin(th)
        else:
            c = radius * (2.0 * K.uniform_at(key, ctr) - 1.0) + 0.0j
            ctr += np.uint64(1)
        rho[i, j] = c
        rho[j, i] = c.conjugate()
    return ctr


@njit(cache=True)
def x_state_det(rho, n):
    det = 1.0
    for i in range(n // 2):
        j = n - 1 - i
        det *= rho[i, i].real * rho[j, j].real - abs(rho[i, j]) ** 2
    if n % 2:
        det *= rho[n // 2, n // 2].real
    return det


@njit(cache=True)
def classify_into(rho, ip, pt, work, lam, e, tallies, base):
    """Add PPT / det-split / spectrum verdicts for ``rho`` to ``tallies[base:]``.

    Returns True when ``rho`` is PPT.
    """
    n = ip[P_N]
    K.partial_transpose_into(rho, ip[P_MA], ip[P_MB], pt, True)
    if not K.is_pd_shifted(pt, n, PPT_SHIFT, work):
        return False
    tallies[base] += 1
    if K.det_hermitian(pt, n, work) > K.det_hermitian(rho, n, work):
        tallies[base + 1] += 1
    if ip[P_SPECTRUM] == 1:
        ok = K.eigvalsh_into(rho, n, work, lam, e)
        if ok and K.spectrum_separable(lam, n // 2):
            tallies[base + 2] += 1
    return True


@njit(cache=True, nogil=True)
def run_block(ip, x, key, start, count, hi, lo, off):
    """Tally ``count`` samples beginning at sample (pseudo) or point (quasi) ``start``.

    Pseudo streams draw normals from counter ``start * per_sample`` onward;
    quasi streams use one point per sample starting at index ``start``. X
    states consume a variable number of uniforms, so for them ``start`` is
    the raw counter and the final counter is returned in ``T_COUNTER``.
    """
    tallies = np.zeros(T_SIZE, dtype=np.int64)
    n = ip[P_N]
    field = ip[P_FIELD]
    cols = ip[P_COLS] if field != QUATERNION else 2 * ip[P_COLS]
    per = normals_per_sample(ip)
    buf = np.empty(max(per, 1))
    a = np.empty((n, cols), dtype=np.complex128)
    u = np.empty((n, n), dtype=np.complex128)
    m = np.empty((n, cols), dtype=np.complex128)
    rho = np.empty((n, n), dtype=np.complex128)
    rho_hs = np.empty((n, n), dtype=np.complex128)
    pt = np.empty((n, n), dtype=np.complex128)
    work = np.empty((n, n), dtype=np.complex128)
    lam = np.empty(n)
    e = np.empty(n)
    scratch = np.zeros(T_SIZE, dtype=np.int64)

    if ip[P_XSTATE] == 1:
        ctr = np.uint64(start)
        done = 0
        xk = ip[P_XK]
        bound = (1.0 / n) ** n
        while done < count:
            ctr = x_state_from(key, ctr, ip, rho)
            if xk > 0:
                w = (x_state_det(rho, n) / bound) ** xk
                acc = K.uniform_at(key, ctr)
                ctr += np.uint64(1)
                if acc >= w:
                    continue
            tallies[T_TRIALS] += 1
            classify_into(rho, ip, pt, work, lam, e, tallies, T_PPT)
            done += 1
        tallies[T_COUNTER] = np.int64(ctr)
        return tallies

    for s in range(count):
        if ip[P_SOURCE] == QUASI:
            if not fill_normals_quasi(np.uint64(start + s), hi, lo, off, buf, per):
                tallies[T_REJECTED] += 1
                continue
        else:
            fill_normals_pseudo(key, np.uint64(start + s) * np.uint64(per), buf, per)
        build_density(buf, ip, x, a, u, m, rho)
        tallies[T_TRIALS] += 1
        classify_into(rho, ip, pt, work, lam, e, tallies, T_PPT)
        if ip[P_COUPLED] == 1:
            gram_normalized(a, n, cols, rho_hs)
            scratch[0] = 0
            if classify_into(rho_hs, ip, pt, work, lam, e, scratch, 0):
                tallies[T_HS_PPT] += 1
    return tallies
