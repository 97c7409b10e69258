"""Batch samplers and plain-numpy reference classifiers for the test suite.

Matrices come from the package's compiled sampler so the tests exercise the
real draws; every verdict about them is recomputed here with numpy's LAPACK
routines and an index-reshuffling partial transpose, independent of the
package's own eigen- and Cholesky kernels.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from seplab import _mc
from seplab.ensembles import MeasureSpec, Pseudo, kernel_params


@njit(cache=True)
def _sample_batch(ip, x, key, start, count, rhos, tallies):
    n = ip[_mc.P_N]
    cols = ip[_mc.P_COLS]
    per = _mc.normals_per_sample(ip)
    buf = np.empty(per)
    a = np.empty((n, cols), dtype=np.complex128)
    u = np.empty((n, n), dtype=np.complex128)
    m = np.empty((n, cols), dtype=np.complex128)
    rho = np.empty((n, n), dtype=np.complex128)
    pt = np.empty((n, n), dtype=np.complex128)
    work = np.empty((n, n), dtype=np.complex128)
    lam = np.empty(n)
    e = np.empty(n)
    for t in range(count):
        _mc.fill_normals_pseudo(key, np.uint64((start + t) * per), buf, per)
        _mc.build_density(buf, ip, x, a, u, m, rho)
        rhos[t] = rho
        _mc.classify_into(rho, ip, pt, work, lam, e, tallies[t], 0)


def sample_batch(spec: MeasureSpec, count: int, seed: int, start: int = 0):
    """``count`` density matrices plus the compiled kernel's per-sample tallies.

    Tally columns are (ppt, det_greater, spectrum) as counted by the runner.
    """
    ip, x = kernel_params(spec)
    n = spec.n
    rhos = np.empty((count, n, n), dtype=np.complex128)
    tallies = np.zeros((count, 3), dtype=np.int64)
    _sample_batch(ip, x, np.uint64(Pseudo(seed).key), start, count, rhos, tallies)
    return rhos, tallies.astype(bool)


def partial_transpose_batch(rhos: np.ndarray, ma: int, mb: int) -> np.ndarray:
    """Transpose on the second factor via a 4-index reshape."""
    c = rhos.shape[0]
    t = rhos.reshape(c, ma, mb, ma, mb)
    return t.transpose(0, 1, 4, 3, 2).reshape(c, ma * mb, ma * mb)


def spectrum_test_batch(lam_desc: np.ndarray) -> np.ndarray:
    """Spectral separability inequality on rows of descending eigenvalues (2m each)."""
    n = lam_desc.shape[1]
    return lam_desc[:, 0] < lam_desc[:, n - 2] + 2 * np.sqrt(
        np.clip(lam_desc[:, n - 3], 0, None) * np.clip(lam_desc[:, n - 1], 0, None))


def reference_verdicts(rhos: np.ndarray, ma: int, mb: int) -> dict[str, np.ndarray]:
    pt = partial_transpose_batch(rhos, ma, mb)
    pt_eigs = np.linalg.eigvalsh(pt)
    lam = np.linalg.eigvalsh(rhos)[:, ::-1]
    det_pt = np.linalg.det(pt).real
    det_rho = np.linalg.det(rhos).real
    return {
        "min_pt": pt_eigs[:, 0],
        "negatives": np.sum(pt_eigs < -1e-10, axis=1),
        "det_pt": det_pt,
        "det_rho": det_rho,
        "spectrum": spectrum_test_batch(lam) if 2 in (ma, mb) else np.zeros(len(rhos), bool),
    }
