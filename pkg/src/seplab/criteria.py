"""Separability verdicts for bipartite density matrices.

:func:`classify` is the reference path: a full eigensolve of the partial
transpose plus LU determinants. The Monte Carlo runner uses a cheaper
Cholesky-based test; the test suite checks the two agree sample by sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NonConvergence
from .matcore import (POSITIVITY_TOL, DensityMatrix, determinant, hermitian_eigenvalues,
                      partial_transpose)

# |det| below this is treated as zero when comparing with the PPT flag
DET_AGREEMENT_TOL = 1e-12


@dataclass(frozen=True)
class Verdict:
    ppt: bool
    det_pt_greater: bool
    spectrum_separable: bool
    min_pt_eigenvalue: float
    negative_pt_count: int


def spectrum_separable_2xm(spectrum, m: int) -> bool:
    """Sufficient separability test for a ``2 x m`` state from its spectrum alone.

    ``spectrum`` holds the ``2m`` eigenvalues in descending order; the test is
    ``l[0] < l[2m-2] + 2 sqrt(l[2m-3] l[2m-1])`` (zero-based).
    """
    lam = np.asarray(spectrum, dtype=float)
    if m < 2 or lam.shape != (2 * m,):
        raise DimensionMismatch(f"need 2m = {2 * m} eigenvalues, got shape {lam.shape}")
    if np.any(np.diff(lam) > 0):
        raise ValueError("spectrum must be sorted in descending order")
    return bool(_kernels.spectrum_separable(lam, m))


def classify(rho: DensityMatrix) -> Verdict:
    """PPT status, signed determinant comparison and spectral test for ``rho``.

    The spectral test applies when one factor is a qubit; otherwise it
    reports False. For two qubits the partial transpose has at most one
    negative eigenvalue, so the sign of its determinant must agree with the
    PPT flag; a disagreement beyond rounding raises :class:`NonConvergence`.
    """
    pt = partial_transpose(rho)
    pt_eigs = hermitian_eigenvalues(pt)
    min_eig = float(pt_eigs[-1])
    ppt = min_eig >= -POSITIVITY_TOL
    det_pt = determinant(pt).real
    det_rho = determinant(rho.mat).real

    if rho.n == 4:
        if ppt != (det_pt >= -DET_AGREEMENT_TOL) and abs(det_pt) > DET_AGREEMENT_TOL:
            raise NonConvergence(
                f"PPT flag {ppt} disagrees with det(rho^PT) = {det_pt:.3e}")

    ma, mb = rho.dims
    spectral = False
    if 2 in (ma, mb) and rho.n >= 4:
        spectral = spectrum_separable_2xm(hermitian_eigenvalues(rho.mat), rho.n // 2)

    return Verdict(
        ppt=bool(ppt),
        det_pt_greater=bool(det_pt > det_rho),
        spectrum_separable=bool(spectral),
        min_pt_eigenvalue=min_eig,
        negative_pt_count=int(np.sum(pt_eigs < -POSITIVITY_TOL)),
    )
