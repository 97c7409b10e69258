"""Small dense complex-matrix kernel.

Matrices are plain ``numpy`` complex arrays. :class:`DensityMatrix` wraps one
together with its bipartite dimensions and checks the usual invariants on
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NonConvergence, NonHermitian

HERMITIAN_RTOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10


def as_complex_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def is_hermitian(m, rtol: float = HERMITIAN_RTOL) -> bool:
    a = as_complex_matrix(m)
    scale = np.max(np.abs(a)) if a.size else 0.0
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= rtol * scale)


def _check_hermitian(a: np.ndarray) -> None:
    if not is_hermitian(a):
        dev = np.max(np.abs(a - a.conj().T))
        raise NonHermitian(f"matrix is not Hermitian (max |M - M^H| = {dev:.3e})")


@dataclass(frozen=True)
class DensityMatrix:
    """Unit-trace positive semidefinite matrix on C^{m_A} (x) C^{m_B}."""

    mat: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        a = as_complex_matrix(self.mat)
        ma, mb = self.dims
        if ma * mb != a.shape[0]:
            raise DimensionMismatch(f"dims {self.dims} do not multiply to n={a.shape[0]}")
        _check_hermitian(a)
        tr = np.trace(a)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} differs from 1")
        lam = hermitian_eigenvalues(a)
        if lam[-1] < -POSITIVITY_TOL:
            raise ValueError(f"minimum eigenvalue {lam[-1]:.3e} is negative")
        object.__setattr__(self, "mat", a)
        object.__setattr__(self, "dims", (int(ma), int(mb)))

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def from_unnormalized(cls, m, dims) -> "DensityMatrix":
        a = as_complex_matrix(m)
        a = 0.5 * (a + a.conj().T)
        return cls(a / np.trace(a).real, tuple(dims))


def hermitian_eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, sorted descending.

    Householder reduction to real tridiagonal form followed by implicit-shift
    QL; intended for the n <= 12 matrices used throughout the package.
    """
    a = as_complex_matrix(m)
    _check_hermitian(a)
    d, ok = _kernels.eigvalsh(np.ascontiguousarray(a))
    if not ok:
        raise NonConvergence("QL iteration did not converge")
    return d


def partial_transpose(rho, subsystem: str = "B", dims=None) -> np.ndarray:
    """Partial transpose over subsystem ``"A"`` or ``"B"``.

    ``rho`` is a :class:`DensityMatrix` or a square array accompanied by
    ``dims``. The operation only permutes entries, so applying it twice
    returns the input bit for bit.
    """
    if isinstance(rho, DensityMatrix):
        a = rho.mat
        dims = rho.dims if dims is None else dims
    else:
        a = as_complex_matrix(rho)
    if dims is None:
        raise DimensionMismatch("dims are required for a bare matrix")
    ma, mb = dims
    if ma * mb != a.shape[0]:
        raise DimensionMismatch(f"dims {dims} do not multiply to n={a.shape[0]}")
    t = a.reshape(ma, mb, ma, mb)
    if subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', not {subsystem!r}")
    return np.ascontiguousarray(t.reshape(ma * mb, ma * mb))


def determinant(m) -> complex:
    """LU determinant with partial pivoting."""
    a = np.ascontiguousarray(as_complex_matrix(m))
    n = a.shape[0]
    return complex(_kernels.det_lu(a, n, np.empty_like(a)))


def quaternion_embed(blocks) -> np.ndarray:
    """Complex 2N x 2N image of a quaternionic N x N matrix.

    ``blocks`` holds the real coefficient matrices ``(a, b, c, d)`` of
    ``q = a + b i + c j + d k``. Entry ``q_rs = z1 + z2 j`` (``z1 = a + b i``,
    ``z2 = c + d i``) becomes the 2 x 2 block ``[[z1, z2], [-z2*, z1*]]`` at
    rows/columns ``2r, 2r+1``, so tensor structure of the quaternionic indices
    is kept.
    """
    a, b, c, d = (np.asarray(x, dtype=float) for x in blocks)
    if not (a.shape == b.shape == c.shape == d.shape) or a.ndim != 2:
        raise DimensionMismatch("quaternion blocks must be equal-shaped matrices")
    rows, cols = a.shape
    z1 = a + 1j * b
    z2 = c + 1j * d
    out = np.empty((2 * rows, 2 * cols), dtype=np.complex128)
    out[0::2, 0::2] = z1
    out[0::2, 1::2] = z2
    out[1::2, 0::2] = -z2.conj()
    out[1::2, 1::2] = z1.conj()
    return out
