import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seplab.errors import DimensionMismatch, NonHermitian
from seplab.matcore import (DensityMatrix, determinant, hermitian_eigenvalues, is_hermitian,
                            partial_transpose, quaternion_embed)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_density(rng, n, dims):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return DensityMatrix.from_unnormalized(a @ a.conj().T, dims)


def bell_projector():
    v = np.zeros(4)
    v[0] = v[3] = 1 / np.sqrt(2)
    return DensityMatrix(np.outer(v, v), (2, 2))


def charpoly_roots(m, dps=40):
    """Eigenvalues as roots of the characteristic polynomial, in extended precision."""
    with mpmath.workdps(dps):
        n = m.shape[0]
        a = mpmath.matrix([[mpmath.mpc(complex(m[i, j])) for j in range(n)] for i in range(n)])
        # Faddeev-LeVerrier
        coeffs = [mpmath.mpf(1)]
        mk = mpmath.zeros(n, n)
        eye = mpmath.eye(n)
        for k in range(1, n + 1):
            mk = a * mk + coeffs[-1] * eye if k > 1 else eye
            ck = -sum((a * mk)[i, i] for i in range(n)) / k
            coeffs.append(ck)
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200)
        return sorted((float(mpmath.re(r)) for r in roots), reverse=True)


class TestEigenvalues:
    def test_maximally_mixed(self):
        assert np.allclose(hermitian_eigenvalues(np.eye(4) / 4), [0.25] * 4, atol=1e-15)

    def test_diagonal_sorted(self):
        lam = hermitian_eigenvalues(np.diag([0.2, 0.5, 0.0, 0.3]))
        assert list(lam) == [0.5, 0.3, 0.2, 0.0]

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitian):
            hermitian_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_six_by_six_against_characteristic_polynomial(self):
        m = random_hermitian(np.random.default_rng(6), 6)
        assert np.allclose(hermitian_eigenvalues(m), charpoly_roots(m), rtol=0, atol=1e-12)

    def test_thousand_random_sizes_4_to_10(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for trial in range(1000):
            n = 4 + trial % 7
            m = random_hermitian(rng, n)
            worst = max(worst, np.max(np.abs(hermitian_eigenvalues(m) - charpoly_roots(m, 30))))
        assert worst < 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2**32 - 1))
    def test_backward_error(self, n, seed):
        m = random_hermitian(np.random.default_rng(seed), n)
        lam = hermitian_eigenvalues(m)
        ref = np.sort(np.linalg.eigvalsh(m))[::-1]
        assert np.max(np.abs(lam - ref)) <= 1e-12 * max(1.0, np.linalg.norm(m, 2)) * n


class TestPartialTranspose:
    def test_bell_state(self):
        lam = hermitian_eigenvalues(partial_transpose(bell_projector()))
        assert lam[-1] == pytest.approx(-0.5, abs=1e-15)

    def test_involution_bit_identical(self):
        rho = random_density(np.random.default_rng(1), 6, (2, 3))
        for side in "AB":
            twice = partial_transpose(partial_transpose(rho, side), side, dims=(2, 3))
            assert np.array_equal(twice, rho.mat)

    def test_product_state_keeps_spectrum(self):
        rng = np.random.default_rng(3)
        ra = random_density(rng, 2, (1, 2)).mat
        rb = random_density(rng, 3, (1, 3)).mat
        rho = DensityMatrix(np.kron(ra, rb), (2, 3))
        assert np.allclose(hermitian_eigenvalues(partial_transpose(rho)),
                           hermitian_eigenvalues(rho.mat), atol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([(2, 2), (2, 3), (3, 2), (2, 4), (3, 3)]), st.integers(0, 2**32 - 1))
    def test_det_same_for_either_side(self, dims, seed):
        rho = random_density(np.random.default_rng(seed), dims[0] * dims[1], dims)
        da = determinant(partial_transpose(rho, "A")).real
        db = determinant(partial_transpose(rho, "B")).real
        assert da == pytest.approx(db, rel=1e-10, abs=1e-300)

    def test_trace_and_hermiticity_preserved(self):
        rho = random_density(np.random.default_rng(4), 8, (2, 4))
        pt = partial_transpose(rho)
        assert is_hermitian(pt)
        assert np.trace(pt) == pytest.approx(1.0, abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            partial_transpose(np.eye(6) / 6, dims=(2, 2))
        with pytest.raises(ValueError):
            partial_transpose(bell_projector(), "C")


class TestDeterminant:
    def test_identity(self):
        assert determinant(np.eye(4) / 4) == pytest.approx(1 / 256, rel=1e-15)

    def test_singular(self):
        assert determinant(np.diag([0.5, 0.5, 0.0, 0.0])) == 0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_eigenvalue_product(self, seed):
        rho = random_density(np.random.default_rng(seed), 6, (2, 3))
        det = determinant(rho.mat)
        assert abs(det.imag) <= 1e-12 * abs(det)
        assert det.real == pytest.approx(np.prod(hermitian_eigenvalues(rho.mat)), rel=1e-10)


class TestDensityMatrix:
    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(4) / 2, (2, 2))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.1, -0.1, 0, 0]), (2, 2))

    def test_rejects_dims(self):
        with pytest.raises(DimensionMismatch):
            DensityMatrix(np.eye(4) / 4, (2, 3))


class TestQuaternionEmbed:
    def test_identity(self):
        n = 3
        z = np.zeros((n, n))
        assert np.array_equal(quaternion_embed((np.eye(n), z, z, z)), np.eye(2 * n))

    def test_pure_j_block(self):
        z = np.zeros((2, 2))
        c = z.copy()
        c[0, 0] = 1.0
        m = quaternion_embed((z, z, c, z))
        block = m[:2, :2]
        assert np.array_equal(block, [[0, 1], [-1, 0]])
        lam = np.linalg.eigvals(block)
        # unit-modulus conjugate pair (the unit quaternion j squares to -1)
        assert np.allclose(sorted(lam, key=lambda v: v.imag), [-1j, 1j])
        assert np.allclose(np.abs(lam), 1.0)

    def test_hermitian_spectrum_is_doubled(self):
        rng = np.random.default_rng(9)
        n = 4
        a = rng.normal(size=(n, n))
        a = (a + a.T) / 2
        b, c, d = (rng.normal(size=(n, n)) for _ in range(3))
        b, c, d = ((x - x.T) / 2 for x in (b, c, d))
        m = quaternion_embed((a, b, c, d))
        lam = hermitian_eigenvalues(m)
        assert np.allclose(lam[0::2], lam[1::2], atol=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            quaternion_embed((np.eye(2), np.eye(3), np.eye(2), np.eye(2)))
