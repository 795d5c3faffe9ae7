import io
import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st

from toepexp import (
    DenseCapExceeded, DiagonalMismatch, DimensionMismatch, SymbolKind, SymbolSpec,
    ToeplitzMatrix, as_toeplitz, from_columns, from_symbol, one_norm_vec, read_matrix,
    two_norm_vec, write_matrix,
)
from toepexp.toeplitz import embedding_length, fourier_coefficients

from _oracles import dense_toeplitz, rel


def _random(rng, n):
    col = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    row = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    row[0] = col[0]
    return ToeplitzMatrix(col, row)


class TestFromColumns:
    def test_scalar(self):
        T = from_columns([1], [1])
        assert T.n == 1
        assert T.to_dense().tolist() == [[1]]

    def test_identity(self):
        np.testing.assert_array_equal(from_columns([1, 0], [1, 0]).to_dense(), np.eye(2))

    def test_diagonal_mismatch(self):
        with pytest.raises(DiagonalMismatch):
            from_columns([1, 2], [3, 4])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            from_columns([1, 2], [1, 2, 3])

    def test_empty(self):
        with pytest.raises(DimensionMismatch):
            from_columns([], [])

    def test_no_spectrum_until_used(self):
        T = from_columns([2, 1], [2, 3])
        assert not T.has_cached_spectrum
        T.matvec([1, 1])
        assert T.has_cached_spectrum

    def test_data_is_read_only(self):
        T = from_columns([2, 1], [2, 3])
        with pytest.raises(ValueError):
            T.first_col[0] = 5


class TestSymbols:
    def test_theta_squared_a0(self):
        T = from_symbol(SymbolSpec(SymbolKind.THETA_SQUARED), 4)
        assert T.first_col[0].real == pytest.approx(np.pi ** 2 / 3, abs=1e-14)
        assert T.first_col[0].real == pytest.approx(3.289868, abs=1e-6)

    def test_theta_squared_a1_and_general(self):
        T = from_symbol("theta_squared", 20)
        assert T.first_col[1].real == pytest.approx(-2.0, abs=1e-14)
        k = np.arange(1, 20)
        np.testing.assert_allclose(T.first_col[1:].real, 2 * (-1.0) ** k / k ** 2, rtol=1e-14)

    def test_quadrature_matches_closed_form(self):
        n = 64
        a = from_symbol(SymbolSpec("theta_squared"), n)
        q = from_symbol(SymbolSpec("theta_squared", coefficients="quadrature"), n)
        # trapezoid error for a_k is O(k^2/N^2) relative to the 1/k^2 decay
        assert np.max(np.abs(a.first_col - q.first_col)) < 1e-3
        assert abs(a.first_col[0] - q.first_col[0]) < 1e-4

    def test_quadrature_by_direct_integration(self):
        # independent oracle: scipy adaptive quadrature of the defining integral
        from scipy.integrate import quad
        col, row = fourier_coefficients(lambda th: th ** 2 + 1j * th ** 3, 5, 4096)
        for k in range(5):
            for sgn, got in ((1, col[k]), (-1, row[k])):
                re = quad(lambda th: (th ** 2 * np.cos(sgn * k * th)
                                      + th ** 3 * np.sin(sgn * k * th)), -np.pi, np.pi)[0]
                im = quad(lambda th: (th ** 3 * np.cos(sgn * k * th)
                                      - th ** 2 * np.sin(sgn * k * th)), -np.pi, np.pi)[0]
                assert abs(got - (re + 1j * im) / (2 * np.pi)) < 1e-5

    def test_closed_form_complex_symbol_by_integration(self):
        from scipy.integrate import quad
        T = from_symbol("theta_squared_plus_i_theta_cubed", 6)
        for k in range(6):
            for sgn, got in ((1, T.first_col[k]), (-1, T.first_row[k])):
                re = quad(lambda th: (th ** 2 * np.cos(sgn * k * th)
                                      + th ** 3 * np.sin(sgn * k * th)), -np.pi, np.pi)[0]
                assert abs(got - re / (2 * np.pi)) < 1e-12
                assert got.imag == 0

    def test_parter_n2(self):
        T = from_symbol("parter", 2)
        np.testing.assert_allclose(T.first_col, [2, 2 / 3], rtol=1e-15)
        np.testing.assert_allclose(T.first_row, [2, -2], rtol=1e-15)

    def test_parter_n3_dense(self):
        D = from_symbol(SymbolSpec(SymbolKind.PARTER), 3).to_dense()
        expected = [[2, -2, -2 / 3], [2 / 3, 2, -2], [2 / 5, 2 / 3, 2]]
        np.testing.assert_allclose(D, expected, rtol=1e-15)

    def test_theta_squared_is_real_symmetric(self):
        T = from_symbol("theta_squared", 50)
        assert T.is_real
        np.testing.assert_array_equal(T.first_col, T.first_row)

    def test_complex_symbol_structure(self):
        # f = theta^2 + i theta^3: the theta^2 part gives a real symmetric
        # matrix and the i theta^3 part a real antisymmetric one, so the
        # whole matrix is real with a_{-k} = a_k - 2 * odd_k
        T = from_symbol("theta_squared_plus_i_theta_cubed", 40)
        S = from_symbol("theta_squared", 40)
        assert T.is_real
        np.testing.assert_allclose((T.first_col + T.first_row) / 2, S.first_col, atol=1e-14)
        odd = (T.first_col - T.first_row) / 2
        assert odd[0] == 0
        assert np.all(odd[1:] != 0)

    def test_callable_symbol(self):
        T = from_symbol(lambda th: th ** 2, 16)
        S = from_symbol("theta_squared", 16)
        assert np.max(np.abs(T.first_col - S.first_col)) < 1e-2

    def test_quadrature_size_guard(self):
        with pytest.raises(ValueError):
            fourier_coefficients(lambda th: th ** 2, 10, 10)
        with pytest.raises(ValueError):
            SymbolSpec("theta_squared", coefficients="simpson")


class TestMatvec:
    def test_identity(self):
        T = ToeplitzMatrix.identity(4)
        np.testing.assert_allclose(T.matvec([1, 2, 3, 4]), [1, 2, 3, 4], atol=1e-15)

    def test_all_ones(self):
        T = from_columns(np.ones(3), np.ones(3))
        np.testing.assert_allclose(T.matvec(np.ones(3)), [3, 3, 3], atol=1e-14)

    def test_random_64_against_dense(self, rng):
        T = _random(rng, 64)
        v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        D = dense_toeplitz(T.first_col, T.first_row)
        assert rel(T.matvec(v), D @ v) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ToeplitzMatrix.identity(3).matvec([1, 2])

    def test_matmat_and_operator(self, rng):
        T = _random(rng, 10)
        V = rng.standard_normal((10, 3))
        D = dense_toeplitz(T.first_col, T.first_row)
        np.testing.assert_allclose(T.matmat(V), D @ V, atol=1e-12)
        np.testing.assert_allclose(T @ V[:, 0], D @ V[:, 0], atol=1e-12)

    def test_embedding_length(self):
        assert [embedding_length(n) for n in (1, 2, 3, 5, 1024)] == [1, 4, 8, 16, 2048]

    def test_spectrum_is_dft_of_embedding_column(self, rng):
        T = _random(rng, 5)
        L = T.embed_length
        assert L >= 2 * 5 - 1
        c = np.zeros(L, dtype=complex)
        c[:5] = T.first_col
        c[L - 4:] = T.first_row[:0:-1]
        np.testing.assert_allclose(T.embed_spectrum, np.fft.fft(c), atol=1e-13)

    def test_concurrent_first_use(self, rng):
        T = _random(rng, 300)
        v = rng.standard_normal(300)
        D = dense_toeplitz(T.first_col, T.first_row)
        out = [None] * 8

        def work(i):
            out[i] = T.matvec(v)

        threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        for o in out:
            assert rel(o, D @ v) <= 1e-12

    @given(n=st.integers(1, 1024), seed=st.integers(0, 2 ** 32 - 1))
    def test_property_dense_agreement(self, n, seed):
        rng = np.random.default_rng(seed)
        T = _random(rng, n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert rel(T.matvec(v), dense_toeplitz(T.first_col, T.first_row) @ v) <= 1e-12

    @given(n=st.integers(1, 200), seed=st.integers(0, 2 ** 32 - 1),
           a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
           b=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    def test_property_linearity(self, n, seed, a, b):
        rng = np.random.default_rng(seed)
        T = _random(rng, n)
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lhs = T.matvec(a * u + b * v)
        rhs = a * T.matvec(u) + b * T.matvec(v)
        scale = (abs(a) * np.linalg.norm(T.matvec(u)) + abs(b) * np.linalg.norm(T.matvec(v)))
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(scale, 1e-300)


class TestDense:
    def test_scalar(self):
        assert from_columns([5], [5]).to_dense().tolist() == [[5]]

    def test_definition(self):
        np.testing.assert_array_equal(from_columns([1, 2], [1, 3]).to_dense(), [[1, 3], [2, 1]])

    def test_cap(self, monkeypatch):
        monkeypatch.setenv("TOEPEXP_DENSE_CAP", "8")
        with pytest.raises(DenseCapExceeded):
            ToeplitzMatrix.identity(9).to_dense()
        assert ToeplitzMatrix.identity(8).to_dense().shape == (8, 8)

    def test_default_cap(self):
        with pytest.raises(DenseCapExceeded):
            ToeplitzMatrix.identity(4097).to_dense()


class TestNorms:
    def test_identity(self):
        assert ToeplitzMatrix.identity(10).one_norm() == 1

    def test_all_ones(self):
        assert from_columns(np.ones(5), np.ones(5)).one_norm() == 5

    def test_parter_n4(self):
        T = from_symbol("parter", 4)
        assert T.one_norm() == pytest.approx(np.abs(T.to_dense()).sum(axis=0).max(), rel=1e-15)

    @given(n=st.integers(1, 512), seed=st.integers(0, 2 ** 32 - 1))
    def test_property_one_norm_dense(self, n, seed):
        T = _random(np.random.default_rng(seed), n)
        dense = np.abs(dense_toeplitz(T.first_col, T.first_row)).sum(axis=0).max()
        # prefix sums and pairwise column sums round differently
        assert T.one_norm() == pytest.approx(dense, rel=1e-13)

    def test_proxy(self):
        T = from_columns([1, -2, 3], [1, 4, 0])
        assert T.one_norm_proxy() == 6

    def test_vector_norms(self):
        assert two_norm_vec([3, 4]) == 5
        assert one_norm_vec([1, -1, 1]) == 3
        assert two_norm_vec([0, 0]) == 0

    @given(n=st.integers(1, 300), seed=st.integers(0, 2 ** 32 - 1))
    def test_property_norm_equivalence(self, n, seed):
        v = np.random.default_rng(seed).standard_normal(n)
        n2, n1 = two_norm_vec(v), one_norm_vec(v)
        assert n2 <= n1 * (1 + 1e-15)
        assert n1 <= np.sqrt(n) * n2 * (1 + 1e-15)


class TestTextFormat:
    def test_round_trip(self, rng, tmp_path):
        T = _random(rng, 7)
        path = tmp_path / "m.txt"
        write_matrix(T, path)
        S = read_matrix(path)
        np.testing.assert_array_equal(S.first_col, T.first_col)
        np.testing.assert_array_equal(S.first_row, T.first_row)

    def test_layout(self):
        buf = io.StringIO()
        write_matrix(from_columns([1, 2j], [1, 3]), buf)
        assert buf.getvalue().splitlines() == ["2", "1 0", "0 2", "1 0", "3 0"]

    @pytest.mark.parametrize("text", ["", "x\n", "2\n1 0\n", "1\n1\n1 0\n"])
    def test_malformed(self, text):
        with pytest.raises(ValueError):
            read_matrix(io.StringIO(text))


class TestAsToeplitz:
    def test_from_dense(self):
        D = dense_toeplitz([1, 2, 3], [1, 4, 5])
        T = as_toeplitz(D)
        np.testing.assert_array_equal(T.to_dense(), D)

    def test_passthrough_and_pair(self):
        T = ToeplitzMatrix.identity(3)
        assert as_toeplitz(T) is T
        assert as_toeplitz(([1, 0], [1, 0])).n == 2

    def test_rejects_non_toeplitz(self):
        with pytest.raises(ValueError):
            as_toeplitz(np.arange(9.0).reshape(3, 3))
        with pytest.raises(DimensionMismatch):
            as_toeplitz(np.ones((2, 3)))
