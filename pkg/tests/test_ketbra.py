"""Unit and property tests for the ket-bra operator algebra."""

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from lindblad_bounds.dense_oracle import string_to_dense, sum_to_dense
from lindblad_bounds.errors import WindowTooLarge
from lindblad_bounds.ketbra import (KetBraString, OperatorSum, SiteOperator,
                                    act_left, act_right, bits_to_index,
                                    dagger, embed_functional, embed_sum,
                                    identity_sum, index_to_bits, is_hermitian,
                                    shift, site_matrix)

OPS = list(SiteOperator)


def bits(k):
    return st.tuples(*[st.sampled_from((0, 1))] * k)


@st.composite
def ketbra_strings(draw, max_len=3, max_offset=2):
    k = draw(st.integers(1, max_len))
    offset = draw(st.integers(1, max_offset))
    return KetBraString(offset, draw(bits(k)), draw(bits(k)))


coeffs = st.complex_numbers(min_magnitude=0.1, max_magnitude=10,
                            allow_nan=False, allow_infinity=False)


@st.composite
def operator_sums(draw, max_terms=3):
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        terms[draw(ketbra_strings())] = draw(coeffs)
    return OperatorSum(terms)


class TestIndexing:
    @given(st.integers(1, 6).flatmap(lambda k: st.tuples(st.just(k), bits(k))))
    def test_bits_index_roundtrip(self, k_and_bits):
        k, b = k_and_bits
        assert index_to_bits(bits_to_index(b), k) == b

    def test_active_bit_is_most_significant_zero(self):
        # all-active word maps to index 0, all-inactive to 2^k - 1
        assert bits_to_index((1, 1, 1)) == 0
        assert bits_to_index((0, 0, 0)) == 7
        assert bits_to_index((1, 0)) == 1
        assert bits_to_index((0, 1)) == 2


class TestSiteMatrices:
    def test_active_state_is_first_basis_vector(self):
        n = site_matrix(SiteOperator.n)
        assert n[0, 0] == 1 and n[1, 1] == 0

    def test_ladder_operators_adjoint(self):
        sp = site_matrix(SiteOperator.Sp)
        sm = site_matrix(SiteOperator.Sm)
        assert np.allclose(sp.conj().T, sm)


class TestAlgebra:
    @given(operator_sums())
    def test_dagger_involution(self, s):
        assert dagger(dagger(s)).isclose(s)

    @given(operator_sums(), coeffs)
    def test_dagger_antilinear(self, s, c):
        assert dagger(s * c).isclose(dagger(s) * np.conj(c))

    @given(operator_sums(max_terms=2), operator_sums(max_terms=2),
           st.sampled_from(OPS), st.integers(1, 4))
    def test_act_left_linear(self, a, b, op, site):
        lhs = act_left(op, site, a + b)
        rhs = act_left(op, site, a) + act_left(op, site, b)
        assert lhs.isclose(rhs)

    @given(operator_sums(max_terms=2), st.sampled_from(OPS),
           st.integers(1, 4))
    def test_act_right_linear_and_matches_dense(self, s, op, site):
        n_sites = 5
        dense = sum_to_dense(s, n_sites)
        op_full = np.eye(1)
        for j in range(1, n_sites + 1):
            op_full = np.kron(op_full,
                              site_matrix(op) if j == site else np.eye(2))
        left = sum_to_dense(act_left(op, site, s), n_sites)
        right = sum_to_dense(act_right(op, site, s), n_sites)
        assert np.allclose(left, op_full @ dense, atol=1e-12)
        assert np.allclose(right, dense @ op_full, atol=1e-12)

    @given(ketbra_strings(), st.integers(-2, 2))
    def test_shift_moves_offset(self, s, d):
        if s.offset + d < 1:
            return
        t = shift(s, d)
        assert t.offset == s.offset + d
        assert (t.ket, t.bra) == (s.ket, s.bra)

    def test_identity_sum_is_hermitian_projector_sum(self):
        ident = identity_sum(1, 2)
        assert is_hermitian(ident)
        assert np.allclose(sum_to_dense(ident, 2), np.eye(4))


def _marginal(rho, n, k):
    """Partial trace of an n-site density matrix onto the first k sites."""
    t = rho.reshape(2 ** k, 2 ** (n - k), 2 ** k, 2 ** (n - k))
    return np.einsum("ajbj->ab", t)


class TestEmbedding:
    def test_full_window_single_entry(self):
        f = embed_functional(KetBraString(1, (1,), (1,)), 1)
        assert f.entries == {(0, 0): 1.0}

    def test_partial_trace_extension(self):
        f = embed_functional(KetBraString(1, (1,), (1,)), 2)
        # <|1><1| (x) id> = sum of both diagonal entries with leading 1-bit
        assert f.entries == {(0, 0): 1.0, (1, 1): 1.0}

    def test_window_too_large_rejected(self):
        with pytest.raises(WindowTooLarge):
            embed_functional(KetBraString(1, (1, 1), (1, 1)), 1)

    @given(ketbra_strings(max_len=3, max_offset=1))
    @hyp_settings(max_examples=30)
    def test_matches_dense_expectation(self, s):
        n = 4
        rng = np.random.default_rng(7)
        a = rng.normal(size=(2 ** n, 2 ** n)) + 1j * rng.normal(
            size=(2 ** n, 2 ** n))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        f = embed_functional(s, n)
        expected = np.trace(_marginal(rho, n, s.length)
                            @ string_to_dense(s, s.length))
        assert abs(f.apply(rho) - expected) < 1e-12

    @given(operator_sums(max_terms=2))
    @hyp_settings(max_examples=30)
    def test_embed_sum_linear_on_offset_one_terms(self, s):
        n = 5
        aligned = OperatorSum({KetBraString(1, t.ket, t.bra): c
                               for t, c in s})
        rng = np.random.default_rng(11)
        a = rng.normal(size=(2 ** n, 2 ** n)) + 1j * rng.normal(
            size=(2 ** n, 2 ** n))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        f = embed_sum(aligned, n)
        expected = np.trace(rho @ sum_to_dense(aligned, n))
        assert abs(f.apply(rho) - expected) < 1e-10
