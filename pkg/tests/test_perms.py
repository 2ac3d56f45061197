import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_dyadic
from oracles import apply_affine, naive_coeffs, naive_spectrum, permuted
from diagloc import gallery
from diagloc.algebra import BitVector, mat_mul
from diagloc.diagform import DiagonalForm, Spectrum, locality, nnz, spectrum_of
from diagloc.errors import InvalidInput
from diagloc.perms import (
    AffinePermutation,
    TablePermutation,
    compose,
    conjugate_form,
    invert,
    parse_permutation,
    permute_spectrum,
    random_affine,
    random_permutation,
)

# lower-triangular matrix of ones: x -> prefix parities
PREFIX_SUMS = AffinePermutation.from_strings(["1000", "1100", "1110", "1111"])


def random_form(rng, n, k):
    masks = rng.choice(1 << n, size=k, replace=False)
    vals = random_dyadic(rng, k, max_log2den=3)
    return DiagonalForm(n, {int(t): v for t, v in zip(masks, vals) if v})


def oracle_conjugate(perm, form):
    lam = naive_spectrum({t: c.to_fraction() for t, c in form.terms.items()}, form.n)
    coeffs = naive_coeffs(permuted(lam, perm.table().tolist()))
    return {t: c for t, c in enumerate(coeffs) if c}


def as_fractions(form):
    return {t: c.to_fraction() for t, c in form.terms.items()}


class TestRepresentations:
    def test_table_must_be_bijection(self):
        with pytest.raises(InvalidInput):
            TablePermutation((0, 0, 1, 2))
        with pytest.raises(InvalidInput):
            TablePermutation((0, 1, 2))

    def test_affine_must_be_invertible(self):
        with pytest.raises(InvalidInput):
            AffinePermutation.from_strings(["11", "11"])

    @pytest.mark.parametrize("seed", range(10))
    def test_affine_table_matches_oracle(self, seed):
        p = random_affine(5, seed)
        assert p.table().tolist() == [apply_affine(p.A, p.b, x, 5) for x in range(32)]

    def test_apply_accepts_bitvectors(self):
        p = gallery.cnot_chain()
        assert p(BitVector.from_str("1010")) == BitVector.from_str("1111")
        assert p(0b1010) == 0b1111

    @pytest.mark.parametrize("seed", range(5))
    def test_inverse_and_compose(self, seed):
        for p in (random_permutation(4, seed), random_affine(4, seed)):
            assert compose(p, invert(p)).is_identity()
            assert compose(invert(p), p).is_identity()
        a, b = random_affine(6, seed), random_affine(6, seed + 100)
        ab = compose(a, b)
        assert isinstance(ab, AffinePermutation)
        assert ab.table().tolist() == a.table()[b.table()].tolist()

    def test_affine_equals_table_form(self):
        p = random_affine(3, 1)
        assert p == TablePermutation(tuple(p.table().tolist()))

    def test_random_is_seeded(self):
        assert random_permutation(5, 7) == random_permutation(5, 7)
        assert random_affine(9, 7) == random_affine(9, 7)
        assert random_permutation(5, 7) != random_permutation(5, 8)

    def test_large_n_affine(self):
        p = random_affine(24, 0)
        x = 0xABCDEF
        assert p.inverse()(p(x)) == x

    @pytest.mark.parametrize("p", [random_permutation(3, 0), random_affine(4, 0)])
    def test_json_round_trip(self, p):
        assert parse_permutation(p.to_json()) == p

    @pytest.mark.parametrize("doc,match", [
        ({"kind": "table", "map": [0, 0]}, "bijection"),
        ({"kind": "affine", "A": ["10", "1"]}, "square"),
        ({"kind": "affine", "A": ["10", "01"], "b": "1"}, "2 bits"),
        ({"kind": "swap"}, "kind"),
        ([1, 2], "object"),
    ])
    def test_parse_errors(self, doc, match):
        with pytest.raises(InvalidInput, match=match):
            parse_permutation(json.dumps(doc))


class TestAction:
    def test_spectrum_action_convention(self):
        p = TablePermutation((1, 2, 3, 0))
        spec = Spectrum.exact([10, 20, 30, 40])
        # (pi lam)[pi(y)] = lam[y]
        assert permute_spectrum(p, spec) == Spectrum.exact([40, 10, 20, 30])

    @pytest.mark.parametrize("seed", range(8))
    def test_table_conjugation_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        form = random_form(rng, 3, 5)
        p = random_permutation(3, seed)
        assert as_fractions(conjugate_form(p, form)) == oracle_conjugate(p, form)

    @pytest.mark.parametrize("seed", range(8))
    def test_affine_closed_form_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        form = random_form(rng, 4, 6)
        p = random_affine(4, seed)
        assert as_fractions(conjugate_form(p, form)) == oracle_conjugate(p, form)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_affine_preserves_nnz_and_spectrum_multiset(self, n, seed):
        rng = np.random.default_rng(seed)
        form = random_form(rng, n, min(6, 1 << n))
        p = random_affine(n, seed)
        out = conjugate_form(p, form)
        assert nnz(out) == nnz(form)
        assert sorted(map(abs, as_fractions(out).values())) == sorted(
            map(abs, as_fractions(form).values()))
        if n <= 8:
            assert spectrum_of(out).sorted_values() == spectrum_of(form).sorted_values()

    def test_cnot_chain_delocalizes(self):
        assert conjugate_form(gallery.cnot_chain(), gallery.sparse_local()) == gallery.sparse_nonlocal()
        assert conjugate_form(PREFIX_SUMS, gallery.sparse_nonlocal()) == gallery.sparse_local()

    def test_prefix_sums_inverts_cnot_chain(self):
        assert mat_mul(PREFIX_SUMS.A, gallery.cnot_chain().A, 4) == [8, 4, 2, 1]

    def test_swap_densifies(self):
        dense = conjugate_form(gallery.first_two_swap(), gallery.sparse_local())
        assert dense == gallery.dense()
        assert (nnz(dense), locality(dense)) == (11, 4)

    def test_bit_flip_signs(self):
        # x -> x ^ 1000 flips the sign of every mask touching the first qubit
        p = AffinePermutation(4, (8, 4, 2, 1), 0b1000)
        out = conjugate_form(p, gallery.sparse_nonlocal())
        assert set(as_fractions(out).values()) == {Fraction(-1)}

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            conjugate_form(random_affine(3, 0), gallery.sparse_local())
