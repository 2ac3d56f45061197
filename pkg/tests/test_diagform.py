from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_dyadic
from oracles import naive_coeffs, naive_entropy, naive_locality, naive_spectrum
from diagloc import gallery
from diagloc.diagform import (
    DiagonalForm,
    Spectrum,
    coefficient_entropy,
    form_of,
    form_to_dict,
    locality,
    metrics,
    nnz,
    nnz_lower_bound,
    parse_form,
    parse_spectrum,
    serialize_form,
    serialize_spectrum,
    shannon_entropy,
    spectrum_of,
    uncertainty_check,
)
from diagloc.errors import InvalidInput

# eigenvalues of Z1+Z2+Z3+Z4, computed by the naive oracle and frozen
LOCAL_SPECTRUM = [4, 2, 2, 0, 2, 0, 0, -2, 2, 0, 0, -2, 0, -2, -2, -4]


def fr(form):
    return {t: c.to_fraction() for t, c in form.terms.items()}


class TestGallery:
    def test_frozen_spectrum_matches_oracle(self):
        assert naive_spectrum({8: 1, 4: 1, 2: 1, 1: 1}, 4) == LOCAL_SPECTRUM
        assert [v.to_fraction() for v in spectrum_of(gallery.sparse_local()).values] == LOCAL_SPECTRUM

    def test_all_three_share_a_spectrum(self):
        spectra = [Counter(spectrum_of(f).sorted_values()) for f in gallery.build().values()]
        assert spectra[0] == spectra[1] == spectra[2] == Counter(LOCAL_SPECTRUM)

    @pytest.mark.parametrize("name,expected", [
        ("sparse_local", (4, 1)), ("sparse_nonlocal", (4, 4)), ("dense", (11, 4))])
    def test_metrics(self, name, expected):
        f = gallery.build()[name]
        assert (nnz(f), locality(f)) == expected
        assert naive_locality([f.terms.get(t, 0) for t in range(16)]) == expected[1]

    def test_dense_coefficients(self):
        coeffs = Counter(fr(gallery.dense()).values())
        assert coeffs == Counter({Fraction(3, 4): 1, Fraction(1): 3, Fraction(-1, 4): 7})

    def test_dense_matches_swapped_spectrum(self):
        lam = list(LOCAL_SPECTRUM)
        lam[0], lam[8] = lam[8], lam[0]
        expected = {t: c for t, c in enumerate(naive_coeffs(lam)) if c}
        assert fr(gallery.dense()) == expected

    def test_shipped_fixtures_match_builders(self):
        for name, form in gallery.build().items():
            assert gallery.shipped(name) == form


class TestDuality:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_spectrum_matches_oracle(self, rng, n):
        size = 1 << n
        coeffs = random_dyadic(rng, size)
        form = DiagonalForm(n, {t: c for t, c in enumerate(coeffs) if c})
        got = [v.to_fraction() for v in spectrum_of(form).values]
        assert got == naive_spectrum(dict(enumerate(coeffs)), n)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6).flatmap(
        lambda n: st.lists(st.integers(-20, 20), min_size=1 << n, max_size=1 << n)))
    def test_round_trip_exact(self, vals):
        spec = Spectrum(np.array(vals))
        assert spectrum_of(form_of(spec)) == spec

    def test_round_trip_float(self, rng):
        vals = rng.normal(size=32)
        back = spectrum_of(form_of(Spectrum(vals))).as_float()
        assert np.allclose(back, vals, atol=1e-12)

    def test_empty_form(self):
        f = DiagonalForm(3, {})
        assert nnz(f) == 0 and locality(f) == 0
        assert metrics(f).nnz == 0


class TestEntropy:
    def test_matches_oracle(self, rng):
        for n in (2, 4, 6):
            vals = random_dyadic(rng, 1 << n)
            if not any(vals):
                continue
            spec = Spectrum.exact(vals)
            assert shannon_entropy(spec) == pytest.approx(naive_entropy(vals), abs=1e-12)
            form = form_of(spec)
            assert coefficient_entropy(form) == pytest.approx(
                naive_entropy(naive_coeffs(vals)), abs=1e-12)

    def test_local_form_values(self):
        spec = spectrum_of(gallery.sparse_local())
        assert shannon_entropy(spec) == pytest.approx(3.0, abs=1e-12)
        assert nnz_lower_bound(spec) == pytest.approx(2.0, abs=1e-12)
        assert uncertainty_check(spec, gallery.sparse_local()) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_delta_spectrum_is_tight(self, n):
        vals = [0] * (1 << n)
        vals[5 % (1 << n)] = 3
        spec = Spectrum.exact(vals)
        assert shannon_entropy(spec) == 0
        assert uncertainty_check(spec, form_of(spec)) == pytest.approx(0.0, abs=1e-12)
        assert nnz_lower_bound(spec) == 2 ** n

    def test_zero_vector_rejected(self):
        with pytest.raises(InvalidInput):
            shannon_entropy(Spectrum.exact([0, 0]))

    def test_float_and_exact_agree(self, rng):
        vals = [int(v) for v in rng.integers(-5, 6, size=16)]
        assert shannon_entropy(Spectrum(np.array(vals, dtype=float))) == pytest.approx(
            shannon_entropy(Spectrum.exact(vals)), abs=1e-12)


class TestSerialization:
    @pytest.mark.parametrize("fmt", ["json", "text"])
    def test_round_trip(self, fmt):
        for form in gallery.build().values():
            assert parse_form(serialize_form(form, fmt)) == form

    def test_float_round_trip(self, rng):
        form = form_of(Spectrum(rng.normal(size=8)))
        for fmt in ("json", "text"):
            assert parse_form(serialize_form(form, fmt)) == form

    def test_json_layout(self):
        doc = form_to_dict(DiagonalForm.from_paulis({"ZIII": "3/4"}))
        assert doc == {"n": 4, "mode": "exact",
                       "terms": [{"mask": "ZIII", "num": 3, "log2den": 2}]}

    def test_text_layout(self):
        text = serialize_form(DiagonalForm.from_paulis({"ZI": "-1/4", "IZ": 1}), "text")
        assert text.splitlines() == ["# n=2 mode=exact", "1 IZ", "-1/4 ZI"]

    @pytest.mark.parametrize("text,where", [
        ('{"n":2,"terms":[{"mask":"ZX","num":1,"log2den":0}]}', r"terms\[0\]"),
        ("# n=2 mode=exact\n1 ZI\n1 ZI\n", "line 3"),
        ("# n=2 mode=exact\n1/3 ZI\n", "line 2"),
        ("# n=2\nfoo\n", "line 2"),
        ("{bad", "line 1"),
    ])
    def test_diagnostics(self, text, where):
        with pytest.raises(InvalidInput, match=where):
            parse_form(text)

    def test_spectrum_formats(self):
        spec = Spectrum.exact(["1/2", 3, 0, -1])
        assert serialize_spectrum(spec) == '["1/2", 3, 0, -1]\n'
        for fmt in ("json", "csv"):
            assert parse_spectrum(serialize_spectrum(spec, fmt)) == spec

    def test_any_float_means_float_mode(self):
        assert parse_spectrum("[1, 2.5]").mode == "float"
        assert parse_spectrum("[1, 2]").mode == "exact"

    @pytest.mark.parametrize("text,where", [
        ('[1, 0.5, "x", 2]', r"spectrum\[2\]"),
        ("[1.0, NaN]", r"spectrum\[1\]"),
        ("index,value\n0,1\n1,x\n", "line 3"),
        ("index,value\n0,1\n0,2\n", "duplicate"),
        ("[1, 2, 3]", "power of two"),
    ])
    def test_spectrum_diagnostics(self, text, where):
        with pytest.raises(InvalidInput, match=where):
            parse_spectrum(text)
