from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest

from oracles import naive_coeffs, naive_rank, permuted
from diagloc import gallery
from diagloc.diagform import DiagonalForm, Spectrum, form_of, locality, nnz, spectrum_of
from diagloc.errors import InfeasibleSearch, InvalidInput
from diagloc.localize import (
    MIN_LOCALITY,
    MIN_NNZ,
    AnnealParams,
    CurvePoint,
    Objective,
    affine_localize,
    anneal_search,
    certify,
    check_local_map,
    decide_trial,
    exhaustive_search,
    fit_locality,
    generic_vector_check,
    local_term_cap,
    localizability_curve,
    sample_random_form,
    transform_vector,
)
from diagloc.perms import AffinePermutation, conjugate_form, invert, random_permutation


def brute_min_nnz(spectrum):
    vals = [Fraction(v) for v in spectrum]
    best = None
    for table in permutations(range(len(vals))):
        k = sum(1 for c in naive_coeffs(permuted(vals, table)) if c)
        best = k if best is None else min(best, k)
    return best


class TestObjective:
    @pytest.mark.parametrize("text,expected", [
        ("nnz", MIN_NNZ), ("locality", MIN_LOCALITY), ("locality:2", fit_locality(2))])
    def test_parse(self, text, expected):
        assert Objective.parse(text) == expected

    @pytest.mark.parametrize("text", ["foo", "locality:x", "nnz:2"])
    def test_parse_errors(self, text):
        with pytest.raises(InvalidInput):
            Objective.parse(text)

    def test_values(self):
        dense = gallery.dense()
        assert MIN_NNZ.value(dense) == 11
        assert MIN_LOCALITY.value(dense) == 4
        # weight > 3 masks: only ZZZZ with |-1/4|
        assert fit_locality(3).value(dense) == 0.25


class TestColumnChecks:
    def test_identity_is_local(self):
        p = AffinePermutation.identity(3)
        assert check_local_map(p, [0b100, 0b010], 1)
        assert not check_local_map(p, [0b110], 1)

    def test_transform_matches_definition(self, rng):
        p = random_permutation(3, 4)
        x = rng.normal(size=8)
        tab = p.table()
        expected = [sum(x[J] * sum((-1) ** (bin(I & y).count("1") + bin(int(tab[y]) & J).count("1"))
                                   for y in range(8)) for J in range(8)) for I in range(8)]
        assert np.allclose(transform_vector(p, x), expected)

    @pytest.mark.parametrize("seed", range(30))
    def test_generic_agrees_with_exact(self, seed):
        rng = np.random.default_rng(seed)
        p = random_permutation(3, seed)
        S = [int(v) for v in rng.choice(8, size=int(rng.integers(1, 4)), replace=False)]
        m = int(rng.integers(0, 4))
        assert check_local_map(p, S, m) == generic_vector_check(p, S, m, seed=seed)

    @pytest.mark.parametrize("seed", range(40))
    def test_local_map_localizes_forms(self, seed):
        # a passing column check means every form supported on S becomes m-local
        rng = np.random.default_rng(seed)
        p = random_permutation(3, seed)
        S = [int(v) for v in rng.choice(8, size=2, replace=False)]
        for m in range(4):
            if check_local_map(p, S, m):
                form = DiagonalForm(3, {J: int(rng.integers(1, 5)) for J in S})
                assert locality(conjugate_form(invert(p), form)) <= m

    def test_inputs_validated(self):
        p = random_permutation(3, 0)
        with pytest.raises(InvalidInput):
            check_local_map(p, [], 1)
        with pytest.raises(InvalidInput):
            check_local_map(p, [1], 4)


class TestCertificates:
    def test_term_cap(self):
        assert local_term_cap(4, 1) == 5 and local_term_cap(3, 3) == 8

    def test_delta_is_not_local(self):
        spec = Spectrum.exact([1, 0, 0, 0, 0, 0, 0, 0])
        cert = certify(spec, m=1)
        assert cert.impossible and cert.kind == "locality_impossible" and cert.bound == 8

    def test_nnz_budget(self):
        spec = spectrum_of(gallery.sparse_local())
        assert not certify(spec, nnz_budget=4).impossible
        assert certify(spec, nnz_budget=1).impossible

    def test_certificate_is_sound(self, rng):
        # a certified spectrum is never localized by exhaustive search
        for _ in range(15):
            spec = Spectrum(rng.integers(-3, 4, size=8))
            if not any(spec.values.num):
                continue
            if certify(spec, m=1).impossible:
                assert locality(exhaustive_search(spec, fit_locality(1)).best_form) > 1


class TestAffine:
    def test_nonlocal_to_local(self):
        out = affine_localize(gallery.sparse_nonlocal())
        assert out.best_form == gallery.sparse_local()
        assert conjugate_form(out.best_perm, gallery.sparse_nonlocal()) == out.best_form

    def test_keeps_identity_when_already_local(self):
        out = affine_localize(gallery.sparse_local())
        assert out.best_perm.is_identity() and out.best_form == gallery.sparse_local()

    @pytest.mark.parametrize("seed", range(20))
    def test_locality_bounded_by_rank(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 11))
        k = int(rng.integers(1, min(12, (1 << n) - 1)))
        masks = rng.choice((1 << n) - 1, size=k, replace=False) + 1
        form = DiagonalForm(n, {int(t): int(rng.integers(1, 9)) for t in masks})
        out = affine_localize(form)
        assert locality(out.best_form) <= naive_rank([int(t) for t in masks])
        assert nnz(out.best_form) == nnz(form)

    def test_empty_form(self):
        assert affine_localize(DiagonalForm(3, {})).best_form == DiagonalForm(3, {})


class TestExhaustive:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_brute_force_at_n2(self, seed):
        vals = [int(v) for v in np.random.default_rng(seed).integers(-3, 4, size=4)]
        out = exhaustive_search(Spectrum.exact(vals), MIN_NNZ)
        assert out.objective_value == brute_min_nnz(vals)
        assert out.evaluations == 24

    def test_three_single_z_terms(self):
        spec = Spectrum.exact([1, -3, 1, 3, -1, 1, -1, -1])
        out = exhaustive_search(spec, MIN_NNZ)
        assert out.objective_value == 3
        assert spectrum_of(out.best_form).sorted_values() == spec.sorted_values()
        assert conjugate_form(out.best_perm, form_of(spec)) == out.best_form

    def test_min_locality(self):
        spec = spectrum_of(conjugate_form(random_permutation(3, 2), form_of(Spectrum.exact([2, 0, 0, 0, 0, 0, 0, -2]))))
        assert exhaustive_search(spec, MIN_LOCALITY).objective_value >= 1

    def test_refuses_n4(self):
        with pytest.raises(InfeasibleSearch, match="infeasible"):
            exhaustive_search(spectrum_of(gallery.dense()))


class TestAnneal:
    def test_already_local_costs_nothing(self):
        spec = spectrum_of(gallery.sparse_local())
        out = anneal_search(spec, fit_locality(1), seed=0)
        assert out.objective_value == 0 and out.best_perm.is_identity()
        assert out.evaluations == 2

    def test_deterministic(self):
        spec = spectrum_of(gallery.dense())
        p = AnnealParams(iters=300, restarts=2)
        a, b = anneal_search(spec, MIN_NNZ, p, seed=3), anneal_search(spec, MIN_NNZ, p, seed=3)
        assert a.best_perm == b.best_perm and a.evaluations == b.evaluations

    def test_result_is_consistent(self):
        spec = spectrum_of(gallery.dense())
        out = anneal_search(spec, MIN_NNZ, AnnealParams(iters=500), seed=1)
        assert conjugate_form(out.best_perm, form_of(spec)) == out.best_form
        assert out.objective_value == nnz(out.best_form) <= 11

    def test_reaches_exhaustive_optimum_at_n3(self):
        hits = 0
        for s in range(100):
            spec = Spectrum(np.random.default_rng(s).integers(-3, 4, size=8))
            best = exhaustive_search(spec, MIN_NNZ).objective_value
            got = anneal_search(spec, MIN_NNZ, seed=s).objective_value
            assert got >= best
            hits += got == best
        assert hits >= 95


class TestCurve:
    def test_sampled_forms(self):
        a = sample_random_form(5, 7, 1, 2)
        assert a == sample_random_form(5, 7, 1, 2)
        assert nnz(a) == 7 and 0 not in a.terms
        assert all(0.1 <= abs(c) <= 1 for c in a.terms.values())
        with pytest.raises(InvalidInput):
            sample_random_form(3, 8, 0, 0)

    def test_decide_trial_certifies_delta(self):
        # a one-hot spectrum needs all 8 masks under every permutation
        form = form_of(Spectrum.exact([0, 0, 5, 0, 0, 0, 0, 0]))
        assert decide_trial(form, 1, "affine") == (False, True)
        assert decide_trial(gallery.sparse_nonlocal(), 1, "affine") == (True, False)

    def test_curve_is_bracketed_and_reproducible(self):
        kw = dict(n=4, m=2, k_range=range(1, 8), trials=6, strategy="affine+anneal",
                  seed=9, anneal=AnnealParams(iters=100, restarts=1))
        pts = localizability_curve(**kw)
        assert pts == localizability_curve(**kw)
        for p in pts:
            assert 0 <= p.p_lower <= p.p_upper <= 1
        assert pts[0].p_lower == 1.0 and pts[1].p_lower == 1.0

    def test_points_do_not_depend_on_range(self):
        a = localizability_curve(4, 1, range(2, 5), 5, "affine", seed=1)
        b = localizability_curve(4, 1, [4], 5, "affine", seed=1)
        assert a[-1] == b[0]

    def test_validation(self):
        with pytest.raises(InvalidInput):
            localizability_curve(3, 1, [1], 5, "magic")
        with pytest.raises(InfeasibleSearch):
            localizability_curve(4, 1, [1], 5, "exhaustive")
        with pytest.raises(InvalidInput):
            localizability_curve(3, 1, [1], 0)

    def test_point_row(self):
        assert CurvePoint(3, 4, 1, 2).row() == [3, 4, 1, 2, "0.25", "0.5"]
