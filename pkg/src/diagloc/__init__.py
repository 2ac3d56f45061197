"""Diagonal Hamiltonians on n qubits, their Z-string forms, and how eigenbasis
permutations change sparsity and locality."""

from .algebra import BitVector, Dyadic, DyadicVector, fwht, gf2_rank, span, subgroups, wht
from .diagform import (
    DiagonalForm,
    FormMetrics,
    Spectrum,
    coefficient_entropy,
    form_of,
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
from .errors import DiaglocError, InfeasibleSearch, InvalidInput
from .groupring import GroupRingElement, LEMMAS, LemmaReport, psi, verify_lemma, verify_lemmas
from .localize import (
    AnnealParams,
    Objective,
    SearchOutcome,
    affine_localize,
    anneal_search,
    certify,
    check_local_map,
    exhaustive_search,
    generic_vector_check,
    localizability_curve,
)
from .perms import (
    AffinePermutation,
    Permutation,
    TablePermutation,
    compose,
    conjugate_form,
    invert,
    parse_permutation,
    permute_spectrum,
    random_affine,
    random_permutation,
)
from .bounds import bound_chain, bh_entropy_bits, cosmic_table

__version__ = "0.1.0"
