"""Searching for sparse or local representations of a spectrum.

Conventions: search results carry a permutation ``pi`` in the spectrum
convention of :mod:`diagloc.perms`, i.e. the reported form is
``conjugate_form(pi, form_of(spectrum))``.  The column checks
(:func:`check_local_map`, :func:`generic_vector_check`) use the transform
matrix ``(H pi H)[I, J] = sum_y (-1)**(I.y + pi(y).J)``, which matches
``Psi(J)`` in :mod:`diagloc.groupring`; localizing a form with support ``S``
through that ``pi`` corresponds to conjugating by ``pi^-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    _butterfly,
    bits_of,
    echelon,
    gf2_rank,
    mat_inverse,
    parity_table,
    popcount_table,
    transpose,
)
from .diagform import (
    EPS_ZERO,
    EXACT,
    FLOAT,
    DiagonalForm,
    Spectrum,
    form_of,
    form_to_dict,
    locality,
    nnz,
    shannon_entropy,
    spectrum_of,
)
from .errors import InfeasibleSearch, InvalidInput
from .groupring import locality_of, psi
from .perms import (
    AffinePermutation,
    Permutation,
    TablePermutation,
    conjugate_form,
)

MAX_EXHAUSTIVE_QUBITS = 3
MAX_ANNEAL_QUBITS = 12
GENERIC_EPS = 1e-9


# ---------------------------------------------------------------------------
# Objectives


@dataclass(frozen=True)
class Objective:
    """``min_nnz``, ``min_locality`` or ``fit_locality`` (with target ``m``)."""

    kind: str
    m: int | None = None

    def __post_init__(self):
        if self.kind not in ("min_nnz", "min_locality", "fit_locality"):
            raise InvalidInput(f"unknown objective {self.kind!r}")
        if (self.kind == "fit_locality") != (self.m is not None):
            raise InvalidInput("fit_locality needs m; other objectives take none")

    @classmethod
    def parse(cls, text: str) -> "Objective":
        """``nnz``, ``locality`` or ``locality:<m>``."""
        text = text.strip()
        if text in ("nnz", "min_nnz"):
            return cls("min_nnz")
        if text in ("locality", "min_locality"):
            return cls("min_locality")
        head, _, tail = text.partition(":")
        if head in ("locality", "fit_locality") and tail.isdigit():
            return cls("fit_locality", int(tail))
        raise InvalidInput(f"bad objective {text!r}; use nnz, locality or locality:<m>")

    def __str__(self):
        return f"{self.kind}({self.m})" if self.m is not None else self.kind

    def value(self, form: DiagonalForm) -> float:
        if self.kind == "min_nnz":
            return float(nnz(form))
        if self.kind == "min_locality":
            return float(locality(form))
        return form.max_abs_off(self.m)


MIN_NNZ = Objective("min_nnz")
MIN_LOCALITY = Objective("min_locality")


def fit_locality(m: int) -> Objective:
    return Objective("fit_locality", m)


@dataclass
class SearchOutcome:
    best_perm: Permutation
    best_form: DiagonalForm
    objective_value: float
    strategy: str
    evaluations: int

    @property
    def success(self) -> bool:
        """For ``fit_locality`` objectives: whether the target was met."""
        return self.objective_value == 0

    def to_dict(self) -> dict:
        return {"strategy": self.strategy, "objective_value": self.objective_value,
                "evaluations": self.evaluations, "perm": self.best_perm.to_dict(),
                "form": form_to_dict(self.best_form),
                "nnz": nnz(self.best_form), "locality": locality(self.best_form)}


@dataclass(frozen=True)
class Certificate:
    kind: str  # "nnz_impossible" | "locality_impossible" | "none"
    bound: float
    budget: float

    @property
    def impossible(self) -> bool:
        return self.kind != "none"


@dataclass(frozen=True)
class CurvePoint:
    k: int
    trials: int
    localized_count: int
    certified_impossible_count: int

    @property
    def p_lower(self) -> float:
        return self.localized_count / self.trials

    @property
    def p_upper(self) -> float:
        return 1.0 - self.certified_impossible_count / self.trials

    def row(self) -> list:
        return [self.k, self.trials, self.localized_count, self.certified_impossible_count,
                repr(self.p_lower), repr(self.p_upper)]


CURVE_HEADER = ["k", "trials", "localized", "certified_impossible", "p_lower", "p_upper"]


# ---------------------------------------------------------------------------
# Column checks


def check_local_map(perm: Permutation, S: Iterable, m: int) -> bool:
    """True when every ``Psi(J)``, ``J in S``, has locality at most ``m``."""
    S = [bits_of(J) for J in S]
    if not S:
        raise InvalidInput("S must be non-empty")
    if not 0 <= m <= perm.n:
        raise InvalidInput(f"m must be in [0, {perm.n}]")
    return all(locality_of(psi(perm, J)) <= m for J in S)


def transform_vector(perm: Permutation, x: np.ndarray) -> np.ndarray:
    """``H pi H x`` with ``(pi w)[y] = w[pi(y)]`` (unnormalized ``H``)."""
    w = _butterfly(np.asarray(x, dtype=float))
    return _butterfly(w[perm.table()])


def generic_vector_check(perm: Permutation, S: Iterable, m: int, seed=None) -> bool:
    """Column check through one generic vector ``x = sum_J c_J e_J``.

    The ``c_J`` are independent uniform draws from ``[1, 2]``; cancellation
    among them has probability zero, so ``(H pi H x)[I] == 0`` for all
    ``|I| > m`` exactly when each column ``J in S`` vanishes there.
    """
    S = sorted({bits_of(J) for J in S})
    if not S:
        raise InvalidInput("S must be non-empty")
    n = perm.n
    rng = np.random.default_rng(seed)
    x = np.zeros(1 << n)
    x[S] = rng.uniform(1.0, 2.0, size=len(S))
    y = transform_vector(perm, x)
    high = popcount_table(n) > m
    tol = GENERIC_EPS * np.linalg.norm(x) * (1 << n)
    return bool(np.all(np.abs(y[high]) <= tol))


# ---------------------------------------------------------------------------
# Certificates


def local_term_cap(n: int, m: int) -> int:
    """Number of masks of weight at most ``m``."""
    return sum(math.comb(n, i) for i in range(min(m, n) + 1))


def certify(spectrum: Spectrum, nnz_budget: int | None = None, m: int | None = None) -> Certificate:
    """Entropy certificate valid for every permutation of ``spectrum``.

    ``2**(n - h)`` bounds the nnz of every permuted form from below; a form of
    locality ``m`` has at most ``sum_{i<=m} C(n, i)`` terms.  A small relative
    margin keeps rounding in ``h`` from producing an unsound certificate.
    """
    bound = 2.0 ** (spectrum.n - shannon_entropy(spectrum))
    margin = 1.0 + 1e-9
    if m is not None:
        cap = local_term_cap(spectrum.n, m)
        if bound > cap * margin:
            return Certificate("locality_impossible", bound, float(cap))
    if nnz_budget is not None and bound > nnz_budget * margin:
        return Certificate("nnz_impossible", bound, float(nnz_budget))
    budget = local_term_cap(spectrum.n, m) if m is not None else nnz_budget
    return Certificate("none", bound, float(budget if budget is not None else math.inf))


# ---------------------------------------------------------------------------
# Affine localization


def affine_localize(form: DiagonalForm) -> SearchOutcome:
    """Relabel masks by an invertible GF(2) map so the support spans few qubits.

    A basis of the support's span is sent to the leading standard vectors, so
    every mask lands on the first ``rank`` qubits.  The identity is kept when it
    is already at least as local.
    """
    n = form.n
    ident = AffinePermutation.identity(n)
    support = list(form.terms)
    if not support:
        return SearchOutcome(ident, form, 0.0, "affine", 1)
    basis = []
    for t in support:
        if gf2_rank(basis + [t]) > len(basis):
            basis.append(t)
    r = len(basis)
    pivots = {b.bit_length() - 1 for b in echelon(basis)}
    extra = [1 << p for p in range(n) if p not in pivots]
    # M sends basis[i] to qubit i: columns of M^-1 are the chosen vectors
    cols = basis + extra[: n - r]
    m_inv = transpose(cols, n)
    M = mat_inverse(m_inv, n)
    # conjugation moves masks by A^-T, so A = M^-T
    A = transpose(mat_inverse(M, n), n)
    perm = AffinePermutation(n, tuple(A), 0)
    out = conjugate_form(perm, form)
    if locality(out) >= locality(form):
        return SearchOutcome(ident, form, float(locality(form)), "affine", 2)
    return SearchOutcome(perm, out, float(locality(out)), "affine", 2)


# ---------------------------------------------------------------------------
# Exhaustive search


@lru_cache(maxsize=4)
def _all_tables(size: int) -> np.ndarray:
    return np.array(list(permutations(range(size))), dtype=np.int64)


def _hadamard(n: int) -> np.ndarray:
    xs = np.arange(1 << n)
    return 1 - 2 * parity_table(n)[xs[:, None] & xs[None, :]].astype(np.int64)


def _batch_costs(gammas: np.ndarray, n: int, objective: Objective, exact: bool) -> np.ndarray:
    """Objective values for a batch of dense coefficient rows."""
    if exact:
        nz = gammas != 0
    else:
        scale = np.abs(gammas).max(axis=-1, keepdims=True)
        nz = np.abs(gammas) > EPS_ZERO * scale
    if objective.kind == "min_nnz":
        return nz.sum(axis=-1).astype(float)
    weights = popcount_table(n)
    if objective.kind == "min_locality":
        return np.where(nz, weights, 0).max(axis=-1).astype(float)
    high = weights > objective.m
    return np.where(nz & high, np.abs(gammas), 0).sum(axis=-1).astype(float)


def _spectrum_rows(spectrum: Spectrum):
    """(numeric values, exact flag, scale) with integer values in exact mode."""
    if spectrum.mode == EXACT:
        vals = spectrum.values
        if vals.num.dtype == object:
            raise InvalidInput("spectrum numerators too large for exhaustive search")
        return vals.num.astype(np.int64), True, 2.0 ** -(vals.shift + spectrum.n)
    return spectrum.values.astype(float), False, 2.0 ** -spectrum.n


def exhaustive_search(spectrum: Spectrum, objective: Objective = MIN_NNZ) -> SearchOutcome:
    """Global optimum over every permutation of the spectrum (``n <= 3``).

    Ties go to the lexicographically smallest permutation table.
    """
    n = spectrum.n
    if n > MAX_EXHAUSTIVE_QUBITS:
        raise InfeasibleSearch(
            f"exhaustive search over (2^{n})! = {math.factorial(1 << n):.3e} permutations "
            f"is infeasible; it is limited to n <= {MAX_EXHAUSTIVE_QUBITS}")
    size = 1 << n
    tables = _all_tables(size)
    vals, exact, scale = _spectrum_rows(spectrum)
    # (pi lam)[pi(y)] = lam[y]
    permuted = np.empty(tables.shape, dtype=vals.dtype)
    np.put_along_axis(permuted, tables, np.broadcast_to(vals, tables.shape), axis=1)
    gammas = permuted @ _hadamard(n)
    costs = _batch_costs(gammas, n, objective, exact)
    if objective.kind == "fit_locality":
        costs = costs * scale
    best = int(np.argmin(costs))
    perm = TablePermutation(tuple(tables[best].tolist()))
    form = conjugate_form(perm, form_of(spectrum))
    return SearchOutcome(perm, form, float(objective.value(form)), "exhaustive", len(tables))


# ---------------------------------------------------------------------------
# Simulated annealing


@dataclass(frozen=True)
class AnnealParams:
    iters: int = 2000
    t0: float = 1.0
    cooling: float = 0.995
    restarts: int = 2


class _AnnealState:
    """Arrangement ``arr`` with ``(pi lam)[x] = lam[arr[x]]`` and its coefficients."""

    def __init__(self, lam: np.ndarray, arr: np.ndarray, n: int):
        self.lam = lam
        self.n = n
        self.arr = arr.copy()
        self.gamma = _butterfly(lam[arr]) / (1 << n)

    def swap_delta(self, i: int, j: int, par: np.ndarray, ks: np.ndarray) -> np.ndarray:
        li, lj = self.lam[self.arr[i]], self.lam[self.arr[j]]
        si = 1 - 2 * par[ks & i].astype(float)
        sj = 1 - 2 * par[ks & j].astype(float)
        return (lj - li) * (si - sj) / (1 << self.n)


def _cost(gamma: np.ndarray, n: int, objective: Objective) -> float:
    return float(_batch_costs(gamma[None, :], n, objective, exact=False)[0])


def anneal_search(spectrum: Spectrum, objective: Objective = MIN_NNZ,
                  params: AnnealParams = AnnealParams(), seed=0) -> SearchOutcome:
    """Simulated annealing over spectrum arrangements with transposition moves.

    The walk starts from the better of the input order and the descending
    sort, so an input that is already optimal costs nothing.  Later restarts
    begin from random shuffles.  Deterministic for a fixed seed.
    """
    n = spectrum.n
    if n > MAX_ANNEAL_QUBITS:
        raise InfeasibleSearch(f"annealing is limited to n <= {MAX_ANNEAL_QUBITS}")
    size = 1 << n
    lam = spectrum.as_float()
    rng = np.random.default_rng(seed)
    par = parity_table(n)
    ks = np.arange(size)

    ident = np.arange(size)
    desc = np.argsort(-lam, kind="stable")
    starts = [ident, desc]
    start_costs = [_cost(_AnnealState(lam, a, n).gamma, n, objective) for a in starts]
    evaluations = 2
    # ties go to the descending sort
    first = ident if start_costs[0] < start_costs[1] else desc
    best_arr, best_cost = first.copy(), min(start_costs)

    for r in range(max(1, params.restarts)):
        if best_cost == 0:
            break
        arr = first if r == 0 else rng.permutation(first)
        state = _AnnealState(lam, arr, n)
        cost = _cost(state.gamma, n, objective)
        evaluations += 1 if r else 0
        if cost < best_cost:
            best_arr, best_cost = state.arr.copy(), cost
        temp = params.t0
        for _ in range(params.iters):
            if best_cost == 0:
                break
            i, j = rng.choice(size, 2, replace=False)
            if state.lam[state.arr[i]] == state.lam[state.arr[j]]:
                temp *= params.cooling
                continue
            new_gamma = state.gamma + state.swap_delta(int(i), int(j), par, ks)
            new_cost = _cost(new_gamma, n, objective)
            evaluations += 1
            delta = new_cost - cost
            if delta <= 0 or (temp > 0 and rng.random() < math.exp(-delta / temp)):
                state.arr[i], state.arr[j] = state.arr[j], state.arr[i]
                state.gamma = new_gamma
                cost = new_cost
                if cost < best_cost:
                    best_arr, best_cost = state.arr.copy(), cost
            temp *= params.cooling

    # arr[x] = pi^-1(x), so the permutation table is the inverse of arr
    table = np.empty(size, dtype=np.int64)
    table[best_arr] = np.arange(size)
    perm = TablePermutation(tuple(table.tolist()))
    form = conjugate_form(perm, form_of(spectrum))
    return SearchOutcome(perm, form, float(objective.value(form)), "anneal", evaluations)


# ---------------------------------------------------------------------------
# Random sparse forms and the localizability curve


def sample_random_form(n: int, k: int, coeff_seed, mask_seed) -> DiagonalForm:
    """``k`` distinct nonzero masks, coefficients uniform on ``[-1, -0.1] U [0.1, 1]``."""
    if not 1 <= k < (1 << n):
        raise InvalidInput(f"k must be in [1, {(1 << n) - 1}] for n={n}, got {k}")
    masks = np.random.default_rng(mask_seed).choice((1 << n) - 1, size=k, replace=False) + 1
    crng = np.random.default_rng(coeff_seed)
    mags = crng.uniform(0.1, 1.0, size=k)
    signs = np.where(crng.random(k) < 0.5, -1.0, 1.0)
    return DiagonalForm(n, {int(t): float(s * a) for t, s, a in zip(masks, signs, mags)}, FLOAT)


STRATEGIES = ("affine", "affine+anneal", "exhaustive")


def _trial_seeds(seed, k: int, trial: int):
    ss = np.random.SeedSequence([int(seed), k, trial])
    coeff, mask, search = ss.spawn(3)
    return coeff, mask, search


def decide_trial(form: DiagonalForm, m: int, strategy: str, search_seed=0,
                 anneal: AnnealParams = AnnealParams()) -> tuple[bool, bool]:
    """(localized, certified_impossible) for one random form.

    Exhaustive search at ``n <= 3`` decides exactly, so a failed exhaustive
    search also counts as a proof of impossibility.
    """
    spec = spectrum_of(form)
    certified = certify(spec, None, m).impossible
    if certified:
        return False, True
    if locality(affine_localize(form).best_form) <= m:
        return True, False
    if strategy == "affine":
        return False, False
    if strategy == "affine+anneal":
        out = anneal_search(spec, fit_locality(m), anneal, seed=search_seed)
        return locality(out.best_form) <= m, False
    if strategy == "exhaustive":
        out = exhaustive_search(spec, fit_locality(m))
        ok = locality(out.best_form) <= m
        return ok, not ok
    raise InvalidInput(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def localizability_curve(n: int, m: int, k_range: Sequence[int], trials: int,
                         strategy: str = "affine", seed=0,
                         anneal: AnnealParams = AnnealParams()) -> list[CurvePoint]:
    """Bracket ``[p_lower, p_upper]`` on the chance a random k-term form localizes to ``m``.

    Each trial is seeded from ``(seed, k, trial)`` alone, so points can be
    computed in any order or in parallel.
    """
    if strategy not in STRATEGIES:
        raise InvalidInput(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if strategy == "exhaustive" and n > MAX_EXHAUSTIVE_QUBITS:
        raise InfeasibleSearch(f"exhaustive strategy is limited to n <= {MAX_EXHAUSTIVE_QUBITS}")
    if trials < 1:
        raise InvalidInput("trials must be positive")
    points = []
    for k in k_range:
        localized = impossible = 0
        for trial in range(trials):
            cseed, mseed, sseed = _trial_seeds(seed, k, trial)
            form = sample_random_form(n, k, cseed, mseed)
            ok, cert = decide_trial(form, m, strategy, sseed, anneal)
            localized += ok
            impossible += cert
        points.append(CurvePoint(k, trials, localized, impossible))
    return points
