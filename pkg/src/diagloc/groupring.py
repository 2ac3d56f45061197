"""Group ring of Z_2^n with exact dyadic coefficients, and finite-instance
verifiers for the facts about the lifted transforms ``Psi(J)``.

For a permutation ``pi`` and mask ``J`` the partial transform is the sign
table ``F_J(x) = (-1)**(pi(x).J)`` and ``Psi(J)`` is the group-ring element
with coefficients ``a_g = 2**-n sum_x (-1)**(g.x + pi(x).J)``, so that
``chi_x(Psi(J)) = F_J(x)`` for every character.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    Dyadic,
    DyadicVector,
    _butterfly,
    bits_of,
    check_n,
    parity_table,
    popcount,
    popcount_table,
    subgroups,
    wht,
)
from .errors import InvalidInput
from .perms import Permutation


class GroupRingElement:
    """``sum_g coeffs[g] * g``; multiplication is XOR convolution."""

    __slots__ = ("n", "coeffs")

    def __init__(self, coeffs, n: int | None = None):
        if not isinstance(coeffs, DyadicVector):
            coeffs = DyadicVector.from_values(coeffs)
        self.coeffs = coeffs
        self.n = coeffs.n
        if n is not None and n != self.n:
            raise InvalidInput(f"coefficient vector does not match n={n}")

    @classmethod
    def one(cls, n: int) -> "GroupRingElement":
        return cls.basis(n, 0)

    @classmethod
    def basis(cls, n: int, g, coeff=1) -> "GroupRingElement":
        vals = [0] * (1 << check_n(n))
        vals[bits_of(g)] = coeff
        return cls(DyadicVector.from_values(vals))

    @classmethod
    def from_terms(cls, n: int, terms: dict) -> "GroupRingElement":
        vals = [0] * (1 << check_n(n))
        for g, c in terms.items():
            vals[bits_of(g)] = c
        return cls(DyadicVector.from_values(vals))

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        return GroupRingElement(self.coeffs + other.coeffs)

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return GroupRingElement(self.coeffs - other.coeffs)

    def __mul__(self, other: "GroupRingElement") -> "GroupRingElement":
        return gr_mul(self, other)

    def __getitem__(self, g) -> Dyadic:
        return self.coeffs[bits_of(g)]

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.coeffs == other.coeffs

    __hash__ = None

    def is_zero(self) -> bool:
        return len(self.coeffs.nonzero()) == 0

    def __repr__(self):
        terms = [f"{self.coeffs[g]}*{format(int(g), f'0{self.n}b')}" for g in self.coeffs.nonzero()]
        return f"GroupRingElement({' + '.join(terms) or '0'})"


def gr_mul(a: GroupRingElement, b: GroupRingElement) -> GroupRingElement:
    """XOR convolution, computed exactly through the character table."""
    if a.n != b.n:
        raise InvalidInput("group ring elements of different n")
    prod = wht(a.coeffs).hadamard_product(wht(b.coeffs))
    back = wht(prod)
    return GroupRingElement(DyadicVector(back.num, back.shift + a.n))


def character(x, y: GroupRingElement) -> Dyadic:
    """``chi_x(y) = sum_g y_g (-1)**(x.g)``."""
    x = bits_of(x)
    if not 0 <= x < (1 << y.n):
        raise InvalidInput(f"character index {x} out of range")
    signs = 1 - 2 * parity_table(y.n)[np.arange(1 << y.n) & x].astype(np.int64)
    num = sum(int(s) * int(v) for s, v in zip(signs, y.coeffs.num))
    return Dyadic(num, y.coeffs.shift)


def characters(y: GroupRingElement) -> DyadicVector:
    """All character values at once (the transform of the coefficients)."""
    return wht(y.coeffs)


def from_characters(values: DyadicVector) -> GroupRingElement:
    """Inverse of :func:`characters`: the unique element with those character values."""
    back = wht(values)
    return GroupRingElement(DyadicVector(back.num, back.shift + values.n))


def partial_transform(perm: Permutation, J) -> np.ndarray:
    """Sign table ``F_J(x) = (-1)**(pi(x).J)``."""
    J = bits_of(J)
    return 1 - 2 * parity_table(perm.n)[perm.table() & J].astype(np.int64)


def psi(perm: Permutation, J) -> GroupRingElement:
    """The lifted transform ``Psi(J)`` with coefficients ``2**-n * hat(F_J)``."""
    hat = _butterfly(partial_transform(perm, J))
    return GroupRingElement(DyadicVector(hat, perm.n))


def supp(y: GroupRingElement) -> set[int]:
    return {int(g) for g in y.coeffs.nonzero()}


def _node_bits(n: int, masks: Iterable[int]) -> set[int]:
    acc = 0
    for g in masks:
        acc |= int(g)
    return {i for i in range(n) if acc >> (n - 1 - i) & 1}


def nodes(y: GroupRingElement) -> set[int]:
    """Qubit positions (0 = leftmost) used by some term of ``y``."""
    return _node_bits(y.n, supp(y))


def nodes_of_set(perm: Permutation, S: Iterable) -> set[int]:
    out: set[int] = set()
    for J in S:
        out |= nodes(psi(perm, J))
    return out


def locality_of(y: GroupRingElement) -> int:
    return max((popcount(g) for g in supp(y)), default=0)


def _split_arrays(num: np.ndarray, delta: int):
    # doubled split: returns (2D-, 2D+) on integer numerators along the last axis
    size = num.shape[-1]
    idx = np.arange(size) & ~delta
    low = num[..., idx]
    high = num[..., idx | delta]
    return low - high, low + high


def weight_class_split(C, delta) -> tuple[DyadicVector, DyadicVector]:
    """Split a value table along the weight-one direction ``delta``.

    Returns ``(D_minus, D_plus)`` with ``2 D_pm(y) = C(y) +- C(y ^ delta)`` for
    ``y & delta == 0``.  Both tables are returned at full length, constant on
    each pair ``{y, y ^ delta}``, so that
    ``C(x) = (-1)**(delta.x) D_minus(x) + D_plus(x)`` holds everywhere.
    """
    if not isinstance(C, DyadicVector):
        C = DyadicVector.from_values(C)
    delta = bits_of(delta)
    if popcount(delta) != 1 or delta >= len(C):
        raise InvalidInput("delta must have Hamming weight one")
    minus, plus = _split_arrays(C.num, delta)
    return DyadicVector(minus, C.shift + 1), DyadicVector(plus, C.shift + 1)


def in_grid(values: DyadicVector, d_log2: int) -> bool:
    """Whether every value lies in ``{-1, -1 + d, ..., 1 - d, 1}`` with ``d = 2**d_log2``."""
    return _in_grid_num(values.num, values.shift, d_log2).all()


def _in_grid_num(num: np.ndarray, shift: int, d_log2: int) -> np.ndarray:
    one = 1 << shift
    ok = np.abs(num) <= one
    k = shift + d_log2
    if k > 0:
        ok &= ((num + one) % (1 << k)) == 0
    return ok


# ---------------------------------------------------------------------------
# Verifiers

LEMMAS = (
    "psi_homomorphism",
    "character_inversion",
    "weight_split",
    "dyadic_granularity",
    "parseval_support",
    "node_bound",
    "node_product",
    "subgroup_node_bound",
)


@dataclass
class LemmaReport:
    lemma_id: str
    instances_checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def merge(self, other: "LemmaReport") -> "LemmaReport":
        if other.lemma_id != self.lemma_id:
            raise InvalidInput("cannot merge reports for different lemmas")
        return LemmaReport(self.lemma_id, self.instances_checked + other.instances_checked,
                           self.violations + other.violations)

    def to_dict(self) -> dict:
        return {"lemma_id": self.lemma_id, "instances_checked": self.instances_checked,
                "passed": self.passed, "violations": self.violations}


def supp_bound(m: int) -> int:
    return 1 << (2 * m - 2)


def node_bound(m: int) -> int:
    return m * supp_bound(m)


class _PsiTable:
    """All ``Psi(J)`` for one permutation as integer rows ``hat[J, g] = 2**n a^J_g``."""

    def __init__(self, perm: Permutation):
        n = self.n = perm.n
        size = self.size = 1 << n
        tab = perm.table()
        J = np.arange(size)
        self.perm = perm
        self.F = 1 - 2 * parity_table(n)[tab[None, :] & J[:, None]].astype(np.int64)
        self.hat = _butterfly(self.F)
        weights = popcount_table(n)
        nz = self.hat != 0
        self.locality = np.where(nz, weights[None, :], 0).max(axis=1)
        self.node_masks = np.bitwise_or.reduce(np.where(nz, J[None, :], 0), axis=1)
        self._prod = None

    def m_eff(self, J: int) -> int:
        return max(int(self.locality[J]), 1)

    def nodes(self, J: int) -> set[int]:
        return _node_bits(self.n, [int(self.node_masks[J])])

    def products(self) -> np.ndarray:
        # direct convolution: prod[J1, J2, g] = sum_h hat[J1, h] hat[J2, h ^ g]
        if self._prod is None:
            xor = np.arange(self.size)[:, None] ^ np.arange(self.size)[None, :]
            self._prod = np.einsum("ah,bhg->abg", self.hat, self.hat[:, xor])
        return self._prod

    def describe(self, **kw) -> dict:
        out = {"perm": self.perm.to_dict()}
        out.update({k: int(v) if isinstance(v, (int, np.integer)) else v for k, v in kw.items()})
        return out


def _check_homomorphism(t: _PsiTable, rep: LemmaReport):
    size = t.size
    one = np.zeros(size, dtype=np.int64)
    one[0] = size
    rep.instances_checked += 1
    if not np.array_equal(t.hat[0], one):
        rep.violations.append(t.describe(J=0, reason="Psi(0) != 1"))
    prod = t.products()
    J = np.arange(size)
    target = size * t.hat[J[:, None] ^ J[None, :]]
    bad = np.argwhere((prod != target).any(axis=2))
    rep.instances_checked += size * size
    for j1, j2 in bad[:5]:
        g = int(np.flatnonzero(prod[j1, j2] != target[j1, j2])[0])
        rep.violations.append(t.describe(J1=j1, J2=j2, g=g, reason="Psi(J1^J2) != Psi(J1)Psi(J2)"))
    rep.instances_checked += 1
    if len({row.tobytes() for row in t.hat}) != size:
        rep.violations.append(t.describe(reason="Psi not injective"))


def _check_character_inversion(t: _PsiTable, rep: LemmaReport):
    # chi_x(Psi(J)) must reproduce F_J(x); and an element is determined by its characters
    chars = _butterfly(t.hat)
    for J in range(t.size):
        rep.instances_checked += 1
        if not np.array_equal(chars[J], t.size * t.F[J]):
            x = int(np.flatnonzero(chars[J] != t.size * t.F[J])[0])
            rep.violations.append(t.describe(J=J, x=x, reason="chi_x(Psi(J)) != F_J(x)"))
        if not np.array_equal(_butterfly(chars[J]), t.size * t.hat[J]):
            rep.violations.append(t.describe(J=J, reason="character round trip failed"))


def _check_weight_split(t: _PsiTable, rep: LemmaReport):
    n, size = t.n, t.size
    xs = np.arange(size)
    signs_of = 1 - 2 * parity_table(n)[xs[:, None] & xs[None, :]].astype(np.int64)
    for g in range(size):
        table = t.F
        shift = 0
        bits = [1 << (n - 1 - i) for i in range(n) if g >> (n - 1 - i) & 1]
        for i, delta in enumerate(bits, 1):
            minus, plus = _split_arrays(table, delta)
            rep.instances_checked += 1
            # reconstruction C = (-1)^(delta.x) D- + D+, at doubled scale
            sign = np.where(xs & delta, -1, 1)
            if not np.array_equal(sign * minus + plus, 2 * table):
                rep.violations.append(t.describe(g=g, delta=delta, reason="split does not reconstruct"))
            shift += 1
            for name, arr in (("D-", minus), ("D+", plus)):
                ok = _in_grid_num(arr, shift, 1 - i)
                if not ok.all():
                    J, x = np.argwhere(~ok)[0]
                    rep.violations.append(t.describe(J=J, x=x, g=g, delta=delta, step=i,
                                                     reason=f"{name} outside value grid"))
            table = minus
        if not bits:
            continue
        # coefficient route: D-(x) = sum_{beta & g = 0} a_{beta + g} (-1)^(beta.x)
        beta = xs[(xs & g) == 0]
        direct = t.hat[:, beta | g] @ signs_of[beta, :]
        rep.instances_checked += 1
        if not np.array_equal(direct, table << (n - shift)):
            rep.violations.append(t.describe(g=g, reason="split disagrees with coefficient sums"))


def _check_granularity(t: _PsiTable, rep: LemmaReport):
    for J in range(t.size):
        m = t.m_eff(J)
        step = 1 << (t.n - m + 1)
        rep.instances_checked += 1
        bad = np.flatnonzero(t.hat[J] % step)
        if bad.size:
            rep.violations.append(t.describe(J=J, g=int(bad[0]), m=m,
                                             reason="coefficient finer than 2^-(m-1)"))


def _check_parseval(t: _PsiTable, rep: LemmaReport):
    for J in range(t.size):
        m = t.m_eff(J)
        rep.instances_checked += 1
        if int(np.sum(t.hat[J] ** 2)) != t.size * t.size:
            rep.violations.append(t.describe(J=J, reason="sum of squared coefficients != 1"))
        count = int(np.count_nonzero(t.hat[J]))
        if count > supp_bound(m):
            rep.violations.append(t.describe(J=J, m=m, support=count, reason="support exceeds 2^(2m-2)"))


def _check_node_bound(t: _PsiTable, rep: LemmaReport):
    for J in range(t.size):
        m = t.m_eff(J)
        rep.instances_checked += 1
        k = len(t.nodes(J))
        if k > node_bound(m):
            rep.violations.append(t.describe(J=J, m=m, nodes=k, reason="nodes exceed m*2^(2m-2)"))


def _check_node_product(t: _PsiTable, rep: LemmaReport):
    n, size = t.n, t.size
    prod = t.products()
    prod_nodes = np.bitwise_or.reduce(np.where(prod != 0, np.arange(size), 0), axis=2)
    for j1 in range(size):
        for j2 in range(size):
            # Psi(J1) = a + b*g where g is a node of Psi(J1) unused by c = Psi(J2)
            cand = int(t.node_masks[j1]) & ~int(t.node_masks[j2])
            for i in range(n):
                bit = 1 << (n - 1 - i)
                if cand & bit:
                    rep.instances_checked += 1
                    if not prod_nodes[j1, j2] & bit:
                        rep.violations.append(t.describe(J1=j1, J2=j2, node=i,
                                                         reason="node lost in product"))


def _check_subgroup_nodes(t: _PsiTable, rep: LemmaReport, groups):
    for S in groups:
        S = [bits_of(J) for J in S]
        m = max(max(int(t.locality[J]) for J in S), 1)
        used = 0
        for J in S:
            used |= int(t.node_masks[J])
        rep.instances_checked += 1
        if popcount(used) > node_bound(m) ** 3:
            rep.violations.append(t.describe(S=S, m=m, reason="subgroup nodes exceed B_m^3"))


_CHECKS = {
    "psi_homomorphism": _check_homomorphism,
    "character_inversion": _check_character_inversion,
    "weight_split": _check_weight_split,
    "dyadic_granularity": _check_granularity,
    "parseval_support": _check_parseval,
    "node_bound": _check_node_bound,
    "node_product": _check_node_product,
}


def default_subgroups(n: int) -> list[list[int]]:
    """Every subgroup for ``n <= 4``; otherwise just the whole group."""
    if n <= 4:
        return subgroups(n)
    return [list(range(1 << n))]


def verify_lemma(lemma_id: str, perm: Permutation, groups: Sequence | None = None) -> LemmaReport:
    """Check one fact on every mask ``J`` for a single permutation.

    Localities are measured per ``Psi(J)`` (floored at 1).  ``groups`` only
    matters for ``subgroup_node_bound`` and defaults to :func:`default_subgroups`.
    """
    return verify_lemmas(perm, [lemma_id], groups)[lemma_id]


def verify_lemmas(perm: Permutation, lemma_ids: Sequence[str] = LEMMAS,
                  groups: Sequence | None = None) -> dict[str, LemmaReport]:
    unknown = [lid for lid in lemma_ids if lid not in LEMMAS]
    if unknown:
        raise InvalidInput(f"unknown lemma id(s): {', '.join(unknown)}; expected one of {LEMMAS}")
    if perm.n > 5:
        raise InvalidInput("lemma verification is limited to n <= 5")
    t = _PsiTable(perm)
    out = {}
    for lid in lemma_ids:
        rep = LemmaReport(lid)
        if lid == "subgroup_node_bound":
            _check_subgroup_nodes(t, rep, default_subgroups(perm.n) if groups is None else groups)
        else:
            _CHECKS[lid](t, rep)
        out[lid] = rep
    return out


def verify_suite(perms: Iterable[Permutation], lemma_ids: Sequence[str] = LEMMAS) -> dict[str, LemmaReport]:
    """Merged reports over many permutations."""
    totals = {lid: LemmaReport(lid) for lid in lemma_ids}
    groups_cache: dict[int, list] = {}
    for perm in perms:
        groups = groups_cache.setdefault(perm.n, default_subgroups(perm.n))
        for lid, rep in verify_lemmas(perm, lemma_ids, groups).items():
            totals[lid] = totals[lid].merge(rep)
    return totals
