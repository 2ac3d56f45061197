"""Permutations of Z_2^n and their action on spectra and diagonal forms.

Two representations share one interface: an explicit lookup table, and an
affine GF(2) map ``x -> A x ^ b``.  Affine maps are what CNOT/NOT circuits
implement; they relabel Z-strings instead of mixing them, and they scale to
``n = 24`` where tables do not.

A permutation acts on a spectrum as a matrix on a column vector:
``(pi lam)[x] = lam[pi^-1(x)]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    MAX_QUBITS,
    BitVector,
    bits_of,
    check_n,
    dot,
    gf2_rank,
    identity_matrix,
    mat_inverse,
    mat_mul,
    mat_vec,
    transpose,
)
from .diagform import DiagonalForm, Spectrum, form_of, spectrum_of
from .errors import InvalidInput

MAX_TABLE_QUBITS = 12


class Permutation:
    """Bijection on ``range(2**n)``."""

    n: int

    def apply(self, x):
        raise NotImplementedError

    def table(self) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "Permutation":
        raise NotImplementedError

    def __call__(self, x):
        return self.apply(x)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.table(), np.arange(1 << self.n)))


@dataclass(frozen=True, eq=False)
class TablePermutation(Permutation):
    """Explicit permutation: ``apply(x) == map[x]``."""

    map: tuple[int, ...]
    n: int = field(init=False)

    def __post_init__(self):
        size = len(self.map)
        if size == 0 or size & (size - 1):
            raise InvalidInput(f"table length must be a power of two, got {size}")
        object.__setattr__(self, "n", check_n(size.bit_length() - 1))
        object.__setattr__(self, "map", tuple(int(v) for v in self.map))
        if sorted(self.map) != list(range(size)):
            raise InvalidInput("table is not a bijection on [0, 2**n)")

    def apply(self, x):
        y = self.map[bits_of(x)]
        return BitVector(self.n, y) if isinstance(x, BitVector) else y

    def table(self) -> np.ndarray:
        return np.array(self.map, dtype=np.int64)

    def inverse(self) -> "TablePermutation":
        inv = np.empty(len(self.map), dtype=np.int64)
        inv[self.table()] = np.arange(len(self.map))
        return TablePermutation(tuple(inv.tolist()))

    def to_dict(self) -> dict:
        return {"kind": "table", "map": list(self.map)}

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.table(), other.table())

    __hash__ = None


@dataclass(frozen=True, eq=False)
class AffinePermutation(Permutation):
    """``x -> A x ^ b`` over GF(2); ``A`` is a tuple of row bitmasks.

    Row ``i`` of ``A`` computes output qubit ``i`` (bit ``n - 1 - i``).
    """

    n: int
    A: tuple[int, ...]
    b: int = 0

    def __post_init__(self):
        check_n(self.n)
        object.__setattr__(self, "A", tuple(int(r) for r in self.A))
        object.__setattr__(self, "b", bits_of(self.b))
        if len(self.A) != self.n or any(not 0 <= r < (1 << self.n) for r in self.A):
            raise InvalidInput(f"A must have {self.n} rows of {self.n} bits")
        if gf2_rank(list(self.A)) != self.n:
            raise InvalidInput("A is not invertible over GF(2)")
        if not 0 <= self.b < (1 << self.n):
            raise InvalidInput("b out of range")

    @classmethod
    def identity(cls, n: int) -> "AffinePermutation":
        return cls(n, tuple(identity_matrix(n)), 0)

    @classmethod
    def from_strings(cls, rows, b: str | None = None) -> "AffinePermutation":
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise InvalidInput("A must be square")
        bv = int(b, 2) if b else 0
        if b and len(b) != n:
            raise InvalidInput(f"b must have {n} bits")
        return cls(n, tuple(int(r, 2) for r in rows), bv)

    def apply(self, x):
        y = mat_vec(self.A, bits_of(x), self.n) ^ self.b
        return BitVector(self.n, y) if isinstance(x, BitVector) else y

    def table(self) -> np.ndarray:
        if self.n > MAX_TABLE_QUBITS + 8:
            raise InvalidInput(f"table of an n={self.n} permutation is too large")
        xs = np.arange(1 << self.n, dtype=np.int64)
        out = np.full(xs.shape, self.b, dtype=np.int64)
        for j in range(self.n):
            # column j of A is the image of the basis vector for qubit j
            col = mat_vec(self.A, 1 << (self.n - 1 - j), self.n)
            out ^= np.where((xs >> (self.n - 1 - j)) & 1, col, 0)
        return out

    def inverse(self) -> "AffinePermutation":
        inv = mat_inverse(self.A, self.n)
        return AffinePermutation(self.n, tuple(inv), mat_vec(inv, self.b, self.n))

    def to_dict(self) -> dict:
        return {"kind": "affine",
                "A": [format(r, f"0{self.n}b") for r in self.A],
                "b": format(self.b, f"0{self.n}b")}

    def __eq__(self, other):
        if isinstance(other, AffinePermutation):
            return (self.n, self.A, self.b) == (other.n, other.A, other.b)
        if isinstance(other, Permutation):
            return self.n == other.n and np.array_equal(self.table(), other.table())
        return NotImplemented

    __hash__ = None


def permutation_from_dict(doc: dict) -> Permutation:
    if not isinstance(doc, dict):
        raise InvalidInput("permutation document must be a JSON object")
    kind = doc.get("kind")
    if kind == "table":
        if not isinstance(doc.get("map"), list):
            raise InvalidInput("field 'map': expected a list")
        return TablePermutation(tuple(doc["map"]))
    if kind == "affine":
        rows = doc.get("A")
        if not isinstance(rows, list) or not all(isinstance(r, str) for r in rows):
            raise InvalidInput("field 'A': expected a list of bit strings")
        try:
            return AffinePermutation.from_strings(rows, doc.get("b"))
        except ValueError as exc:
            raise InvalidInput(f"affine permutation: {exc}") from None
    raise InvalidInput(f"field 'kind': unknown permutation kind {kind!r}")


def parse_permutation(text: str) -> Permutation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    return permutation_from_dict(doc)


def apply(perm: Permutation, x):
    return perm.apply(x)


def invert(perm: Permutation) -> Permutation:
    return perm.inverse()


def compose(p: Permutation, q: Permutation) -> Permutation:
    """``compose(p, q)(x) == p(q(x))``; stays affine when both are affine."""
    if p.n != q.n:
        raise InvalidInput("cannot compose permutations of different n")
    if isinstance(p, AffinePermutation) and isinstance(q, AffinePermutation):
        # p(q(x)) = Ap (Aq x ^ bq) ^ bp
        A = mat_mul(p.A, q.A, p.n)
        return AffinePermutation(p.n, tuple(A), mat_vec(p.A, q.b, p.n) ^ p.b)
    return TablePermutation(tuple(p.table()[q.table()].tolist()))


def permute_spectrum(perm: Permutation, spectrum: Spectrum) -> Spectrum:
    """``(pi lam)[x] = lam[pi^-1(x)]``."""
    if perm.n != spectrum.n:
        raise InvalidInput("permutation and spectrum differ in n")
    return spectrum.permuted(perm.inverse().table())


def conjugate_form(perm: Permutation, form: DiagonalForm) -> DiagonalForm:
    """The form of ``pi D pi^dagger``.

    Affine maps use the closed form ``gamma'_k = (-1)**(k.b) gamma[A^T k]``:
    each old mask ``t`` moves to ``A^-T t``.  Tables go through the spectrum.
    """
    if perm.n != form.n:
        raise InvalidInput("permutation and form differ in n")
    if isinstance(perm, AffinePermutation):
        inv_t = transpose(mat_inverse(perm.A, perm.n), perm.n)
        terms = {}
        for t, c in form.terms.items():
            k = mat_vec(inv_t, t, perm.n)
            terms[k] = -c if dot(k, perm.b) else c
        return DiagonalForm(form.n, terms, form.mode)
    return form_of(permute_spectrum(perm, spectrum_of(form)))


def random_permutation(n: int, seed) -> TablePermutation:
    """Uniform table permutation (Fisher-Yates through numpy)."""
    if not 1 <= n <= MAX_TABLE_QUBITS:
        raise InvalidInput(f"explicit permutations limited to n <= {MAX_TABLE_QUBITS}")
    rng = np.random.default_rng(seed)
    return TablePermutation(tuple(rng.permutation(1 << n).tolist()))


def random_affine(n: int, seed) -> AffinePermutation:
    """Random invertible ``A`` (rejection sampling on rank) and uniform ``b``."""
    if not 1 <= n <= MAX_QUBITS:
        raise InvalidInput(f"n must be in [1, {MAX_QUBITS}]")
    rng = np.random.default_rng(seed)
    while True:
        rows = [int(r) for r in rng.integers(0, 1 << n, size=n)]
        if gf2_rank(rows) == n:
            break
    return AffinePermutation(n, tuple(rows), int(rng.integers(0, 1 << n)))

