"""Three 4-qubit diagonal forms sharing one spectrum.

``sparse_local`` has four single-Z terms.  A CNOT chain relabels it into
``sparse_nonlocal`` (prefix masks).  Swapping the eigenvalues at indices
``0000`` and ``1000`` instead gives the 11-term ``dense`` form.
"""

from __future__ import annotations

from importlib import resources

from .diagform import DiagonalForm, form_of, parse_form, spectrum_of
from .perms import AffinePermutation, TablePermutation, permute_spectrum

NAMES = ("sparse_local", "sparse_nonlocal", "dense")


def sparse_local() -> DiagonalForm:
    return DiagonalForm.from_paulis({"ZIII": 1, "IZII": 1, "IIZI": 1, "IIIZ": 1})


def sparse_nonlocal() -> DiagonalForm:
    return DiagonalForm.from_paulis({"ZIII": 1, "ZZII": 1, "ZZZI": 1, "ZZZZ": 1})


def cnot_chain(n: int = 4) -> AffinePermutation:
    """``x -> (x0, x0^x1, x1^x2, ...)``; conjugation maps single-Z masks to prefix masks."""
    rows = [1 << (n - 1)] + [(0b11 << (n - 2 - i)) for i in range(n - 1)]
    return AffinePermutation(n, tuple(rows), 0)


def first_two_swap(n: int = 4) -> TablePermutation:
    """Transposition of indices ``0`` and ``2**(n-1)``."""
    table = list(range(1 << n))
    top = 1 << (n - 1)
    table[0], table[top] = top, 0
    return TablePermutation(tuple(table))


def dense() -> DiagonalForm:
    return form_of(permute_spectrum(first_two_swap(), spectrum_of(sparse_local())))


def build() -> dict[str, DiagonalForm]:
    return {"sparse_local": sparse_local(), "sparse_nonlocal": sparse_nonlocal(), "dense": dense()}


def shipped(name: str) -> DiagonalForm:
    """Load a packaged fixture (``<name>.json``)."""
    if name not in NAMES:
        raise KeyError(name)
    return parse_form(resources.files("diagloc.data").joinpath(f"{name}.json").read_text())
