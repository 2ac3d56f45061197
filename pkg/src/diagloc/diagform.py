"""Diagonal Pauli-Z forms, their eigenvalue spectra, and sparsity metrics.

A diagonal form ``D = sum_t gamma_t Z^t`` and its spectrum ``lambda`` are
Walsh-Hadamard duals::

    lambda_x = sum_t gamma_t (-1)**(t.x)
    gamma_t  = 2**-n sum_x (-1)**(t.x) lambda_x

Exact mode keeps every coefficient as a :class:`~diagloc.algebra.Dyadic`;
float mode uses ``float64`` with a relative zero threshold of ``EPS_ZERO``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .algebra import (
    Dyadic,
    DyadicVector,
    _butterfly,
    bits_of,
    check_n,
    mask_to_pauli,
    popcount,
    wht,
)
from .errors import InvalidInput

EPS_ZERO = 1e-12
EXACT = "exact"
FLOAT = "float"


class DiagonalForm:
    """Sparse map from Z-string mask to coefficient.

    Zero coefficients are dropped on construction (exactly in exact mode,
    relative to the largest magnitude in float mode).
    """

    __slots__ = ("n", "terms", "mode")

    def __init__(self, n: int, terms: Mapping, mode: str = EXACT):
        self.n = check_n(n)
        if mode not in (EXACT, FLOAT):
            raise InvalidInput(f"unknown mode {mode!r}")
        self.mode = mode
        clean = {}
        for mask, c in terms.items():
            mask = bits_of(mask)
            if not 0 <= mask < (1 << n):
                raise InvalidInput(f"mask {mask} out of range for n={n}")
            clean[mask] = Dyadic.coerce(c) if mode == EXACT else float(c)
        if mode == EXACT:
            clean = {k: v for k, v in clean.items() if v}
        else:
            scale = max((abs(v) for v in clean.values()), default=0.0)
            clean = {k: v for k, v in clean.items() if abs(v) > EPS_ZERO * scale}
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def from_paulis(cls, terms: Mapping[str, object], mode: str = EXACT) -> "DiagonalForm":
        """Build from ``{"ZIII": 1, ...}``; repeated strings are not allowed."""
        if not terms:
            raise InvalidInput("need at least one term to infer n")
        n = len(next(iter(terms)))
        out = {}
        for s, c in terms.items():
            if len(s) != n or set(s) - {"I", "Z"}:
                raise InvalidInput(f"bad Pauli-Z string {s!r}")
            out[int(s.replace("I", "0").replace("Z", "1"), 2)] = c
        return cls(n, out, mode)

    def __eq__(self, other):
        if not isinstance(other, DiagonalForm):
            return NotImplemented
        return (self.n, self.mode, self.terms) == (other.n, other.mode, other.terms)

    __hash__ = None

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        body = " + ".join(f"{c}*{mask_to_pauli(t, self.n)}" for t, c in self.terms.items())
        return f"DiagonalForm(n={self.n}, {self.mode}: {body or '0'})"

    def dense(self):
        """Dense coefficient vector indexed by mask."""
        if self.mode == EXACT:
            vals = [Dyadic(0)] * (1 << self.n)
            for t, c in self.terms.items():
                vals[t] = c
            return DyadicVector.from_values(vals)
        vec = np.zeros(1 << self.n)
        for t, c in self.terms.items():
            vec[t] = c
        return vec

    def to_float(self) -> "DiagonalForm":
        return DiagonalForm(self.n, {t: float(c) for t, c in self.terms.items()}, FLOAT)

    def max_abs_off(self, m: int) -> float:
        """Sum of ``|gamma_t|`` over masks with weight above ``m``."""
        return float(sum(abs(float(c)) for t, c in self.terms.items() if popcount(t) > m))


class Spectrum:
    """Dense eigenvalue vector of length ``2**n`` (DyadicVector or float array)."""

    __slots__ = ("n", "values")

    def __init__(self, values, n: int | None = None):
        if isinstance(values, DyadicVector):
            self.values = values
        else:
            arr = np.asarray(values)
            if arr.dtype.kind in "iu" or arr.dtype == object:
                self.values = DyadicVector.from_values(arr.tolist())
            else:
                self.values = arr.astype(float)
        size = len(self.values)
        if size == 0 or size & (size - 1):
            raise InvalidInput(f"spectrum length must be a power of two, got {size}")
        self.n = check_n(size.bit_length() - 1)
        if n is not None and n != self.n:
            raise InvalidInput(f"spectrum length {size} does not match n={n}")

    @classmethod
    def exact(cls, values) -> "Spectrum":
        return cls(DyadicVector.from_values(values))

    @property
    def mode(self) -> str:
        return EXACT if isinstance(self.values, DyadicVector) else FLOAT

    def as_float(self) -> np.ndarray:
        if isinstance(self.values, DyadicVector):
            return self.values.to_float()
        return self.values

    def sorted_values(self) -> list:
        if isinstance(self.values, DyadicVector):
            return sorted(self.values.to_fractions())
        return sorted(self.values.tolist())

    def permuted(self, index) -> "Spectrum":
        """Spectrum whose entry ``x`` is ``self[index[x]]``."""
        index = np.asarray(index)
        if isinstance(self.values, DyadicVector):
            return Spectrum(self.values.permuted(index))
        return Spectrum(self.values[index])

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        if self.mode != other.mode:
            return False
        if self.mode == EXACT:
            return self.values == other.values
        return bool(np.array_equal(self.values, other.values))

    __hash__ = None

    def __repr__(self):
        if self.mode == EXACT:
            return f"Spectrum([{', '.join(str(v) for v in self.values)}])"
        return f"Spectrum({self.values.tolist()!r})"


@dataclass(frozen=True)
class FormMetrics:
    nnz: int
    locality: int
    entropy: float
    nnz_lower_bound: float

    def to_dict(self) -> dict:
        return {"nnz": self.nnz, "locality": self.locality,
                "entropy": self.entropy, "nnz_lower_bound": self.nnz_lower_bound}


# ---------------------------------------------------------------------------
# Duality


def spectrum_of(form: DiagonalForm) -> Spectrum:
    """Eigenvalues ``lambda_x = sum_t gamma_t (-1)**(t.x)``."""
    if form.mode == EXACT:
        return Spectrum(wht(form.dense()))
    return Spectrum(_butterfly(form.dense()))


def form_of(spectrum: Spectrum) -> DiagonalForm:
    """Coefficients ``gamma_t = 2**-n sum_x (-1)**(t.x) lambda_x``, zeros dropped."""
    n = spectrum.n
    if spectrum.mode == EXACT:
        g = wht(spectrum.values)
        g = DyadicVector(g.num, g.shift + n)
        return DiagonalForm(n, {int(t): g[t] for t in g.nonzero()}, EXACT)
    g = _butterfly(spectrum.values.astype(float)) / (1 << n)
    return DiagonalForm(n, {int(t): g[t] for t in np.flatnonzero(g)}, FLOAT)


# ---------------------------------------------------------------------------
# Metrics


def nnz(form: DiagonalForm) -> int:
    return len(form.terms)


def locality(form: DiagonalForm) -> int:
    """Largest Hamming weight of a mask with a nonzero coefficient."""
    return max((popcount(t) for t in form.terms), default=0)


def _entropy_of(values: np.ndarray) -> float:
    sq = np.square(np.asarray(values, dtype=float))
    total = sq.sum()
    if total == 0:
        raise InvalidInput("entropy of an all-zero vector is undefined")
    p = sq[sq > 0] / total
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _entropy_exact(values) -> float:
    # squares are exact integers over a shared power of two; only the final
    # probabilities are rounded
    ds = [Dyadic.coerce(v) for v in values]
    e = max((d.log2_denominator for d in ds), default=0)
    sq = [(d.numerator << (e - d.log2_denominator)) ** 2 for d in ds]
    total = sum(sq)
    if total == 0:
        raise InvalidInput("entropy of an all-zero vector is undefined")
    p = np.array([float(Fraction(v, total)) for v in sq if v])
    return float(max(0.0, -np.sum(p * np.log2(p))))


def shannon_entropy(spectrum) -> float:
    """Entropy in bits of ``p_k = lambda_k**2 / sum_r lambda_r**2``."""
    if isinstance(spectrum, Spectrum):
        spectrum = spectrum.values
    if isinstance(spectrum, DyadicVector):
        return _entropy_exact(spectrum)
    return _entropy_of(spectrum)


def coefficient_entropy(form: DiagonalForm) -> float:
    """Entropy of the normalized squared coefficient vector of ``form``."""
    if form.mode == EXACT:
        return _entropy_exact(form.terms.values())
    return _entropy_of(list(form.terms.values()))


def nnz_lower_bound(spectrum: Spectrum) -> float:
    """``2**(n - h(lambda))``: a lower bound on ``nnz(form_of(pi lambda))`` for every ``pi``."""
    return float(2.0 ** (spectrum.n - shannon_entropy(spectrum)))


def uncertainty_check(spectrum: Spectrum, form: DiagonalForm) -> float:
    """Slack ``h(lambda) + h(gamma) - n``; nonnegative up to rounding."""
    return shannon_entropy(spectrum) + coefficient_entropy(form) - spectrum.n


def metrics(form: DiagonalForm) -> FormMetrics:
    if not form.terms:
        return FormMetrics(0, 0, 0.0, 0.0)
    spec = spectrum_of(form)
    return FormMetrics(nnz(form), locality(form), shannon_entropy(spec), nnz_lower_bound(spec))


# ---------------------------------------------------------------------------
# Serialization


def _parse_mask(text: str, n: int | None, where: str) -> tuple[int, int]:
    s = text.strip().upper()
    if not s or set(s) - {"I", "Z"}:
        raise InvalidInput(f"{where}: bad mask {text!r}")
    if n is not None and len(s) != n:
        raise InvalidInput(f"{where}: mask {text!r} has length {len(s)}, expected {n}")
    return int(s.replace("I", "0").replace("Z", "1"), 2), len(s)


def _check_terms(pairs, n, mode):
    terms = {}
    for where, mask, coeff in pairs:
        if mask in terms:
            raise InvalidInput(f"{where}: duplicate mask {mask_to_pauli(mask, n)}")
        terms[mask] = coeff
    return DiagonalForm(n, terms, mode)


def form_to_dict(form: DiagonalForm) -> dict:
    terms = []
    for t, c in form.terms.items():
        entry = {"mask": mask_to_pauli(t, form.n)}
        if form.mode == EXACT:
            entry.update(num=c.numerator, log2den=c.log2_denominator)
        else:
            entry["value"] = c
        terms.append(entry)
    return {"n": form.n, "mode": form.mode, "terms": terms}


def form_from_dict(doc: dict) -> DiagonalForm:
    if not isinstance(doc, dict):
        raise InvalidInput("form document must be a JSON object")
    try:
        n = check_n(doc["n"])
    except KeyError:
        raise InvalidInput("form document missing field 'n'") from None
    mode = doc.get("mode", EXACT)
    if mode not in (EXACT, FLOAT):
        raise InvalidInput(f"field 'mode': unknown mode {mode!r}")
    pairs = []
    for i, entry in enumerate(doc.get("terms", [])):
        where = f"terms[{i}]"
        if not isinstance(entry, dict) or "mask" not in entry:
            raise InvalidInput(f"{where}: expected object with 'mask'")
        mask, _ = _parse_mask(str(entry["mask"]), n, where)
        if mode == EXACT:
            if "num" in entry:
                num, den = entry["num"], entry.get("log2den", 0)
                if not isinstance(num, int) or not isinstance(den, int) or den < 0:
                    raise InvalidInput(f"{where}: 'num'/'log2den' must be integers")
                coeff = Dyadic(num, den)
            elif "value" in entry:
                try:
                    coeff = Dyadic.coerce(entry["value"] if not isinstance(entry["value"], float)
                                          else str(entry["value"]))
                except InvalidInput as exc:
                    raise InvalidInput(f"{where}: {exc}") from None
            else:
                raise InvalidInput(f"{where}: missing coefficient")
        else:
            val = entry.get("value")
            if val is None and "num" in entry:
                val = float(Dyadic(entry["num"], entry.get("log2den", 0)))
            if not isinstance(val, (int, float)):
                raise InvalidInput(f"{where}: 'value' must be a number")
            coeff = float(val)
        pairs.append((where, mask, coeff))
    return _check_terms(pairs, n, mode)


def serialize_form(form: DiagonalForm, fmt: str = "json") -> str:
    """Render as JSON (default) or as ``coeff MASK`` lines."""
    if fmt == "json":
        return json.dumps(form_to_dict(form), indent=1) + "\n"
    if fmt != "text":
        raise InvalidInput(f"unknown form format {fmt!r}")
    lines = [f"# n={form.n} mode={form.mode}"]
    for t, c in form.terms.items():
        lines.append(f"{c if form.mode == EXACT else repr(c)} {mask_to_pauli(t, form.n)}")
    return "\n".join(lines) + "\n"


def parse_form(text: str) -> DiagonalForm:
    """Parse either serialization; the format is detected from the first character."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
        return form_from_dict(doc)
    n = None
    mode = EXACT
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            for tok in line[1:].split():
                key, _, val = tok.partition("=")
                if key == "n":
                    n = check_n(int(val))
                elif key == "mode":
                    if val not in (EXACT, FLOAT):
                        raise InvalidInput(f"line {lineno}: unknown mode {val!r}")
                    mode = val
            continue
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidInput(f"line {lineno}: expected 'coeff MASK', got {raw!r}")
        where = f"line {lineno}"
        mask, width = _parse_mask(parts[1], n, where)
        n = width if n is None else n
        if mode == EXACT:
            try:
                coeff = Dyadic.coerce(parts[0])
            except InvalidInput as exc:
                raise InvalidInput(f"{where}: {exc}") from None
        else:
            try:
                coeff = float(parts[0])
            except ValueError:
                raise InvalidInput(f"{where}: bad coefficient {parts[0]!r}") from None
        pairs.append((where, mask, coeff))
    if n is None:
        raise InvalidInput("empty form file without '# n=' header")
    return _check_terms(pairs, n, mode)


def _json_number(d: Dyadic):
    return d.numerator if d.log2_denominator == 0 else str(d)


def serialize_spectrum(spectrum: Spectrum, fmt: str = "json") -> str:
    """JSON array (exact non-integers as ``"p/q"`` strings) or ``index,value`` CSV."""
    if spectrum.mode == EXACT:
        vals = [_json_number(d) for d in spectrum.values]
    else:
        vals = [float(v) for v in spectrum.values]
    if fmt == "json":
        return json.dumps(vals) + "\n"
    if fmt != "csv":
        raise InvalidInput(f"unknown spectrum format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "value"])
    for i, v in enumerate(vals):
        w.writerow([i, repr(v) if isinstance(v, float) else v])
    return buf.getvalue()


def _spectrum_from_list(vals, where="spectrum") -> Spectrum:
    if not vals:
        raise InvalidInput(f"{where}: empty")
    if any(isinstance(v, float) for v in vals):
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidInput(f"{where}[{i}]: non-numeric entry {v!r}")
        arr = np.array(vals, dtype=float)
        if not np.all(np.isfinite(arr)):
            i = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InvalidInput(f"{where}[{i}]: non-finite entry")
        return Spectrum(arr)
    out = []
    for i, v in enumerate(vals):
        try:
            out.append(Dyadic.coerce(v))
        except InvalidInput as exc:
            raise InvalidInput(f"{where}[{i}]: {exc}") from None
    return Spectrum(DyadicVector.from_values(out))


def parse_spectrum(text: str) -> Spectrum:
    """Parse a JSON array or an ``index,value`` CSV.

    Integers and ``"p/q"`` strings give an exact spectrum; any JSON float (or
    CSV decimal) gives a float spectrum.
    """
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            vals = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(vals, list):
            raise InvalidInput("spectrum JSON must be an array")
        return _spectrum_from_list(vals)
    rows = list(csv.reader(io.StringIO(stripped)))
    first = 1
    if rows and rows[0] and rows[0][0].strip().lower() == "index":
        rows, first = rows[1:], 2
    values = {}
    for lineno, row in enumerate(rows, first):
        if len(row) != 2:
            raise InvalidInput(f"line {lineno}: expected 'index,value'")
        try:
            idx = int(row[0])
        except ValueError:
            raise InvalidInput(f"line {lineno}: bad index {row[0]!r}") from None
        if idx in values:
            raise InvalidInput(f"line {lineno}: duplicate index {idx}")
        s = row[1].strip()
        try:
            values[idx] = int(s) if s.lstrip("+-").isdigit() else (s if "/" in s else float(s))
        except ValueError:
            raise InvalidInput(f"line {lineno}: bad value {s!r}") from None
    if sorted(values) != list(range(len(values))):
        raise InvalidInput("CSV spectrum indices must be 0..N-1")
    return _spectrum_from_list([values[i] for i in range(len(values))])

