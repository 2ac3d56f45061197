"""Bit vectors over Z_2^n, exact dyadic rationals, GF(2) linear algebra and the
fast Walsh-Hadamard transform.

Bit convention: qubit ``p`` (0-indexed, the leftmost letter of a string such
as ``"ZIII"``) is the most significant bit of the integer index.  A bit vector
of length ``n`` therefore prints with ``format(bits, "0{n}b")`` in qubit order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from numbers import Integral
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput

MAX_QUBITS = 24

_INT64_HEADROOM = 1 << 62


def check_n(n: int) -> int:
    if not isinstance(n, Integral) or not 1 <= n <= MAX_QUBITS:
        raise InvalidInput(f"number of bits must be in [1, {MAX_QUBITS}], got {n!r}")
    return int(n)


def popcount(x: int) -> int:
    return int(x).bit_count()


def parity(x: int) -> int:
    return int(x).bit_count() & 1


def dot(a: int, b: int) -> int:
    """Inner product over GF(2): parity of ``a & b``."""
    return (int(a) & int(b)).bit_count() & 1


def parity_table(n: int) -> np.ndarray:
    """``parity_table(n)[x]`` is the parity of ``x`` for every ``x < 2**n``."""
    t = np.zeros(1, dtype=np.int8)
    for _ in range(n):
        t = np.concatenate([t, t ^ 1])
    return t


def popcount_table(n: int) -> np.ndarray:
    t = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        t = np.concatenate([t, t + 1])
    return t


@dataclass(frozen=True, order=True)
class BitVector:
    """Element of Z_2^n stored as an ``n``-bit integer."""

    n: int
    bits: int

    def __post_init__(self):
        check_n(self.n)
        if not 0 <= self.bits < (1 << self.n):
            raise InvalidInput(f"bits {self.bits} out of range for n={self.n}")

    @classmethod
    def from_str(cls, s: str) -> "BitVector":
        """Parse ``"1011"`` or a Pauli-Z string such as ``"ZIZZ"``."""
        s = s.strip()
        table = str.maketrans({"I": "0", "Z": "1"})
        digits = s.upper().translate(table)
        if not digits or set(digits) - {"0", "1"}:
            raise InvalidInput(f"not a bit string: {s!r}")
        return cls(len(digits), int(digits, 2))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise InvalidInput("XOR of bit vectors with different n")
        return BitVector(self.n, self.bits ^ other.bits)

    def __int__(self) -> int:
        return self.bits

    def __index__(self) -> int:
        return self.bits

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")

    @property
    def weight(self) -> int:
        return popcount(self.bits)

    def pauli(self) -> str:
        return mask_to_pauli(self.bits, self.n)


def mask_to_pauli(mask: int, n: int) -> str:
    return format(mask, f"0{n}b").replace("0", "I").replace("1", "Z")


def bits_of(v) -> int:
    return v.bits if isinstance(v, BitVector) else int(v)


def hamming_weight(v) -> int:
    """Number of set bits (the locality of ``v``)."""
    return popcount(bits_of(v))


# ---------------------------------------------------------------------------
# Dyadic rationals


@dataclass(frozen=True)
class Dyadic:
    """Exact rational ``numerator / 2**log2_denominator``.

    Always canonical: either the exponent is zero or the numerator is odd.
    """

    numerator: int
    log2_denominator: int = 0

    def __post_init__(self):
        num, e = int(self.numerator), int(self.log2_denominator)
        if e < 0:
            num <<= -e
            e = 0
        if num == 0:
            e = 0
        else:
            tz = min((num & -num).bit_length() - 1, e)
            num >>= tz
            e -= tz
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "log2_denominator", e)

    @classmethod
    def coerce(cls, value) -> "Dyadic":
        """Convert an int, Fraction, float, ``"p/q"`` string or Dyadic exactly.

        Raises InvalidInput when the value has a non power-of-two denominator.
        """
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except (ValueError, ZeroDivisionError):
                raise InvalidInput(f"not a number: {value!r}") from None
        if isinstance(value, (bool, np.bool_)):
            raise InvalidInput("booleans are not dyadic values")
        if isinstance(value, (Integral, np.integer)):
            return cls(int(value), 0)
        if isinstance(value, (float, np.floating)):
            if not math.isfinite(value):
                raise InvalidInput(f"non-finite value {value!r}")
            value = Fraction(float(value))
        if isinstance(value, Fraction):
            den = value.denominator
            if den & (den - 1):
                raise InvalidInput(f"{value} is not dyadic (denominator {den})")
            return cls(value.numerator, den.bit_length() - 1)
        raise InvalidInput(f"cannot interpret {value!r} as a dyadic rational")

    def _align(self, other):
        other = Dyadic.coerce(other)
        e = max(self.log2_denominator, other.log2_denominator)
        return (self.numerator << (e - self.log2_denominator),
                other.numerator << (e - other.log2_denominator), e)

    def __add__(self, other):
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        a, b, e = self._align(other)
        return Dyadic(b - a, e)

    def __mul__(self, other):
        other = Dyadic.coerce(other)
        return Dyadic(self.numerator * other.numerator,
                      self.log2_denominator + other.log2_denominator)

    __rmul__ = __mul__

    def __neg__(self):
        return Dyadic(-self.numerator, self.log2_denominator)

    def __abs__(self):
        return Dyadic(abs(self.numerator), self.log2_denominator)

    def __eq__(self, other):
        try:
            other = Dyadic.coerce(other)
        except InvalidInput:
            return NotImplemented
        return (self.numerator, self.log2_denominator) == (other.numerator, other.log2_denominator)

    def __hash__(self):
        return hash(self.to_fraction())

    def __lt__(self, other):
        a, b, _ = self._align(other)
        return a < b

    def __le__(self, other):
        a, b, _ = self._align(other)
        return a <= b

    def __gt__(self, other):
        a, b, _ = self._align(other)
        return a > b

    def __ge__(self, other):
        a, b, _ = self._align(other)
        return a >= b

    def __bool__(self):
        return self.numerator != 0

    def __float__(self):
        return math.ldexp(self.numerator, -self.log2_denominator) if abs(self.numerator) < 2**1000 \
            else float(self.to_fraction())

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.log2_denominator)

    def __str__(self):
        if self.log2_denominator == 0:
            return str(self.numerator)
        return f"{self.numerator}/{1 << self.log2_denominator}"

    def __repr__(self):
        return f"Dyadic({self})"


class DyadicVector:
    """Dense vector of ``2**n`` dyadic rationals sharing one exponent.

    Entry ``i`` equals ``num[i] / 2**shift``.  Numerators live in an ``int64``
    array while they fit comfortably and fall back to Python integers
    (``object`` dtype) otherwise, so arithmetic never loses exactness.
    """

    __slots__ = ("n", "num", "shift")

    def __init__(self, num, shift: int = 0, *, n: int | None = None):
        num = _as_int_array(num)
        size = num.shape[0]
        if num.ndim != 1 or size == 0 or size & (size - 1):
            raise InvalidInput(f"vector length must be a power of two, got {size}")
        self.n = size.bit_length() - 1 if n is None else n
        if (1 << self.n) != size:
            raise InvalidInput(f"length {size} does not match n={self.n}")
        self.num, self.shift = _reduce(num, int(shift))

    @classmethod
    def from_values(cls, values: Iterable) -> "DyadicVector":
        ds = [Dyadic.coerce(v) for v in values]
        e = max((d.log2_denominator for d in ds), default=0)
        return cls(_as_int_array([d.numerator << (e - d.log2_denominator) for d in ds]), e)

    @classmethod
    def zeros(cls, n: int) -> "DyadicVector":
        return cls(np.zeros(1 << check_n(n), dtype=np.int64), 0)

    def __len__(self):
        return self.num.shape[0]

    def __getitem__(self, i) -> Dyadic:
        return Dyadic(int(self.num[i]), self.shift)

    def __iter__(self):
        for v in self.num:
            yield Dyadic(int(v), self.shift)

    def to_fractions(self) -> list[Fraction]:
        den = 1 << self.shift
        return [Fraction(int(v), den) for v in self.num]

    def to_float(self) -> np.ndarray:
        if self.num.dtype == object:
            return np.array([float(d) for d in self], dtype=float)
        return np.ldexp(self.num.astype(float), -self.shift)

    def _aligned(self, other: "DyadicVector"):
        if self.n != other.n:
            raise InvalidInput("dyadic vectors of different length")
        e = max(self.shift, other.shift)
        return _lshift(self.num, e - self.shift), _lshift(other.num, e - other.shift), e

    def __add__(self, other: "DyadicVector") -> "DyadicVector":
        a, b, e = self._aligned(other)
        return DyadicVector(_safe_binop(a, b, np.add), e)

    def __sub__(self, other: "DyadicVector") -> "DyadicVector":
        a, b, e = self._aligned(other)
        return DyadicVector(_safe_binop(a, b, np.subtract), e)

    def __neg__(self) -> "DyadicVector":
        return DyadicVector(-self.num, self.shift)

    def scale(self, c) -> "DyadicVector":
        c = Dyadic.coerce(c)
        return DyadicVector(_safe_binop(self.num, c.numerator, np.multiply),
                            self.shift + c.log2_denominator)

    def hadamard_product(self, other: "DyadicVector") -> "DyadicVector":
        """Pointwise product."""
        if self.n != other.n:
            raise InvalidInput("dyadic vectors of different length")
        return DyadicVector(_safe_binop(self.num, other.num, np.multiply),
                            self.shift + other.shift)

    def permuted(self, index: np.ndarray) -> "DyadicVector":
        """Return the vector ``v[index[i]]``."""
        return DyadicVector(self.num[np.asarray(index)], self.shift)

    def nonzero(self) -> np.ndarray:
        return np.flatnonzero(self.num != 0)

    def __eq__(self, other):
        if not isinstance(other, DyadicVector):
            return NotImplemented
        return (self.n == other.n and self.shift == other.shift
                and all(int(a) == int(b) for a, b in zip(self.num, other.num)))

    __hash__ = None

    def __repr__(self):
        return f"DyadicVector([{', '.join(str(d) for d in self)}])"


def _as_int_array(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object:
        vals = [int(v) for v in arr.ravel()]
        if all(-_INT64_HEADROOM < v < _INT64_HEADROOM for v in vals):
            return np.array(vals, dtype=np.int64).reshape(arr.shape)
        out = np.empty(arr.shape, dtype=object)
        out.ravel()[:] = vals
        return out
    if arr.dtype.kind in "iub":
        return arr.astype(np.int64)
    if arr.dtype.kind == "f":
        if not np.all(arr == np.round(arr)):
            raise InvalidInput("numerators must be integers")
        return _as_int_array(np.array([int(v) for v in arr.ravel()], dtype=object).reshape(arr.shape))
    raise InvalidInput(f"unsupported numerator dtype {arr.dtype}")


def _max_abs(num: np.ndarray) -> int:
    if num.size == 0:
        return 0
    if num.dtype == object:
        return max(abs(int(v)) for v in num.ravel())
    return int(np.abs(num).max())


def _to_object(num: np.ndarray) -> np.ndarray:
    if num.dtype == object:
        return num
    out = np.empty(num.shape, dtype=object)
    out.ravel()[:] = [int(v) for v in num.ravel()]
    return out


def _lshift(num: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return num
    if num.dtype != object and _max_abs(num) < (_INT64_HEADROOM >> k):
        return num << k
    return _to_object(num) * (1 << k)


def _safe_binop(a, b, op):
    """Apply an int64 ufunc when the result provably fits, else use Python ints."""
    ma = _max_abs(a) if isinstance(a, np.ndarray) else abs(int(a))
    mb = _max_abs(b) if isinstance(b, np.ndarray) else abs(int(b))
    bound = ma * mb if op is np.multiply else ma + mb
    a_obj = isinstance(a, np.ndarray) and a.dtype == object
    b_obj = isinstance(b, np.ndarray) and b.dtype == object
    if bound < _INT64_HEADROOM and not (a_obj or b_obj):
        return op(a, b)
    a = _to_object(a) if isinstance(a, np.ndarray) else int(a)
    b = _to_object(b) if isinstance(b, np.ndarray) else int(b)
    return _as_int_array(op(a, b))


def _reduce(num: np.ndarray, shift: int):
    if shift < 0:
        return _lshift(num, -shift), 0
    if shift == 0:
        return num, 0
    if num.dtype == object:
        acc = 0
        for v in num:
            acc |= int(v)
    else:
        acc = int(np.bitwise_or.reduce(np.abs(num))) if num.size else 0
    if acc == 0:
        return np.zeros(num.shape, dtype=np.int64) if num.dtype != object else _as_int_array(num), 0
    tz = min((acc & -acc).bit_length() - 1, shift)
    if tz == 0:
        return num, shift
    if num.dtype == object:
        return _as_int_array(np.array([int(v) >> tz for v in num], dtype=object)), shift - tz
    return num >> tz, shift - tz


# ---------------------------------------------------------------------------
# Walsh-Hadamard transform


def _butterfly(arr: np.ndarray) -> np.ndarray:
    """Unnormalized in-place-style butterfly along the last axis."""
    size = arr.shape[-1]
    lead = arr.shape[:-1]
    h = 1
    while h < size:
        a = arr.reshape(*lead, -1, 2, h)
        x = a[..., 0, :]
        y = a[..., 1, :]
        arr = np.stack([x + y, x - y], axis=-2).reshape(*lead, size)
        h *= 2
    return arr


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized transform ``y[k] = sum_x (-1)**(k.x) v[x]`` on a numeric array.

    Works along the last axis.  Integer input is transformed exactly as long as
    the result fits in ``int64``; callers needing exactness for larger values
    should go through :func:`wht`.
    """
    arr = np.asarray(values)
    size = arr.shape[-1]
    if size == 0 or size & (size - 1):
        raise InvalidInput(f"length must be a power of two, got {size}")
    return _butterfly(arr)


def wht(vec) -> DyadicVector:
    """Exact unnormalized Walsh-Hadamard transform of a dyadic vector.

    ``wht(wht(v)) == 2**n * v``.
    """
    if not isinstance(vec, DyadicVector):
        vec = DyadicVector.from_values(vec)
    num = vec.num
    if num.dtype != object and _max_abs(num) * len(vec) >= _INT64_HEADROOM:
        num = _to_object(num)
    return DyadicVector(_butterfly(num.copy()), vec.shift)


# ---------------------------------------------------------------------------
# GF(2) linear algebra.  Matrices are lists of row bitmasks; column j of an
# n-column matrix is bit ``n - 1 - j`` so rows print left to right.


def _rows_and_n(vectors: Sequence) -> tuple[list[int], int | None]:
    ns = {v.n for v in vectors if isinstance(v, BitVector)}
    if len(ns) > 1:
        raise InvalidInput(f"bit vectors of mixed length {sorted(ns)}")
    return [bits_of(v) for v in vectors], (ns.pop() if ns else None)


def echelon(rows: Sequence[int]) -> list[int]:
    """Reduced row echelon basis of the row space, pivots on the highest bit."""
    basis: list[int] = []
    for r in rows:
        r = int(r)
        for b in basis:
            r = min(r, r ^ b)
        if r:
            for i, b in enumerate(basis):
                if b ^ r < b:
                    basis[i] = b ^ r
            basis.append(r)
    basis.sort(reverse=True)
    return basis


def gf2_rank(vectors: Sequence) -> int:
    """Rank over GF(2) of a list of BitVectors (or plain ints)."""
    rows, _ = _rows_and_n(vectors)
    return len(echelon(rows))


def span(generators: Sequence) -> set:
    """XOR closure of the generators, always containing zero.

    Returns BitVectors when given BitVectors, ints otherwise.
    """
    rows, n = _rows_and_n(generators)
    basis = echelon(rows)
    if len(basis) > 20:
        raise InvalidInput("span limited to rank 20")
    elems = [0]
    for b in basis:
        elems += [e ^ b for e in elems]
    if n is None:
        return set(elems)
    return {BitVector(n, e) for e in elems}


def subgroups(n: int) -> list[list[int]]:
    """All subgroups of Z_2^n as sorted element lists (practical for n <= 4)."""
    seen = {}
    for r in range(n + 1):
        for gens in combinations(range(1, 1 << n), r):
            key = tuple(echelon(gens))
            if key not in seen:
                seen[key] = sorted(span(list(key)))
    return list(seen.values())


def mat_vec(rows: Sequence[int], x: int, n: int) -> int:
    out = 0
    for r in rows:
        out = (out << 1) | dot(r, x)
    return out


def mat_mul(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    bt = transpose(b, n)
    return [mat_vec(bt, r, n) for r in a]


def transpose(rows: Sequence[int], n: int) -> list[int]:
    out = []
    for j in range(n):
        col = 0
        for r in rows:
            col = (col << 1) | ((r >> (n - 1 - j)) & 1)
        out.append(col)
    return out


def identity_matrix(n: int) -> list[int]:
    return [1 << (n - 1 - i) for i in range(n)]


def mat_inverse(rows: Sequence[int], n: int) -> list[int]:
    """Gauss-Jordan inverse over GF(2); raises InvalidInput when singular."""
    a = [int(r) for r in rows]
    if len(a) != n:
        raise InvalidInput(f"expected {n} rows, got {len(a)}")
    inv = identity_matrix(n)
    for col in range(n):
        bit = 1 << (n - 1 - col)
        piv = next((i for i in range(col, n) if a[i] & bit), None)
        if piv is None:
            raise InvalidInput("matrix is singular over GF(2)")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        for i in range(n):
            if i != col and a[i] & bit:
                a[i] ^= a[col]
                inv[i] ^= inv[col]
    return inv
