"""The nested counting bounds ``A_m -> B_m -> D_m -> E_m -> G_m`` and a
comparison against Bekenstein-Hawking entropies.

``G_m = (2**m + 1)**E_m`` cannot be materialized beyond tiny ``m``, so it is
carried as the exact exponent ``E_m`` plus ``log2(G_m)`` in extended precision.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath

from .errors import InvalidInput

MAX_M = 64

# CODATA 2018
GRAVITATIONAL_CONSTANT = 6.67430e-11  # m^3 kg^-1 s^-2
HBAR = 1.054571817e-34  # J s
SPEED_OF_LIGHT = 2.99792458e8  # m / s
SOLAR_MASS = 1.989e30  # kg

# where the neutron star / black hole transition is expected to fall among the m values
REFERENCE_TRANSITION = (7, 8)
TRANSITION_LABEL = "ns_bh_transition"

_PREC_BITS = 120


@dataclass(frozen=True)
class BoundChain:
    m: int
    A: int
    B: int
    D: int
    E: int
    log2_G: mpmath.mpf = field(compare=False)

    @property
    def G(self) -> int:
        """``G_m`` itself; only available while it stays small."""
        if self.E.bit_length() > 24:
            raise InvalidInput(f"G_{self.m} is far too large to materialize")
        return (2 ** self.m + 1) ** self.E

    def row(self) -> list:
        return [self.m, self.A, self.B, self.D, self.E.bit_length(), format_log2(self.log2_G)]


BOUNDS_HEADER = ["m", "A", "B", "D", "E_bitlength", "log2_G"]


def format_log2(x) -> str:
    return mpmath.nstr(x, 17, min_fixed=-3, max_fixed=18)


def bound_chain(m: int) -> BoundChain:
    """``A = 2^(2m-2)``, ``B = m A``, ``D = B^3``, ``E = D^m``, ``log2 G = E log2(2^m + 1)``."""
    if not isinstance(m, int) or not 1 <= m <= MAX_M:
        raise InvalidInput(f"m must be an integer in [1, {MAX_M}], got {m!r}")
    A = 1 << (2 * m - 2)
    B = m * A
    D = B ** 3
    E = D ** m
    with mpmath.workprec(_PREC_BITS):
        log2_G = mpmath.mpf(E) * mpmath.log(2 ** m + 1, 2)
    return BoundChain(m, A, B, D, E, log2_G)


def closed_form_exponent(m: int) -> int:
    """``m^(3m) * 64^(m^2 - m)``."""
    return m ** (3 * m) * 64 ** (m * m - m)


def gm_closed_form_check(m: int) -> bool:
    """Whether the composed chain's exponent equals the closed form exactly."""
    return bound_chain(m).E == closed_form_exponent(m)


def bh_entropy_bits(mass_kg: float) -> float:
    """Bekenstein-Hawking entropy ``4 pi G M^2 / (hbar c ln 2)`` in bits."""
    if not mass_kg > 0 or not math.isfinite(mass_kg):
        raise InvalidInput(f"mass must be positive and finite, got {mass_kg!r}")
    return 4 * math.pi * GRAVITATIONAL_CONSTANT * mass_kg ** 2 / (HBAR * SPEED_OF_LIGHT * math.log(2))


@dataclass(frozen=True)
class CosmicRow:
    label: str
    mass_kg: float
    entropy_bits: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "entropy_bits", bh_entropy_bits(self.mass_kg))


DEFAULT_MASSES = (
    ("earth", 5.972e24),
    ("sun", SOLAR_MASS),
    ("neutron_star", 1.4 * SOLAR_MASS),
    (TRANSITION_LABEL, 3.0 * SOLAR_MASS),
    ("stellar_black_hole", 10.0 * SOLAR_MASS),
    ("sgr_a_star", 4.3e6 * SOLAR_MASS),
    ("m87_star", 6.5e9 * SOLAR_MASS),
    ("observable_universe", 1.5e53),
)


@dataclass
class CosmicTable:
    chains: list[BoundChain]
    rows: list[CosmicRow]
    first_m: dict[str, int | None]
    notes: list[str]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "mass_kg", "entropy_bits", "first_m_exceeding"])
        for r in self.rows:
            fm = self.first_m[r.label]
            w.writerow([r.label, repr(r.mass_kg), repr(r.entropy_bits), "" if fm is None else fm])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "bounds": [dict(zip(BOUNDS_HEADER, c.row())) for c in self.chains],
            "masses": [{"label": r.label, "mass_kg": r.mass_kg, "entropy_bits": r.entropy_bits,
                        "first_m_exceeding": self.first_m[r.label]} for r in self.rows],
            "notes": self.notes,
        }


def cosmic_table(m_range: Sequence[int], masses: Sequence = DEFAULT_MASSES) -> CosmicTable:
    """For each mass, the smallest ``m`` whose ``log2 G_m`` exceeds its entropy.

    ``masses`` holds ``(label, kg)`` pairs or :class:`CosmicRow` values.  When
    the row labelled ``ns_bh_transition`` crosses outside
    ``REFERENCE_TRANSITION`` a note records the difference.
    """
    chains = [bound_chain(m) for m in m_range]
    rows = [r if isinstance(r, CosmicRow) else CosmicRow(str(r[0]), float(r[1])) for r in masses]
    first_m = {}
    for r in rows:
        first_m[r.label] = next((c.m for c in chains if c.log2_G > r.entropy_bits), None)
    notes = []
    fm = first_m.get(TRANSITION_LABEL)
    if fm is not None and fm != REFERENCE_TRANSITION[1]:
        lo, hi = REFERENCE_TRANSITION
        notes.append(
            f"{TRANSITION_LABEL}: computed crossing lies between m={fm - 1} and m={fm}; "
            f"the reference comparison places it between m={lo} and m={hi}. "
            "Constants are not tuned to match.")
    return CosmicTable(chains, rows, first_m, notes)


def bounds_csv(chains: Sequence[BoundChain], with_e: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOUNDS_HEADER + (["E"] if with_e else []))
    for c in chains:
        w.writerow(c.row() + ([c.E] if with_e else []))
    return buf.getvalue()
