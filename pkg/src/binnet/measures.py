"""Closed-form association measures on 2x2 contingency tables.

Cell naming follows the usual row/column layout: ``p10`` is the share of
observations where the first variable is 1 and the second is 0, ``p01``
the reverse.

Every measure is implemented once as an array kernel returning
``(values, degenerate)``.  The scalar functions evaluate the same kernel on
0-d arrays, so the pairwise engine and the scalar API agree bit for bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidCounts, InvalidProportions, UnsupportedKind, ZeroSample

SUM_TOL = 1e-12
# Marginals within this distance of 0 or 1 count as constant variables.
CONSTANT_TOL = 1e-12


class MeasureKind(enum.Enum):
    P11 = "p11"
    AGREEMENT = "agreement"
    JACCARD = "jaccard"
    SIMPSON = "simpson"
    PHI = "phi"
    CONDITIONAL = "conditional"

    @property
    def signed(self) -> bool:
        return self in (MeasureKind.PHI, MeasureKind.CONDITIONAL)

    @classmethod
    def parse(cls, name: str) -> "MeasureKind":
        key = name.strip().lower()
        aliases = {"cooccurrence": "p11", "pearson": "phi", "correlation": "phi"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown measure kind {name!r} (expected one of {valid})") from None


@dataclass(frozen=True)
class ContingencyCounts:
    n00: int
    n01: int
    n10: int
    n11: int
    n_total: int

    def __post_init__(self):
        cells = (self.n00, self.n01, self.n10, self.n11)
        if any(c < 0 for c in cells) or self.n_total < 0:
            raise InvalidCounts(f"negative count in {self}")
        if sum(cells) != self.n_total:
            raise InvalidCounts(f"cells sum to {sum(cells)}, n_total is {self.n_total}")


@dataclass(frozen=True)
class PairProportions:
    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        cells = (self.p00, self.p01, self.p10, self.p11)
        for c in cells:
            if not (0.0 <= c <= 1.0):
                raise InvalidProportions(f"cell value {c!r} outside [0, 1]")
        if abs(sum(cells) - 1.0) > SUM_TOL:
            raise InvalidProportions(f"cells sum to {sum(cells)!r}, expected 1")

    def swapped(self) -> "PairProportions":
        """The same table with the roles of the two variables exchanged."""
        return PairProportions(self.p00, self.p10, self.p01, self.p11)


@dataclass(frozen=True)
class AssociationWeight:
    i: int
    j: int
    kind: MeasureKind
    value: float
    degenerate: bool = False

    def __post_init__(self):
        if not self.i < self.j:
            raise ValueError(f"expected i < j, got ({self.i}, {self.j})")


def proportions_from_counts(c: ContingencyCounts) -> PairProportions:
    if c.n_total == 0:
        raise ZeroSample("contingency table has no observations")
    n = c.n_total
    return PairProportions(c.n00 / n, c.n01 / n, c.n10 / n, c.n11 / n)


# -- array kernels ------------------------------------------------------------
#
# Denominators of J and S are at most p11 + p01 + p10 = 1 - p00 <= 1 for a
# valid table; clamping them at 1 absorbs rounding in the cell sum so that
# p11 <= J <= S <= 1 holds exactly in floating point.

def _p11_kernel(p00, p01, p10, p11):
    p11 = np.asarray(p11, dtype=np.float64)
    return p11.copy(), np.zeros(p11.shape, dtype=bool)


def _agreement_kernel(p00, p01, p10, p11):
    v = np.asarray(p00, dtype=np.float64) + np.asarray(p11, dtype=np.float64)
    return np.minimum(v, 1.0), np.zeros(v.shape, dtype=bool)


def _jaccard_kernel(p00, p01, p10, p11):
    p11 = np.asarray(p11, dtype=np.float64)
    den = np.minimum(p11 + (np.asarray(p01, dtype=np.float64) + np.asarray(p10, dtype=np.float64)), 1.0)
    degenerate = den <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(degenerate, 0.0, p11 / np.where(degenerate, 1.0, den))
    return v, degenerate


def _simpson_kernel(p00, p01, p10, p11):
    p11 = np.asarray(p11, dtype=np.float64)
    smaller = np.minimum(np.asarray(p01, dtype=np.float64), np.asarray(p10, dtype=np.float64))
    den = np.minimum(p11 + smaller, 1.0)
    degenerate = den <= 0.0
    v = np.where(degenerate, 0.0, p11 / np.where(degenerate, 1.0, den))
    return v, degenerate


def _phi_kernel(p00, p01, p10, p11):
    p01 = np.asarray(p01, dtype=np.float64)
    p10 = np.asarray(p10, dtype=np.float64)
    p11 = np.asarray(p11, dtype=np.float64)
    mx = p10 + p11
    my = p01 + p11
    degenerate = (
        (mx <= CONSTANT_TOL) | (mx >= 1.0 - CONSTANT_TOL)
        | (my <= CONSTANT_TOL) | (my >= 1.0 - CONSTANT_TOL)
    )
    # two-factor products keep the result exactly symmetric in (p01, p10)
    var = (mx * (1.0 - mx)) * (my * (1.0 - my))
    safe = np.where(degenerate, 1.0, var)
    v = (p11 - mx * my) / np.sqrt(safe)
    v = np.where(degenerate, 0.0, np.clip(v, -1.0, 1.0))
    return v, degenerate


KERNELS: dict[MeasureKind, Callable] = {
    MeasureKind.P11: _p11_kernel,
    MeasureKind.AGREEMENT: _agreement_kernel,
    MeasureKind.JACCARD: _jaccard_kernel,
    MeasureKind.SIMPSON: _simpson_kernel,
    MeasureKind.PHI: _phi_kernel,
}


def evaluate(kind: MeasureKind, p: PairProportions) -> tuple[float, bool]:
    """Value of ``kind`` on ``p`` and whether a 0/0 convention produced it."""
    try:
        kernel = KERNELS[kind]
    except KeyError:
        raise UnsupportedKind(f"{kind.value} is not a closed-form measure") from None
    v, d = kernel(p.p00, p.p01, p.p10, p.p11)
    return float(v), bool(d)


def p11_weight(p: PairProportions) -> float:
    return evaluate(MeasureKind.P11, p)[0]


def agreement_weight(p: PairProportions) -> float:
    """Share of observations on which the two variables take the same value."""
    return evaluate(MeasureKind.AGREEMENT, p)[0]


def jaccard(p: PairProportions) -> float:
    """p11 / (p11 + p01 + p10); 0 when neither variable is ever 1."""
    return evaluate(MeasureKind.JACCARD, p)[0]


def simpson(p: PairProportions) -> float:
    """Overlap coefficient p11 / (p11 + min(p10, p01)).

    Equals 1 whenever one variable's support contains the other's and
    p11 > 0.  Returns 0 by convention when the denominator vanishes.
    """
    return evaluate(MeasureKind.SIMPSON, p)[0]


def pearson_phi(p: PairProportions) -> float:
    """Pearson correlation of two Bernoulli variables.

    A constant variable makes the formula 0/0; such pairs get 0, the same
    value as independence.
    """
    return evaluate(MeasureKind.PHI, p)[0]
