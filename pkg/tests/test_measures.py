from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binnet.errors import InvalidCounts, InvalidProportions, UnsupportedKind, ZeroSample
from binnet.measures import (
    KERNELS,
    AssociationWeight,
    ContingencyCounts,
    MeasureKind,
    PairProportions,
    agreement_weight,
    evaluate,
    jaccard,
    p11_weight,
    pearson_phi,
    proportions_from_counts,
    simpson,
)

from conftest import random_tables


def P(*cells):
    return PairProportions(*cells)


@st.composite
def tables(draw):
    raw = [draw(st.integers(0, 1000)) for _ in range(4)]
    if sum(raw) == 0:
        raw[0] = 1
    total = sum(raw)
    n00, n01, n10, n11 = raw
    return proportions_from_counts(ContingencyCounts(n00, n01, n10, n11, total))


# -- proportions -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "counts, expected",
    [
        ((2, 0, 0, 2, 4), (0.5, 0, 0, 0.5)),
        ((0, 0, 0, 5, 5), (0, 0, 0, 1)),
        ((1, 1, 1, 1, 4), (0.25, 0.25, 0.25, 0.25)),
    ],
)
def test_proportions_from_counts(counts, expected):
    p = proportions_from_counts(ContingencyCounts(*counts))
    assert (p.p00, p.p01, p.p10, p.p11) == expected


def test_zero_sample():
    with pytest.raises(ZeroSample):
        proportions_from_counts(ContingencyCounts(0, 0, 0, 0, 0))


def test_counts_validation():
    with pytest.raises(InvalidCounts):
        ContingencyCounts(1, 1, 1, 1, 5)
    with pytest.raises(InvalidCounts):
        ContingencyCounts(-1, 1, 1, 1, 2)


@pytest.mark.parametrize("cells", [(0.5, 0.5, 0.5, 0.0), (-0.1, 0.5, 0.3, 0.3), (1.2, 0, 0, -0.2)])
def test_proportions_validation(cells):
    with pytest.raises(InvalidProportions):
        PairProportions(*cells)


def test_association_weight_orders_indices():
    AssociationWeight(0, 1, MeasureKind.JACCARD, 0.5)
    with pytest.raises(ValueError):
        AssociationWeight(2, 1, MeasureKind.JACCARD, 0.5)


# -- worked values ---------------------------------------------------------------------------


def test_p11_weight():
    assert p11_weight(P(0, 0, 0.3, 0.7)) == 0.7
    assert p11_weight(P(0.25, 0.25, 0.25, 0.25)) == 0.25
    assert p11_weight(P(1, 0, 0, 0)) == 0


def test_agreement_weight():
    assert agreement_weight(P(0.3, 0, 0, 0.7)) == 1.0
    assert agreement_weight(P(0.25, 0.25, 0.25, 0.25)) == 0.5
    assert agreement_weight(P(0, 0.5, 0.5, 0)) == 0.0


def test_jaccard_voting_example():
    # X always votes yes, Y votes yes 70% of the time
    assert jaccard(P(0, 0, 0.3, 0.7)) == pytest.approx(0.7, abs=1e-15)
    # A and B always agree, 70% yes
    assert jaccard(P(0.3, 0, 0, 0.7)) == 1.0


def test_jaccard_all_zero_convention():
    assert evaluate(MeasureKind.JACCARD, P(1, 0, 0, 0)) == (0.0, True)


def test_simpson_values():
    assert simpson(P(0.2, 0.3, 0, 0.5)) == 1.0
    expected = 0.7 / (0.7 + min(0.3, 0.0))
    assert simpson(P(0, 0, 0.3, 0.7)) == expected == 1.0
    assert simpson(P(0.25, 0.25, 0.25, 0.25)) == 0.5


def test_simpson_conventions():
    assert evaluate(MeasureKind.SIMPSON, P(1, 0, 0, 0)) == (0.0, True)
    # p11 = 0 with min(p10, p01) = 0 but some ones present
    assert evaluate(MeasureKind.SIMPSON, P(0.5, 0.5, 0, 0)) == (0.0, True)
    # containment is a real 1, not a convention
    assert evaluate(MeasureKind.SIMPSON, P(0.2, 0.3, 0, 0.5)) == (1.0, False)


def test_phi_values():
    assert evaluate(MeasureKind.PHI, P(0, 0, 0, 1)) == (0.0, True)
    assert pearson_phi(P(0.25, 0.25, 0.25, 0.25)) == 0.0
    assert pearson_phi(P(0.5, 0, 0, 0.5)) == 1.0
    assert pearson_phi(P(0, 0.5, 0.5, 0)) == -1.0


def test_phi_constant_variable_is_zero():
    # X constant 1, Y varies
    assert evaluate(MeasureKind.PHI, P(0, 0, 0.4, 0.6)) == (0.0, True)


def test_conditional_is_not_closed_form():
    with pytest.raises(UnsupportedKind):
        evaluate(MeasureKind.CONDITIONAL, P(0.25, 0.25, 0.25, 0.25))


def test_kind_parse():
    assert MeasureKind.parse("Jaccard") is MeasureKind.JACCARD
    assert MeasureKind.parse("pearson") is MeasureKind.PHI
    with pytest.raises(ValueError):
        MeasureKind.parse("cosine")


# -- properties -------------------------------------------------------------------------------


def _from_row(row):
    return PairProportions(*(float(x) for x in row))


def test_ordering_on_random_tables():
    rng = np.random.default_rng(11)
    for row in random_tables(rng, 2000):
        p = _from_row(row)
        assert 0 <= p.p11 <= jaccard(p) <= simpson(p) <= 1


@given(tables())
def test_ordering_property(p):
    if p.p11 > 0:
        assert 0 <= p11_weight(p) <= jaccard(p) <= simpson(p) <= 1


@given(tables())
def test_symmetry(p):
    q = p.swapped()
    for kind in KERNELS:
        assert evaluate(kind, p) == evaluate(kind, q)


@given(tables())
def test_phi_range_and_agreement_complement(p):
    assert -1 <= pearson_phi(p) <= 1
    assert abs(agreement_weight(p) + (p.p01 + p.p10) - 1) <= 1e-12


def test_probability_restatements():
    rng = np.random.default_rng(5)
    for row in random_tables(rng, 1000):
        p = _from_row(row)
        # P(XY = 1 | X + Y >= 1) with the conditioning event as 1 - p00
        j_prob = p.p11 / (1.0 - p.p00)
        # max of P(XY=1 | X=1), P(XY=1 | Y=1)
        s_prob = max(p.p11 / (p.p10 + p.p11), p.p11 / (p.p01 + p.p11))
        assert abs(jaccard(p) - j_prob) <= 1e-12
        assert abs(simpson(p) - s_prob) <= 1e-12


def test_phi_matches_cross_product_form():
    rng = np.random.default_rng(8)
    for row in random_tables(rng, 1000):
        p = _from_row(row)
        mx, my = p.p10 + p.p11, p.p01 + p.p11
        cross = (p.p00 * p.p11 - p.p01 * p.p10) / math.sqrt(mx * (1 - mx) * my * (1 - my))
        assert pearson_phi(p) == pytest.approx(cross, abs=1e-12)


@settings(max_examples=200)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_phi_zero_under_independence(a, b):
    p = PairProportions((1 - a) * (1 - b), (1 - a) * b, a * (1 - b), a * b)
    assert abs(pearson_phi(p)) < 1e-12


def test_kernels_agree_with_scalar_path():
    rng = np.random.default_rng(3)
    rows = random_tables(rng, 500)
    for kind, kernel in KERNELS.items():
        vec, deg = kernel(*rows.T)
        for r, v, d in zip(rows, vec, deg):
            assert evaluate(kind, _from_row(r)) == (float(v), bool(d))
