import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wadalakes.sequence_params import (
    DimensionReport,
    ParamSequence,
    SequenceSpecError,
    analytic_dimension,
    design,
    design_sequence,
    product_dimension,
    scales,
    validate_sequence,
)

LN6_OVER_LN3 = math.log(6) / math.log(3)


# ---------------------------------------------------------------- parsing

def test_parse_constant_integer():
    seq = validate_sequence("const:3")
    assert seq.kind == "const" and seq.integer_only
    assert seq.terms(4) == [3, 3, 3, 3]


def test_parse_rational_list():
    seq = validate_sequence("list:16/7,7/3,12/5")
    assert not seq.integer_only
    assert seq.term(1) == Fraction(16, 7)
    assert seq.term(3) == Fraction(12, 5)
    # without ;cycle the last term repeats, keeping the sequence total
    assert seq.term(10) == Fraction(12, 5)


def test_parse_cycled_list():
    seq = validate_sequence("list:3,4,5;cycle")
    assert [seq.term(i) for i in range(1, 8)] == [3, 4, 5, 3, 4, 5, 3]
    assert seq.integer_only


def test_parse_affine():
    seq = validate_sequence("affine:2,1")
    assert seq.terms(3) == [3, 4, 5]
    assert seq.integer_only


def test_parse_decimals_exactly():
    seq = validate_sequence("const:2.5")
    assert seq.term(1) == Fraction(5, 2)


@pytest.mark.parametrize(
    "bad",
    [
        "const:2",          # boundary violation: terms must exceed 2
        "const:1.5",
        "list:3,2,4",
        "list:",
        "affine:2,-1",      # decreasing affine eventually dips below 2
        "affine:2",
        "geo:3",
        "const:abc",
        "const:3/0",
        "3",
    ],
)
def test_rejects_bad_specs(bad):
    with pytest.raises(SequenceSpecError):
        validate_sequence(bad)


def test_spec_roundtrip():
    for text in ["const:3", "const:5/2", "list:3,4,5;cycle", "list:16/7,7/3,12/5", "affine:2,1"]:
        seq = validate_sequence(text)
        again = validate_sequence(seq.to_spec())
        assert again == seq


# ---------------------------------------------------------------- scales

def test_scales_const3():
    rows = scales(validate_sequence("const:3"), 2)
    assert [r.t for r in rows] == [1, Fraction(1, 3), Fraction(1, 9)]
    # day-1 canal occupies a strip of width 1/3, day 2 of width 1/9
    assert rows[1].w == Fraction(1, 3)
    assert rows[2].w == Fraction(1, 9)
    assert rows[0].w is None


def test_scales_const4():
    rows = scales(validate_sequence("const:4"), 1)
    assert rows[1].t == Fraction(1, 4)
    assert rows[1].w == Fraction(1, 2)


def test_scales_zero_depth():
    rows = scales(validate_sequence("list:9/2,3"), 0)
    assert len(rows) == 1 and rows[0].t == 1


@st.composite
def sequences(draw):
    kind = draw(st.sampled_from(["const", "list", "cycle", "affine"]))
    rational = st.fractions(min_value=Fraction(21, 10), max_value=Fraction(50), max_denominator=20)
    if kind == "const":
        return ParamSequence("const", (draw(rational),))
    if kind == "affine":
        b = draw(st.fractions(min_value=Fraction(3), max_value=Fraction(10), max_denominator=6))
        k = draw(st.fractions(min_value=Fraction(0), max_value=Fraction(4), max_denominator=6))
        return ParamSequence("affine", (b, k))
    vals = tuple(draw(st.lists(rational, min_size=1, max_size=6)))
    return ParamSequence("list", vals, cycle=(kind == "cycle"))


@settings(max_examples=60, deadline=None)
@given(sequences(), st.integers(min_value=1, max_value=12))
def test_scale_recurrence_and_bound(seq, n):
    rows = scales(seq, n)
    for k in range(1, n + 1):
        assert rows[k].t == rows[k - 1].t / seq.term(k)
        assert rows[k].t < Fraction(1, 2) ** k
        assert 0 < rows[k].w < rows[k - 1].t


# ---------------------------------------------------------------- dimensions

def test_analytic_dimension_const3():
    rep = analytic_dimension(validate_sequence("const:3"))
    assert abs(rep.value - LN6_OVER_LN3) < 1e-12
    assert rep.method == "analytic"
    assert abs(rep.diagnostics["window_sup"] - rep.value) < 1e-12


def test_analytic_dimension_const4_exact_half():
    rep = analytic_dimension(validate_sequence("const:4"))
    assert abs(rep.value - 1.5) < 1e-12


def test_analytic_dimension_affine_limit_one():
    rep = analytic_dimension(validate_sequence("affine:2,1"), n_max=40)
    assert rep.value == 1.0
    # finite-window estimate converges slowly and sits visibly above 1
    assert rep.diagnostics["s_last"] > 1.1


def test_analytic_dimension_cycled_list():
    rep = analytic_dimension(validate_sequence("list:3,4,5;cycle"))
    want = 1 + 3 * math.log(2) / (math.log(3) + math.log(4) + math.log(5))
    assert abs(rep.value - want) < 1e-12


def test_dimension_decreasing_in_c():
    values = [
        analytic_dimension(validate_sequence(f"const:{c}")).value
        for c in (3, 4, 10, 100, 10**6)
    ]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert all(1 < v <= LN6_OVER_LN3 for v in values)
    assert values[-1] < 1.04


def test_analytic_requires_depth():
    with pytest.raises(ValueError):
        analytic_dimension(validate_sequence("const:3"), n_max=1)


# ---------------------------------------------------------------- design

def test_design_half_dimension_is_const4():
    assert design_sequence(1.5).to_spec() == "const:4"


def test_design_reproduces_middle_thirds():
    assert design_sequence(LN6_OVER_LN3).to_spec() == "const:3"


def test_design_12_is_const32():
    assert design_sequence(1.2).to_spec() == "const:32"


def test_design_dimension_one_uses_growing_sequence():
    seq = design_sequence(1.0)
    assert seq.to_spec() == "affine:2,1"
    assert seq.limit_dimension() == 1.0


def test_design_dimension_two_is_documented_approximation():
    out = design(2.0)
    assert out.note is not None
    assert out.sequence.term(1) > 2
    assert abs(out.achieved - 2.0) < 1e-6


@pytest.mark.parametrize("d", [0.5, 2.5, -1])
def test_design_rejects_out_of_range(d):
    with pytest.raises(ValueError):
        design_sequence(d)


@settings(max_examples=80, deadline=None)
@given(st.floats(min_value=1.001, max_value=1.999))
def test_design_roundtrip(d):
    seq = design_sequence(d)
    assert abs(analytic_dimension(seq).value - d) < 1e-9


def test_product_dimension():
    assert product_dimension(1.5, 3) == 2.5
    assert product_dimension(LN6_OVER_LN3, 2) == LN6_OVER_LN3
    assert product_dimension(1.0, 4) == 3.0
    with pytest.raises(ValueError):
        product_dimension(2.5, 3)
    with pytest.raises(ValueError):
        product_dimension(1.5, 1)


def test_dimension_report_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        DimensionReport(upper=1.0, lower=2.0, window=(1, 5), method="analytic", tolerance=1e-9)
