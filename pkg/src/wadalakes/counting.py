"""Exact recurrences for box counts, turning counts and island areas.

All quantities are exact (arbitrary-precision integers and rationals);
floating point enters only through logarithms when estimating dimensions.

For an integer sequence a_1, a_2, ... (each >= 3) the number N(t_n) of
side-t_n boxes needed to cover the boundary after day n+1 satisfies

    N(t_0) = 1,    N(t_{n+1}) = 2*a_{n+1}*N(t_n) + a_{n+1} - 2,

because on subdivision a Terminal square needs 3a-2 sub-squares, a
Straight or Turning needs 2a, and a Separation needs a+2.  Refining a
day-n cover with sub-squares of side t_n/q (1 <= q <= a_{n+1}) costs
3q-2 / 2q / q+2 per square respectively, giving

    N(q^{-1} t_n) = 2*q*N(t_n) + q - 2.

The number of Turning squares is T(1..4) = 0, 2, 6, 14 and then doubles
plus four new ones each day (each turning spawns two, each of the two
terminals spawns two, the separation spawns none), so

    T(n+1) = 2*T(n) + 4   (n >= 4),   T(n) = (9/8)*2**n - 4  (n >= 5).

The island area A(n) after the n-th digging shrinks by 2/a_n except for
the boxes around canal ends, which leaves

    A(0) = 1,    A(n) = (2/a_n)*A(n-1) + t_n**2 * (a_n - 2),

valid for any rational a_n > 2, and satisfies 2^n t_n < A(n) < 2^{n+1} t_n.
On integer grids M(n) = A(n)/t_n^2 obeys the same recurrence and seed as
N, so N(t_n)*t_n^2 = A(n) exactly and the covering has zero overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .sequence_params import (
    DimensionReport,
    ParamSequence,
    scale,
    validate_sequence,
)

TURNING_SEEDS = (0, 2, 6, 14)  # T(1)..T(4)


class NonIntegerSequenceError(ValueError):
    """Operation requires integer subdivision parameters."""


def _require_integer_terms(seq: ParamSequence, n: int) -> list[int]:
    terms = seq.terms(n)
    for i, a in enumerate(terms, start=1):
        if a.denominator != 1:
            raise NonIntegerSequenceError(
                f"a_{i} = {a} is not an integer; box-count recurrences need integer subdivisions"
            )
        if a < 3:
            raise NonIntegerSequenceError(f"a_{i} = {a} < 3")
    return [int(a) for a in terms]


def box_count_standard(n: int) -> int:
    """N(3^-n) for the middle-thirds construction: N -> 6N + 1 from N(1)=1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    count = 1
    for _ in range(n):
        count = 6 * count + 1
    return count


def box_count_general(seq: ParamSequence | str, n: int) -> int:
    """N(t_n) via N -> 2aN + a - 2; integer sequences only."""
    seq = validate_sequence(seq)
    if n < 0:
        raise ValueError("n must be >= 0")
    terms = _require_integer_terms(seq, n)
    count = 1
    for a in terms:
        count = 2 * a * count + a - 2
    return count


def box_count_intermediate(seq: ParamSequence | str, n: int, q: int) -> int:
    """Boxes of side t_n/q covering the day-(n+1) boundary: 2qN(t_n)+q-2.

    q must lie in 1..a_{n+1}; at q = a_{n+1} this coincides with
    box_count_general at n+1.
    """
    seq = validate_sequence(seq)
    a_next = seq.term(n + 1)
    if a_next.denominator != 1:
        raise NonIntegerSequenceError("intermediate counts need integer a_{n+1}")
    if not 1 <= q <= int(a_next):
        raise ValueError(f"q must lie in 1..{int(a_next)}, got {q}")
    return 2 * q * box_count_general(seq, n) + q - 2


def turning_count(n: int) -> int:
    """Number of Turning squares in the day-n cover (exact)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= 4:
        return TURNING_SEEDS[n - 1]
    t = TURNING_SEEDS[3]
    for _ in range(4, n):
        t = 2 * t + 4
    return t


def turning_closed_form(n: int) -> int:
    """(9/8)*2^n - 4, valid for n >= 5 (and coincidentally at n = 4)."""
    if n < 4:
        raise ValueError("closed form only applies for n >= 4")
    value = Fraction(9, 8) * 2**n - 4
    assert value.denominator == 1
    return int(value)


def island_area(seq: ParamSequence | str, n: int) -> Fraction:
    """Exact island area A(n) after the n-th digging (rational a_i allowed)."""
    seq = validate_sequence(seq)
    if n < 0:
        raise ValueError("n must be >= 0")
    area = Fraction(1)
    t = Fraction(1)
    for i in range(1, n + 1):
        a = seq.term(i)
        t /= a
        area = 2 * area / a + t * t * (a - 2)
    return area


@dataclass(frozen=True)
class CountRow:
    n: int
    t: Fraction
    boxes: int  # N(t_n)
    turnings: Optional[int]  # T(n); undefined at n = 0
    area: Fraction  # A(n)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "t_n": _frac_str(self.t),
            "N": str(self.boxes),
            "T": self.turnings,
            "A": _frac_str(self.area),
        }


@dataclass(frozen=True)
class CountTable:
    sequence: ParamSequence
    rows: tuple[CountRow, ...]

    def to_json(self) -> list[dict]:
        return [row.to_json() for row in self.rows]


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def count_table(seq: ParamSequence | str, n_max: int) -> CountTable:
    seq = validate_sequence(seq)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    terms = _require_integer_terms(seq, n_max)
    rows = []
    count = 1
    t = Fraction(1)
    area = Fraction(1)
    rows.append(CountRow(0, t, 1, None, area))
    for n, a in enumerate(terms, start=1):
        count = 2 * a * count + a - 2
        t /= a
        area = 2 * area / a + t * t * (a - 2)
        rows.append(CountRow(n, t, count, turning_count(n), area))
    return CountTable(seq, tuple(rows))


@dataclass(frozen=True)
class AreaBoundsRow:
    n: int
    lemma_lower_ok: bool
    lemma_upper_ok: bool
    lower_margin: Fraction  # A(n) - 2^n t_n
    upper_margin: Fraction  # 2^{n+1} t_n - A(n)
    covered_exactly: Optional[bool]  # N t_n^2 == A(n); None for non-integer terms
    overlap_ok: Optional[bool]  # A <= N t^2 <= A + 2(T+3) t^2 (both overlap forms)

    @property
    def ok(self) -> bool:
        return (
            self.lemma_lower_ok
            and self.lemma_upper_ok
            and self.covered_exactly is not False
            and self.overlap_ok is not False
        )


@dataclass(frozen=True)
class AreaBoundsReport:
    sequence: ParamSequence
    rows: tuple[AreaBoundsRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.ok for row in self.rows)


def area_bounds_check(seq: ParamSequence | str, n_max: int) -> AreaBoundsReport:
    """Exact-rational check of the area bracket and the covering sandwich.

    For every 1 <= n <= n_max verifies 2^n t_n < A(n) < 2^{n+1} t_n, and,
    when the first n terms are integers, that A(n) <= N(t_n) t_n^2 bounded
    above by A(n) plus the turning-derived overlap allowance 2(T(n)+3)t_n^2
    (its closed-form variant (9/4*2^n - 9/4) t_n^2 is checked as well; both
    are slack on integer grids, where the cover has zero overlap and
    N t_n^2 = A(n) exactly).  Any violated inequality marks the row failed;
    a failure indicates an implementation bug, not a data condition.
    """
    seq = validate_sequence(seq)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    integer_ok = True
    try:
        _require_integer_terms(seq, n_max)
    except NonIntegerSequenceError:
        integer_ok = False
    rows = []
    t = Fraction(1)
    area = Fraction(1)
    count = 1
    for n in range(1, n_max + 1):
        a = seq.term(n)
        t /= a
        area = 2 * area / a + t * t * (a - 2)
        lower = Fraction(2) ** n * t
        upper = 2 * lower
        covered = overlap = None
        if integer_ok:
            count = 2 * int(a) * count + int(a) - 2
            covered = count * t * t == area
            allowance = 2 * (turning_count(n) + 3) * t * t
            closed = (Fraction(9, 4) * 2**n - Fraction(9, 4)) * t * t
            overlap = (
                area <= count * t * t <= area + allowance
                and count * t * t <= area + closed
            )
        rows.append(
            AreaBoundsRow(
                n=n,
                lemma_lower_ok=lower < area,
                lemma_upper_ok=area < upper,
                lower_margin=area - lower,
                upper_margin=upper - area,
                covered_exactly=covered,
                overlap_ok=overlap,
            )
        )
    return AreaBoundsReport(seq, tuple(rows))


def _ln_scale(s) -> float:
    s = Fraction(s)
    return math.log(s.numerator) - math.log(s.denominator)


def dimension_from_counts(
    pairs: Sequence[tuple], tolerance: float = math.inf
) -> DimensionReport:
    """Least-squares dimension from (scale, count) pairs.

    Fits ln(count) against ln(1/scale); the extreme pairwise secant
    slopes stand in for the limsup/liminf at finite depth (the OLS slope
    is a convex combination of them, so lower <= value <= upper always).
    """
    if len(pairs) < 2:
        raise ValueError("need at least 2 (scale, count) pairs")
    scales_in = [Fraction(s) for s, _ in pairs]
    for prev, cur in zip(scales_in, scales_in[1:]):
        if not cur < prev:
            raise ValueError("scales must be strictly decreasing")
    xs = [-_ln_scale(s) for s in scales_in]
    ys = [math.log(c) for _, c in pairs]
    k = len(xs)
    x_mean = sum(xs) / k
    y_mean = sum(ys) / k
    sxx = sum((x - x_mean) ** 2 for x in xs)
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    residuals = [y - (intercept + slope * x) for x, y in zip(xs, ys)]
    ss_res = sum(r * r for r in residuals)
    ss_tot = sum((y - y_mean) ** 2 for y in ys)
    secants = [
        (ys[j] - ys[i]) / (xs[j] - xs[i])
        for i in range(k)
        for j in range(i + 1, k)
    ]
    upper, lower = max(secants), min(secants)
    return DimensionReport(
        value=slope if upper - lower <= tolerance else None,
        upper=upper,
        lower=lower,
        window=(1, k),
        method="regression",
        tolerance=tolerance,
        diagnostics={
            "slope": slope,
            "intercept": intercept,
            "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
            "max_abs_residual": max(abs(r) for r in residuals),
            "points": k,
        },
    )


def recurrence_count_pairs(seq: ParamSequence | str, n_max: int) -> list[tuple[Fraction, int]]:
    """(t_n, N(t_n)) pairs for n = 0..n_max, ready for dimension_from_counts."""
    seq = validate_sequence(seq)
    table = count_table(seq, n_max)
    return [(row.t, row.boxes) for row in table.rows]
