"""Symbolic substitution system on typed covering squares.

The island left after day ``n`` of the construction is an exact union of
``N(t_n)`` grid cells of side ``t_n`` (the level-``n`` tiling), and the
canal dug on day ``n+1`` passes through every one of them.  Each cell is
typed by how that canal crosses it:

    Terminal    the canal dead-ends inside, one sub-cell short of a wall
    Straight    the canal passes straight through the centered band
    Turning     the canal enters one edge and leaves a perpendicular one
    Separation  the canal bursts in from an older same-colour lake wall
                and branches in both directions

Subdividing a cell into an ``a x a`` sub-grid digs the canal (the band of
width ``a-2`` sub-cells prescribed by the type) and leaves the margin
sub-cells as the next level's cells, typed by the course of the *next*
canal, which hugs the course just dug on both flanks and around its caps.
The per-cell geometry lives in ``templates.json`` (format documented
there); cells carry a D4 orientation mapping the canonical template frame
into the world.

Two kinds of bookkeeping travel with the cells beyond their type:

* shore starts — the canals of days 2 and 3 begin flush at the western
  shore; the cell holding that start is marked and produces the next
  canal's start (day <= 3) or its two dead ends (day 4, when starts move
  to interior peaks);
* cap flags — when a canal dead-ends, the margin sub-cell flush against
  its cap is flagged; the flag descends through the next subdivision and
  then fires, producing the Separation through which the same-colour
  canal three days later bursts out of that cap.  When a day leaves two
  dead ends, the flag is granted to the terminal with lexicographically
  smallest position and the other cap stays a dead peak.

The per-type child counts (Terminal 3a-2, Straight/Turning 2a,
Separation a+2) therefore hold as census totals at every level, with the
start/flag specials only re-attributing which parent produces the lone
Separation and the terminals.  The day-``n`` cover of the construction
is the level-``n-1`` tiling.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from . import orientations as d4
from .counting import box_count_general
from .sequence_params import ParamSequence, validate_sequence


class SquareType(IntEnum):
    TERMINAL = 0
    STRAIGHT = 1
    TURNING = 2
    SEPARATION = 3


SPECIAL_NONE = 0
SPECIAL_SHORE = 1  # the current canal starts flush at the shore here
SPECIAL_FLAG2 = 2  # cap flag, two subdivisions before it fires
SPECIAL_FLAG1 = 3  # cap flag, fires on the next subdivision

SPECIAL_NAMES = {"SHORE": SPECIAL_SHORE, "FLAG2": SPECIAL_FLAG2, "FLAG1": SPECIAL_FLAG1}

_TYPE_BY_NAME = {
    "terminal": SquareType.TERMINAL,
    "straight": SquareType.STRAIGHT,
    "turning": SquareType.TURNING,
    "separation": SquareType.SEPARATION,
}

TEMPLATE_PATH = Path(__file__).with_name("templates.json")
TEMPLATE_SHA256 = hashlib.sha256(TEMPLATE_PATH.read_bytes()).hexdigest()

DEFAULT_CELL_CAP = 10**8


class ResourceCapError(RuntimeError):
    """Predicted cell count exceeds the configured cap."""


class TemplateError(ValueError):
    """templates.json is malformed or internally inconsistent."""


def _load_raw() -> dict:
    data = json.loads(TEMPLATE_PATH.read_text())
    if data.get("format") != "wada-templates/1":
        raise TemplateError(f"unsupported template format {data.get('format')!r}")
    return data


_RAW = _load_raw()
_CANONICAL_PORTS = {k: tuple(v) for k, v in _RAW["canonical_ports"].items()}


def _lf(form, a: int) -> int:
    # linear form [p, q] or [p, q, h]: p*a + q + h*((a-1)//2)
    p, q = form[0], form[1]
    h = form[2] if len(form) > 2 else 0
    return p * a + q + h * ((a - 1) // 2)


def _solve_child_orient(entry: dict) -> int:
    pins = {}
    if "face" in entry:
        pins["N"] = entry["face"]
    if "attach" in entry:
        pins["W"] = entry["attach"]
    if "shore" in entry:
        pins["W"] = entry["shore"]
    ports = _CANONICAL_PORTS[entry["type"]]
    return d4.solve(pins, (set(ports), set(entry["course"])))


class CanonicalTemplate(NamedTuple):
    pos: np.ndarray  # (k, 2) child positions
    types: np.ndarray  # (k,) uint8
    orients: np.ndarray  # (k,) uint8
    specials: np.ndarray  # (k,) uint8
    dig: np.ndarray  # (m, 2) sub-cells removed by the current canal


@lru_cache(maxsize=None)
def _canonical(name: str, a: int) -> CanonicalTemplate:
    if a < 3:
        raise ValueError(f"subdivision parameter must be an integer >= 3, got {a}")
    spec = _RAW["templates"][name]
    pos, types, orients, specials = [], [], [], []

    def emit(x: int, y: int, entry: dict) -> None:
        pos.append((x, y))
        types.append(int(_TYPE_BY_NAME[entry["type"]]))
        orients.append(_solve_child_orient(entry))
        specials.append(SPECIAL_NAMES.get(entry.get("special"), SPECIAL_NONE))

    for entry in spec["children"]:
        if "run" in entry:
            run = entry["run"]
            lo, hi = _lf(run["lo"], a), _lf(run["hi"], a)
            at = _lf(run["at"], a)
            for v in range(lo, hi + 1):
                if run["axis"] == "x":
                    emit(v, at, entry)
                else:
                    emit(at, v, entry)
        else:
            emit(_lf(entry["at"][0], a), _lf(entry["at"][1], a), entry)

    dig = []
    for rect in spec["dig"]:
        x0, x1 = _lf(rect["x"][0], a), _lf(rect["x"][1], a)
        y0, y1 = _lf(rect["y"][0], a), _lf(rect["y"][1], a)
        dig.extend((x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1))

    seen = set(pos) | set(dig)
    if len(pos) + len(dig) != a * a or len(seen) != a * a:
        raise TemplateError(
            f"template {name!r} does not partition the {a}x{a} grid "
            f"({len(pos)} children + {len(dig)} dug)"
        )
    return CanonicalTemplate(
        pos=np.array(pos, dtype=np.int64),
        types=np.array(types, dtype=np.uint8),
        orients=np.array(orients, dtype=np.uint8),
        specials=np.array(specials, dtype=np.uint8),
        dig=np.array(dig, dtype=np.int64),
    )


@lru_cache(maxsize=None)
def _oriented(name: str, a: int, o: int) -> CanonicalTemplate:
    base = _canonical(name, a)
    px, py = d4.apply_point(o, base.pos[:, 0], base.pos[:, 1], a)
    dx, dy = d4.apply_point(o, base.dig[:, 0], base.dig[:, 1], a)
    return CanonicalTemplate(
        pos=np.stack([px, py], axis=1),
        types=base.types,
        orients=d4.COMPOSE[o, base.orients],
        specials=base.specials,
        dig=np.stack([dx, dy], axis=1),
    )


def _template_name(typ: int, special: int, is_start: bool, level: int) -> str:
    if typ == SquareType.STRAIGHT:
        if special == SPECIAL_SHORE:
            # children are typed for canal level+2; shore starts end with day 3
            return "straight_shore_next_shore" if level <= 1 else "straight_shore_next_peak"
        if special == SPECIAL_FLAG2:
            return "straight_flag_carry"
        if special == SPECIAL_FLAG1:
            return "straight_flag_fire"
        return "straight"
    if typ == SquareType.TURNING:
        return "turning"
    if typ == SquareType.TERMINAL:
        if special == SPECIAL_SHORE:
            return "terminal_shore"
        return "terminal_start" if is_start else "terminal"
    return "separation"


_NAME_CODES = [
    "straight",
    "straight_shore_next_shore",
    "straight_shore_next_peak",
    "straight_flag_carry",
    "straight_flag_fire",
    "turning",
    "terminal",
    "terminal_start",
    "terminal_shore",
    "separation",
]
_CODE_OF = {n: i for i, n in enumerate(_NAME_CODES)}


class TypedCell(NamedTuple):
    level: int
    x: int
    y: int
    type: SquareType
    orient: int
    special: int
    is_start: bool


@dataclass(frozen=True)
class Tiling:
    """Cells of one level, stored as flat arrays sorted by (x, y)."""

    level: int
    x: np.ndarray
    y: np.ndarray
    typ: np.ndarray
    ori: np.ndarray
    special: np.ndarray
    is_start: np.ndarray

    @property
    def day(self) -> int:
        """Day of the canal this tiling's types describe (cells cover its boundary)."""
        return self.level + 1

    @property
    def size(self) -> int:
        return len(self.x)

    @property
    def census(self) -> dict[SquareType, int]:
        counts = np.bincount(self.typ, minlength=4)
        return {SquareType(i): int(counts[i]) for i in range(4)}

    def cells(self) -> Iterator[TypedCell]:
        for i in range(self.size):
            yield TypedCell(
                self.level,
                int(self.x[i]),
                int(self.y[i]),
                SquareType(self.typ[i]),
                int(self.ori[i]),
                int(self.special[i]),
                bool(self.is_start[i]),
            )

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "day": self.day,
            "template_sha256": TEMPLATE_SHA256,
            "cells": [
                {"level": self.level, "x": int(x), "y": int(y), "type": SquareType(t).name, "orient": int(o)}
                for x, y, t, o in zip(self.x, self.y, self.typ, self.ori)
            ],
        }


def census(t: Tiling) -> dict[SquareType, int]:
    return t.census


def _finish(level: int, x, y, typ, ori, special) -> Tiling:
    order = np.lexsort((y, x))  # primary key x, secondary y
    x, y, typ, ori, special = (arr[order] for arr in (x, y, typ, ori, special))
    is_start = np.zeros(len(x), dtype=bool)
    terminals = np.nonzero(typ == SquareType.TERMINAL)[0]
    if len(terminals):
        is_start[terminals[0]] = True  # lexicographically smallest position
    return Tiling(level, x, y, typ, ori, special, is_start)


def root_tiling() -> Tiling:
    t = _finish(
        0,
        np.array([0], dtype=np.int64),
        np.array([0], dtype=np.int64),
        np.array([SquareType.TERMINAL], dtype=np.uint8),
        np.array([d4.IDENT], dtype=np.uint8),
        np.array([SPECIAL_SHORE], dtype=np.uint8),
    )
    return t


def subdivide_with_dig(t: Tiling, a: int) -> tuple[Tiling, np.ndarray]:
    """Subdivide and also return the (x, y) sub-cells dug by the current canal."""
    if isinstance(a, float) and not a.is_integer():
        raise ValueError("subdivision parameter must be an integer")
    a = int(a)
    if a < 3:
        raise ValueError(f"subdivision parameter must be >= 3, got {a}")

    codes = np.empty(t.size, dtype=np.uint8)
    for i in range(t.size):  # cheap relative to the vectorized expansion below
        codes[i] = _CODE_OF[
            _template_name(int(t.typ[i]), int(t.special[i]), bool(t.is_start[i]), t.level)
        ]
    keys = codes.astype(np.uint16) * 8 + t.ori

    xs, ys, typs, oris, specs, digs_x, digs_y = [], [], [], [], [], [], []
    for key in np.unique(keys):
        idx = np.nonzero(keys == key)[0]
        tmpl = _oriented(_NAME_CODES[key // 8], a, int(key % 8))
        px, py = t.x[idx], t.y[idx]
        n_par, k = len(idx), len(tmpl.pos)
        xs.append((px[:, None] * a + tmpl.pos[None, :, 0]).ravel())
        ys.append((py[:, None] * a + tmpl.pos[None, :, 1]).ravel())
        typs.append(np.tile(tmpl.types, n_par))
        oris.append(np.tile(tmpl.orients, n_par))
        specs.append(np.tile(tmpl.specials, n_par))
        digs_x.append((px[:, None] * a + tmpl.dig[None, :, 0]).ravel())
        digs_y.append((py[:, None] * a + tmpl.dig[None, :, 1]).ravel())

    child = _finish(
        t.level + 1,
        np.concatenate(xs),
        np.concatenate(ys),
        np.concatenate(typs),
        np.concatenate(oris),
        np.concatenate(specs),
    )
    dig = np.stack([np.concatenate(digs_x), np.concatenate(digs_y)], axis=1)
    return child, dig


def subdivide(t: Tiling, a: int) -> Tiling:
    """One production step: digs canal ``t.day`` and types the next cover."""
    return subdivide_with_dig(t, a)[0]


def run(
    seq: ParamSequence | str, n: int, cell_cap: int = DEFAULT_CELL_CAP
) -> Tiling:
    """Level-n tiling (the day-(n+1) cover) for an integer sequence."""
    seq = validate_sequence(seq)
    if n < 0:
        raise ValueError("n must be >= 0")
    predicted = box_count_general(seq, n)  # also validates integer terms
    if predicted > cell_cap:
        raise ResourceCapError(
            f"level-{n} tiling has {predicted} cells, above the cap of {cell_cap}"
        )
    t = root_tiling()
    for i in range(1, n + 1):
        t = subdivide(t, int(seq.term(i)))
    return t


def day_cover(seq: ParamSequence | str, day: int, cell_cap: int = DEFAULT_CELL_CAP) -> Tiling:
    """The day-``day`` cover (cells of side t_{day-1})."""
    if day < 1:
        raise ValueError("day must be >= 1")
    return run(seq, day - 1, cell_cap=cell_cap)


def seed_tilings() -> list[Tiling]:
    """Covers for days 1..4 of the middle-thirds construction.

    Day 1 is the literal root; day 2 is written out cell by cell (the
    seven squares of the 3x3 grid with their classification: one
    Terminal, four Straights, two Turnings along the C-shaped course);
    days 3 and 4 are produced by the substitution from day 2.
    """
    day1 = root_tiling()
    day2_cells = [
        # (x, y, type, orient, special): canal 2 runs shore -> E -> N -> W -> cap
        (0, 0, SquareType.STRAIGHT, 0, SPECIAL_SHORE),
        (1, 0, SquareType.STRAIGHT, 0, SPECIAL_NONE),
        (2, 0, SquareType.TURNING, 3, SPECIAL_NONE),
        (2, 1, SquareType.STRAIGHT, 1, SPECIAL_FLAG2),
        (2, 2, SquareType.TURNING, 0, SPECIAL_NONE),
        (1, 2, SquareType.STRAIGHT, 0, SPECIAL_NONE),
        (0, 2, SquareType.TERMINAL, 2, SPECIAL_NONE),
    ]
    day2 = _finish(
        1,
        np.array([c[0] for c in day2_cells], dtype=np.int64),
        np.array([c[1] for c in day2_cells], dtype=np.int64),
        np.array([int(c[2]) for c in day2_cells], dtype=np.uint8),
        np.array([c[3] for c in day2_cells], dtype=np.uint8),
        np.array([c[4] for c in day2_cells], dtype=np.uint8),
    )
    day3 = subdivide(day2, 3)
    day4 = subdivide(day3, 3)
    return [day1, day2, day3, day4]


@lru_cache(maxsize=None)
def _production_counts(name: str, a: int) -> tuple[tuple[tuple[int, int], int], ...]:
    tmpl = _canonical(name, a)
    counts: dict[tuple[int, int], int] = {}
    for typ, spec in zip(tmpl.types, tmpl.specials):
        key = (int(typ), int(spec))
        counts[key] = counts.get(key, 0) + 1
    return tuple(sorted(counts.items()))


def production_census(seq: ParamSequence | str, n: int) -> dict[SquareType, int]:
    """Census of the level-n tiling evolved purely on type counts.

    Applies the same per-template child counts as ``subdivide`` without
    materializing any cells, so it reaches depths the enumeration cap
    forbids.  Exact integers throughout.
    """
    seq = validate_sequence(seq)
    if n < 0:
        raise ValueError("n must be >= 0")
    # state key: (type, special, is_start)
    state: dict[tuple[int, int, bool], int] = {
        (int(SquareType.TERMINAL), SPECIAL_SHORE, True): 1
    }
    for level in range(n):
        a = seq.term(level + 1)
        if a.denominator != 1 or a < 3:
            raise ValueError("production census needs integer terms >= 3")
        new: dict[tuple[int, int, bool], int] = {}
        for (typ, spec, start), cnt in state.items():
            name = _template_name(typ, spec, start, level)
            for (ctyp, cspec), ccnt in _production_counts(name, int(a)):
                key = (ctyp, cspec, False)
                new[key] = new.get(key, 0) + ccnt * cnt
        plain_term = (int(SquareType.TERMINAL), SPECIAL_NONE, False)
        if new.get(plain_term, 0) >= 1:  # exactly one terminal carries the next start
            new[plain_term] -= 1
            new[(int(SquareType.TERMINAL), SPECIAL_NONE, True)] = 1
            if new[plain_term] == 0:
                del new[plain_term]
        state = new
    out = {st: 0 for st in SquareType}
    for (typ, _, _), cnt in state.items():
        out[SquareType(typ)] += cnt
    return out


_COURSE_PORTS = {
    SquareType.STRAIGHT: ("W", "E"),
    SquareType.TURNING: ("W", "S"),
    SquareType.TERMINAL: ("W",),
    SquareType.SEPARATION: ("N", "S"),
}


def course_ports(t: Tiling) -> list[tuple[int, int, tuple[str, ...], tuple[str, ...]]]:
    """Per cell: (x, y, crossing dirs, source dirs) of the canal course.

    Crossing directions point at the neighbouring cell the canal
    continues into; source directions point at where the canal emerges
    from (the shore, or the wall of an older same-colour lake at a
    Separation).  Used to check the course forms one consistent walk.
    """
    out = []
    for c in t.cells():
        crossings = _COURSE_PORTS[c.type]
        sources: tuple[str, ...] = ()
        if c.type == SquareType.SEPARATION:
            sources = ("W",)
        elif c.special == SPECIAL_SHORE:
            sources = ("W",)
            crossings = ("E",) if c.type == SquareType.STRAIGHT else ()

        def world(ports):
            return tuple(
                d4.DIR_NAMES[d4.apply_dir(c.orient, *d4.DIRS[p])] for p in ports
            )

        out.append((c.x, c.y, world(crossings), world(sources)))
    return out
