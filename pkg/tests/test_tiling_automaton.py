import collections

import numpy as np
import pytest

from wadalakes import counting
from wadalakes import tiling_automaton as ta
from wadalakes.orientations import DIRS
from wadalakes.sequence_params import validate_sequence
from wadalakes.tiling_automaton import SquareType

# pins the geometry templates; update deliberately when templates change
TEMPLATE_SHA256 = "8c13bb36ed7acc6469aee1e43b472f5c867ce175f540d2bf6e2ee4ddb4a9fc9f"


def census_tuple(t):
    c = t.census
    return (
        c[SquareType.TERMINAL],
        c[SquareType.STRAIGHT],
        c[SquareType.TURNING],
        c[SquareType.SEPARATION],
    )


# ---------------------------------------------------------------- seeds

def test_seed_census_day1():
    day1 = ta.seed_tilings()[0]
    assert day1.size == 1 and census_tuple(day1) == (1, 0, 0, 0)


def test_seed_census_day2():
    day2 = ta.seed_tilings()[1]
    assert census_tuple(day2) == (1, 4, 2, 0)
    cells = {(c.x, c.y): c.type for c in day2.cells()}
    # the C-shaped course: dead end top-left, turns at the right corners
    assert cells[(0, 2)] == SquareType.TERMINAL
    assert cells[(2, 0)] == SquareType.TURNING and cells[(2, 2)] == SquareType.TURNING
    for pos in [(0, 0), (1, 0), (2, 1), (1, 2)]:
        assert cells[pos] == SquareType.STRAIGHT


def test_seed_day2_equals_subdivision_of_day1():
    day1, day2, _, _ = ta.seed_tilings()
    generated = ta.subdivide(day1, 3)
    for field in ("x", "y", "typ", "ori", "special", "is_start"):
        assert np.array_equal(getattr(generated, field), getattr(day2, field))


def test_seed_census_days3_and_4():
    _, _, day3, day4 = ta.seed_tilings()
    assert day3.size == 43
    assert census_tuple(day3) == (1, 36, 6, 0)
    assert day4.size == 259
    assert census_tuple(day4) == (2, 242, 14, 1)


# ---------------------------------------------------------------- subdivision

def test_subdivide_day2_gives_43():
    assert ta.subdivide(ta.seed_tilings()[1], 3).size == 43


def test_subdivide_day4_gives_1555():
    day5 = ta.subdivide(ta.seed_tilings()[3], 3)
    assert day5.size == 6 * 259 + 1
    assert census_tuple(day5) == (2, 1520, 32, 1)


def test_single_straight_produces_two_bands():
    lone = ta.Tiling(
        level=0,
        x=np.array([0], dtype=np.int64),
        y=np.array([0], dtype=np.int64),
        typ=np.array([SquareType.STRAIGHT], dtype=np.uint8),
        ori=np.array([0], dtype=np.uint8),
        special=np.array([ta.SPECIAL_NONE], dtype=np.uint8),
        is_start=np.array([False]),
    )
    child = ta.subdivide(lone, 4)
    assert census_tuple(child) == (0, 8, 0, 0)
    assert set(child.y.tolist()) == {0, 3}


def test_subdivide_rejects_bad_parameter():
    day1 = ta.seed_tilings()[0]
    with pytest.raises(ValueError):
        ta.subdivide(day1, 2)
    with pytest.raises(ValueError):
        ta.subdivide(day1, 3.5)


# ---------------------------------------------------------------- run

def test_run_matches_recurrence_counts():
    for spec, depth in (("const:3", 6), ("const:4", 4), ("list:3,4,5;cycle", 4)):
        seq = validate_sequence(spec)
        for n in range(depth + 1):
            t = ta.run(seq, n)
            assert t.size == counting.box_count_general(seq, n)
            assert t.census[SquareType.TURNING] == counting.turning_count(n + 1)


def test_run_examples():
    assert ta.run("const:3", 5).size == 9331
    assert ta.run("const:4", 2).size == 82
    assert ta.run("const:3", 1).census[SquareType.TERMINAL] == 1


def test_run_steady_state_census():
    for n in range(3, 7):
        c = ta.run("const:3", n).census
        assert c[SquareType.TERMINAL] == 2
        assert c[SquareType.SEPARATION] == 1
    for n in range(3):
        c = ta.run("const:3", n).census
        assert c[SquareType.TERMINAL] == 1
        assert c[SquareType.SEPARATION] == 0


def test_run_resource_guard():
    with pytest.raises(ta.ResourceCapError):
        ta.run("const:3", 12, cell_cap=10**6)


def test_run_rejects_non_integer():
    with pytest.raises(counting.NonIntegerSequenceError):
        ta.run("const:5/2", 3)


def test_positions_stay_in_grid_and_unique():
    t = ta.run("list:3,4,5;cycle", 3)
    side = 3 * 4 * 5
    assert t.x.min() >= 0 and t.x.max() < side
    assert t.y.min() >= 0 and t.y.max() < side
    assert len({(x, y) for x, y in zip(t.x.tolist(), t.y.tolist())}) == t.size
    order = sorted(zip(t.x.tolist(), t.y.tolist()))
    assert order == list(zip(t.x.tolist(), t.y.tolist()))


# ---------------------------------------------------------------- census paths

def test_census_of_empty_tiling_is_zero():
    empty = ta.Tiling(
        level=0,
        x=np.array([], dtype=np.int64),
        y=np.array([], dtype=np.int64),
        typ=np.array([], dtype=np.uint8),
        ori=np.array([], dtype=np.uint8),
        special=np.array([], dtype=np.uint8),
        is_start=np.array([], dtype=bool),
    )
    assert all(v == 0 for v in ta.census(empty).values())


def test_production_census_matches_enumeration():
    for spec in ("const:3", "const:4", "list:3,4,5;cycle"):
        for n in range(7):
            try:
                enumerated = ta.run(spec, n).census
            except ta.ResourceCapError:
                break
            assert ta.production_census(spec, n) == enumerated


def test_production_census_turning_closed_form_depth12():
    for day in range(5, 13):
        c = ta.production_census("const:3", day - 1)
        assert c[SquareType.TURNING] == 9 * 2**day // 8 - 4


# ---------------------------------------------------------------- course walk

OPPOSITE = {"E": "W", "W": "E", "N": "S", "S": "N"}


def assert_course_is_single_walk(t):
    ports = ta.course_ports(t)
    by_pos = {(x, y): (cross, src) for x, y, cross, src in ports}
    sources = 0
    adjacency = collections.defaultdict(list)
    degree = {}
    for x, y, cross, src in ports:
        sources += len(src)
        degree[(x, y)] = len(cross) + len(src)
        for d in cross:
            dx, dy = DIRS[d]
            nb = (x + dx, y + dy)
            assert nb in by_pos, f"crossing at {(x, y)} towards {d} leaves the tiling"
            assert OPPOSITE[d] in by_pos[nb][0], f"no reciprocal crossing at {nb}"
            adjacency[(x, y)].append(nb)
    assert sources == 1
    terminals = sorted(
        (int(x), int(y))
        for x, y, typ in zip(t.x, t.y, t.typ)
        if typ == SquareType.TERMINAL
    )
    if t.level > 0:
        assert sorted(p for p, d in degree.items() if d == 1) == terminals
    separations = [
        (int(x), int(y))
        for x, y, typ in zip(t.x, t.y, t.typ)
        if typ == SquareType.SEPARATION
    ]
    assert [p for p, d in degree.items() if d == 3] == separations
    seen = set()
    stack = [next(iter(by_pos))]
    while stack:
        p = stack.pop()
        if p in seen:
            continue
        seen.add(p)
        stack.extend(adjacency[p])
    assert len(seen) == t.size


def test_course_walk_consistency():
    for spec, depth in (("const:3", 5), ("const:4", 3), ("list:3,4,5;cycle", 4), ("const:5", 3)):
        seq = validate_sequence(spec)
        t = ta.root_tiling()
        for level in range(1, depth + 1):
            t = ta.subdivide(t, int(seq.term(level)))
            assert_course_is_single_walk(t)


def test_start_terminal_choice_does_not_change_census():
    t = ta.run("const:3", 4)
    terminals = np.nonzero(t.typ == SquareType.TERMINAL)[0]
    assert len(terminals) == 2
    flipped = ta.Tiling(
        level=t.level,
        x=t.x,
        y=t.y,
        typ=t.typ,
        ori=t.ori,
        special=t.special,
        is_start=np.isin(np.arange(t.size), terminals[1:]),
    )
    a = ta.subdivide(t, 3)
    b = ta.subdivide(flipped, 3)
    assert a.census == b.census
    assert a.size == b.size
    # positions differ only in where the cap flag (future burst) lands
    assert not np.array_equal(a.special, b.special) or np.array_equal(a.x, b.x)


# ---------------------------------------------------------------- export

def test_template_checksum_pinned():
    assert ta.TEMPLATE_SHA256 == TEMPLATE_SHA256


def test_tiling_export_shape():
    t = ta.run("const:3", 2)
    doc = t.to_json()
    assert doc["level"] == 2 and doc["day"] == 3
    assert doc["template_sha256"] == TEMPLATE_SHA256
    assert len(doc["cells"]) == 43
    cell = doc["cells"][0]
    assert set(cell) == {"level", "x", "y", "type", "orient"}
    assert cell["type"] in {"TERMINAL", "STRAIGHT", "TURNING", "SEPARATION"}


def test_day_cover_indexing():
    # the day-n cover carries N(t_{n-1}) cells
    for day in (1, 2, 3, 4):
        assert ta.day_cover("const:3", day).size == counting.box_count_general("const:3", day - 1)
