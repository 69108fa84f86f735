"""Dihedral symmetries of the square acting on sub-grid coordinates.

An orientation is an integer 0..7 encoding ``rot**r . mirror**f`` with
``o = 4*f + r``: an optional mirror about the vertical axis (x -> a-1-x)
followed by ``r`` quarter turns counter-clockwise. Orientations act on
cell indices ``(x, y)`` inside an ``a x a`` block (x east, y north) and on
the four edge directions. ``compose(p, q)`` is "apply q, then p".
"""

from __future__ import annotations

import numpy as np

IDENT = 0
ROT90 = 1
ROT180 = 2
ROT270 = 3
MIRROR_X = 4

#: unit vectors for the four edge directions
DIRS = {"E": (1, 0), "N": (0, 1), "W": (-1, 0), "S": (0, -1)}
DIR_NAMES = {v: k for k, v in DIRS.items()}


def apply_point(o: int, x, y, a: int):
    """Map local coordinates through orientation ``o`` inside an a x a block.

    Works elementwise on numpy arrays as well as scalars.
    """
    r, f = o & 3, o >> 2
    if f:
        x = a - 1 - x
    for _ in range(r):
        x, y = a - 1 - y, x
    return x, y


def apply_dir(o: int, dx: int, dy: int) -> tuple[int, int]:
    r, f = o & 3, o >> 2
    if f:
        dx = -dx
    for _ in range(r):
        dx, dy = -dy, dx
    return dx, dy


def compose(p: int, q: int) -> int:
    """Orientation equal to applying ``q`` first and ``p`` second."""
    rp, fp = p & 3, p >> 2
    rq, fq = q & 3, q >> 2
    # mirror conjugates a rotation into its inverse
    r = (rp + (-rq if fp else rq)) % 4
    return 4 * (fp ^ fq) + r


def invert(o: int) -> int:
    for cand in range(8):
        if compose(o, cand) == IDENT:
            return cand
    raise AssertionError("D4 element without inverse")


def solve(port_map: dict[str, str], port_set: tuple[set[str], set[str]] | None = None) -> int:
    """Smallest orientation realizing the given direction constraints.

    ``port_map`` pins individual directions (canonical -> target); an
    optional ``port_set`` pair demands a set of canonical directions be
    mapped onto a set of target directions. Raises if unsatisfiable.
    """
    for o in range(8):
        ok = all(
            DIR_NAMES[apply_dir(o, *DIRS[src])] == dst for src, dst in port_map.items()
        )
        if ok and port_set is not None:
            src_set, dst_set = port_set
            ok = {DIR_NAMES[apply_dir(o, *DIRS[d])] for d in src_set} == set(dst_set)
        if ok:
            return o
    raise ValueError(f"no orientation satisfies {port_map} / {port_set}")


def compose_table() -> np.ndarray:
    t = np.empty((8, 8), dtype=np.uint8)
    for p in range(8):
        for q in range(8):
            t[p, q] = compose(p, q)
    return t


COMPOSE = compose_table()
