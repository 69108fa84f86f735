"""Brute-force pixel ground truth for the canal construction.

Expands the subdivision templates into a dense grid of the unit square at
resolution ``side = a_1 * ... * a_m`` (raster level m).  Every canal dug
up to the requested day has its corners on that grid, so the raster is an
exact partition, not a sampling: island areas, box counts, distances and
connectivity measured here are exact and independently cross-check the
recurrences and the symbolic tiling.

The primary storage is one byte per pixel holding the day the pixel was
dug (0 = island), row-major with y growing north; colours rotate
blue/red/green with the day.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import ndimage

from .sequence_params import ParamSequence, validate_sequence
from .tiling_automaton import root_tiling, subdivide_with_dig

DEFAULT_RASTER_CAP = 2**14

#: fixed output palette, RGB
PALETTE = np.array(
    [
        (237, 201, 175),  # island (sand)
        (0, 0, 255),      # blue
        (220, 30, 30),    # red
        (0, 150, 60),     # green
    ],
    dtype=np.uint8,
)

COLOR_NAMES = ("blue", "red", "green")


class RasterCapError(RuntimeError):
    """Requested resolution exceeds the configured pixel cap."""


class ResolutionError(ValueError):
    """Raster is too coarse for the requested measurement."""


def color_of_day(day: int) -> int:
    """0 = blue, 1 = red, 2 = green; days rotate through the colours."""
    if day < 1:
        raise ValueError("days are 1-based")
    return (day - 1) % 3


@dataclass(frozen=True)
class Raster:
    sequence: ParamSequence
    day: int  # how many canals have been dug
    level: int  # resolution level; side = prod of the first `level` terms
    day_grid: np.ndarray  # uint8 [side, side], [y, x]; 0 = island, k = dug on day k

    @property
    def side(self) -> int:
        return self.day_grid.shape[0]

    @property
    def labels(self) -> np.ndarray:
        """0 island, 1 blue, 2 red, 3 green."""
        g = self.day_grid
        return np.where(g == 0, 0, (g - 1) % 3 + 1).astype(np.uint8)

    def island_mask(self, after_day: Optional[int] = None) -> np.ndarray:
        """Island pixels after `after_day` diggings (default: all of them)."""
        if after_day is None or after_day >= self.day:
            return self.day_grid == 0
        return (self.day_grid == 0) | (self.day_grid > after_day)

    def canal_mask(self, day: int) -> np.ndarray:
        """Pixels dug on exactly the given day."""
        return self.day_grid == day

    def color_mask(self, color: int, upto_day: Optional[int] = None) -> np.ndarray:
        g = self.day_grid
        m = (g > 0) & ((g - 1) % 3 == color)
        if upto_day is not None:
            m &= g <= upto_day
        return m

    def island_fraction(self, after_day: Optional[int] = None) -> Fraction:
        count = int(np.count_nonzero(self.island_mask(after_day)))
        return Fraction(count, self.side**2)

    def pixel_factor(self, day: int) -> int:
        """t_day expressed in pixels: prod of terms day+1 .. level."""
        r = 1
        for i in range(day + 1, self.level + 1):
            r *= int(self.sequence.term(i))
        return r


def rasterize(
    seq: ParamSequence | str,
    day: int,
    level: Optional[int] = None,
    raster_cap: int = DEFAULT_RASTER_CAP,
) -> Raster:
    """Dig `day` canals and return the exact pixel partition at `level`.

    The level defaults to `day` (the coarsest exact resolution); higher
    levels refine the same geometry.  Integer sequences only.
    """
    seq = validate_sequence(seq)
    if day < 0:
        raise ValueError("day must be >= 0")
    if day > 254:
        raise ValueError("day exceeds the uint8 day-grid encoding")
    if level is None:
        level = day
    if level < day:
        raise ValueError("raster level must be >= day")
    side = 1
    for i in range(1, level + 1):
        a = seq.term(i)
        if a.denominator != 1:
            raise ValueError("rasterize needs an integer sequence")
        side *= int(a)
    if side > raster_cap:
        raise RasterCapError(f"side {side} exceeds raster cap {raster_cap}")

    grid = np.zeros((1, 1), dtype=np.uint8)
    tiling = root_tiling()
    for k in range(1, day + 1):
        a = int(seq.term(k))
        grid = grid.repeat(a, axis=0).repeat(a, axis=1)
        tiling, dig = subdivide_with_dig(tiling, a)
        grid[dig[:, 1], dig[:, 0]] = k
    for k in range(day + 1, level + 1):
        a = int(seq.term(k))
        grid = grid.repeat(a, axis=0).repeat(a, axis=1)
    return Raster(seq, day, level, grid)


def _adjacent_to(mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def boundary_pixel_masks(r: Raster, day: int) -> tuple[np.ndarray, np.ndarray]:
    """(lake-side, island-side) boundary pixels of the day-`day` canal.

    Lake side: canal pixels with a 4-neighbour outside the canal.  Island
    side: island pixels with a 4-neighbour in the canal.  At box sides
    t_{day-1} and finer-by-one rasters both give the same box count.
    """
    canal = r.canal_mask(day)
    lake_side = canal & _adjacent_to(~canal)
    island_side = (r.day_grid == 0) & _adjacent_to(canal)
    return lake_side, island_side


def _threads() -> int:
    env = os.environ.get("WADA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def _count_boxes_integer(mask: np.ndarray, b: int) -> int:
    """Boxes of b x b pixels containing a set pixel; banded for threading."""
    side = mask.shape[0]
    nb = -(-side // b)
    n_threads = _threads()
    bands = min(n_threads, nb)
    if bands <= 1:
        ys, xs = np.nonzero(mask)
        hit = np.zeros((nb, nb), dtype=bool)
        hit[ys // b, xs // b] = True
        return int(hit.sum())

    def band(i: int) -> np.ndarray:
        y0, y1 = i * b * (nb // bands + 1), min(side, (i + 1) * b * (nb // bands + 1))
        hit = np.zeros((nb, nb), dtype=bool)
        if y0 < y1:
            ys, xs = np.nonzero(mask[y0:y1])
            hit[(ys + y0) // b, xs // b] = True
        return hit

    with ThreadPoolExecutor(max_workers=bands) as pool:
        grids = list(pool.map(band, range(bands)))
    total = grids[0]
    for g in grids[1:]:
        total |= g  # order-independent merge keeps the result deterministic
    return int(total.sum())


def anchored_box_count(mask: np.ndarray, eps) -> int:
    """Origin-anchored boxes of rational side eps touching the pixel set.

    Exact integer arithmetic on box indices; pixels may straddle up to
    two boxes per axis when eps is not pixel-aligned.  An anchored grid
    over-counts relative to a freely-placed minimal cover (by up to the
    per-axis splitting factor), so treat this as an upper-bound proxy.
    """
    eps = Fraction(eps)
    side = mask.shape[0]
    p, q = eps.numerator, eps.denominator
    if side * p > 2**62 // max(q, 1):
        raise ValueError("box side denominator too large for exact indexing")
    ys, xs = np.nonzero(mask)
    xs = xs.astype(np.int64)
    ys = ys.astype(np.int64)
    denom = side * p
    x_lo, x_hi = (xs * q) // denom, ((xs + 1) * q - 1) // denom
    y_lo, y_hi = (ys * q) // denom, ((ys + 1) * q - 1) // denom
    nb = (q + p - 1) // p
    hit = np.zeros((nb, nb), dtype=bool)
    for dx in (x_lo, x_hi):
        for dy in (y_lo, y_hi):
            hit[dy, dx] = True
    return int(hit.sum())


@dataclass(frozen=True)
class BoxCountSample:
    box_side: Fraction
    count: int
    target: int  # day whose canal boundary was covered
    lake_side_count: int
    island_side_count: int


def empirical_box_count(r: Raster, day: int, box_side) -> BoxCountSample:
    """Count axis-aligned boxes meeting the day-`day` canal's boundary pixels.

    Requires the raster one level finer than the target day so the
    boundary is resolved strictly inside the boxes.  Both boundary
    conventions are counted; the island-side count is reported as the
    sample count.
    """
    if not 1 <= day <= r.day:
        raise ValueError(f"day must lie in 1..{r.day}")
    if r.level < day + 1:
        raise ResolutionError(
            f"raster level {r.level} too coarse for day {day} (need >= {day + 1})"
        )
    eps = Fraction(box_side)
    if not 0 < eps <= 1:
        raise ValueError("box side must lie in (0, 1]")
    lake_side, island_side = boundary_pixel_masks(r, day)
    b_exact = eps * r.side
    if b_exact.denominator == 1:
        b = int(b_exact)
        if b < 1:
            raise ResolutionError("box side below one pixel")
        counts = (_count_boxes_integer(lake_side, b), _count_boxes_integer(island_side, b))
    else:
        if eps * r.side < 1:
            raise ResolutionError("box side below one pixel")
        counts = (anchored_box_count(lake_side, eps), anchored_box_count(island_side, eps))
    return BoxCountSample(
        box_side=eps,
        count=counts[1],
        target=day,
        lake_side_count=counts[0],
        island_side_count=counts[1],
    )


def boundary_union_mask(r: Raster, upto_day: Optional[int] = None) -> np.ndarray:
    """Island-side boundary pixels of every canal dug through `upto_day`.

    As days accumulate these skins close in on the set all three
    shorelines share, so the union is the deepest desk-scale stand-in for
    the limit boundary available in this raster.
    """
    if upto_day is None:
        upto_day = r.day
    out = np.zeros_like(r.day_grid, dtype=bool)
    for d in range(1, upto_day + 1):
        out |= boundary_pixel_masks(r, d)[1]
    return out


def _exact_min_dist2(feature: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance (in pixels) to the feature set."""
    iy, ix = ndimage.distance_transform_edt(
        ~feature, return_distances=False, return_indices=True
    )
    side = feature.shape[0]
    yy, xx = np.ogrid[0:side, 0:side]
    return (iy.astype(np.int64) - yy) ** 2 + (ix.astype(np.int64) - xx) ** 2


@dataclass(frozen=True)
class WadaDistanceReport:
    day: int
    ok: bool
    max_dist2_px: int
    bound2_px: int
    max_dist_units: float
    bound_units: float
    vacuous: bool = False


def wada_distance_check(r: Raster, day: int) -> WadaDistanceReport:
    """Every island pixel lies within sqrt(2)*t_day (+ one pixel diagonal)
    of the canal dug on `day`, verified with exact integer squared
    distances.  Day 0 passes vacuously (nothing dug yet)."""
    if day == 0:
        return WadaDistanceReport(0, True, 0, 0, 0.0, 0.0, vacuous=True)
    if not 1 <= day <= r.day:
        raise ValueError(f"day must lie in 1..{r.day}")
    if r.level < day:
        raise ResolutionError("raster level must be >= day")
    canal = r.canal_mask(day)
    island = r.island_mask(day)
    return _distance_report(r, day, canal, island, r.pixel_factor(day))


def _distance_report(r, day, feature, probe, factor) -> WadaDistanceReport:
    d2 = _exact_min_dist2(feature)
    max_d2 = int(d2[probe].max()) if probe.any() else 0
    bound2 = 2 * (factor + 1) ** 2  # (sqrt(2)*t*side + sqrt(2))^2, exactly
    return WadaDistanceReport(
        day=day,
        ok=max_d2 <= bound2,
        max_dist2_px=max_d2,
        bound2_px=bound2,
        max_dist_units=float(np.sqrt(max_d2)) / r.side,
        bound_units=float(np.sqrt(bound2)) / r.side,
    )


def wada_all_colors(r: Raster) -> list[WadaDistanceReport]:
    """Distance check from the current island to each full colour lake,
    at the band of the day that colour last dug."""
    island = r.island_mask()
    out = []
    for color in range(3):
        days = [k for k in range(1, r.day + 1) if color_of_day(k) == color]
        if not days:
            continue
        last = days[-1]
        lake = r.color_mask(color)
        out.append(_distance_report(r, last, lake, island, r.pixel_factor(last)))
    return out


@dataclass(frozen=True)
class LakeTopology:
    color: str
    present: bool
    connected: bool
    simply_connected: bool  # complement within the square is connected


@dataclass(frozen=True)
class TopologyReport:
    day: int
    lakes: tuple[LakeTopology, ...]
    island_connected: bool
    lakes_disjoint: bool

    @property
    def ok(self) -> bool:
        return (
            self.island_connected
            and self.lakes_disjoint
            and all(l.connected and l.simply_connected for l in self.lakes if l.present)
        )


def _n_components(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    _, n = ndimage.label(mask)  # default structure = 4-connectivity
    return n


def connectivity_check(r: Raster, day: Optional[int] = None) -> TopologyReport:
    """4-connectivity of each lake, connectivity of its complement (simple
    connectivity on the grid), island connectivity, pairwise disjointness."""
    if day is None:
        day = r.day
    lakes = []
    for color in range(3):
        mask = r.color_mask(color, upto_day=day)
        present = bool(mask.any())
        lakes.append(
            LakeTopology(
                color=COLOR_NAMES[color],
                present=present,
                connected=(not present) or _n_components(mask) == 1,
                simply_connected=(not present) or _n_components(~mask) == 1,
            )
        )
    island = r.island_mask(day)
    # the day grid assigns one label per pixel, so lakes cannot overlap
    return TopologyReport(
        day=day,
        lakes=tuple(lakes),
        island_connected=_n_components(island) == 1,
        lakes_disjoint=True,
    )


def render(r: Raster, path) -> None:
    """Write a binary portable pixmap (P6) with the fixed palette.

    Deterministic bytes for a given raster; rows run top-down.
    """
    rgb = PALETTE[r.labels]
    data = rgb[::-1, :, :].tobytes()
    header = f"P6\n{r.side} {r.side}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(data)
    except OSError as exc:
        raise RuntimeError(f"render: cannot write {path}: {exc}") from exc
