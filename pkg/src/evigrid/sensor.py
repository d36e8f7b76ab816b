"""Lidar scan to sensor-grid conversion.

Each beam is walked through the grid with an exact cell-stepping traversal:
cells strictly before the hit point collect free-space evidence, the cell
containing the hit point collects occupied evidence, cells beyond stay
vacuous.  Contributions of multiple beams to one cell are merged with
Dempster's rule, so an occupied verdict is never silently overwritten by a
free verdict from another beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from . import frames
from .dst import TOTAL_CONFLICT_TOLERANCE, TotalConflictError
from .grid import EvidentialGrid, GridSpec

_TAU = 2.0 * math.pi


def normalize_heading(heading: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    h = heading % _TAU
    if h > math.pi:
        h -= _TAU
    return h


@dataclass(frozen=True)
class Pose:
    """Globally referenced vehicle pose; heading counter-clockwise from east."""

    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_heading(self.heading))


class Beam(NamedTuple):
    bearing: float   # radians, sensor frame
    range: float     # metres
    hit: bool


@dataclass(frozen=True)
class LidarScan:
    beams: tuple[Beam, ...]
    max_range: float

    def __post_init__(self):
        if self.max_range <= 0:
            raise ValueError(f"max_range must be > 0, got {self.max_range}")
        object.__setattr__(self, "beams", tuple(Beam(*b) for b in self.beams))
        for k, beam in enumerate(self.beams):
            if beam.hit:
                if not 0.0 < beam.range <= self.max_range:
                    raise ValueError(f"beam {k}: hit range {beam.range} outside (0, max_range]")
            elif beam.range != self.max_range:
                raise ValueError(f"beam {k}: non-hit beams must carry range = max_range")


@dataclass(frozen=True)
class SensorGridParams:
    """Evidence weights of the beam model, each in [0, 1]."""

    free_weight: float = 0.7
    occupied_weight: float = 0.8

    def __post_init__(self):
        for name in ("free_weight", "occupied_weight"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


def traverse_ray(spec: GridSpec, x0: float, y0: float,
                 dx: float, dy: float, length: float) -> list[tuple[int, int]]:
    """In-bounds cells entered by the ray segment, in order along the ray.

    A cell is included when the ray enters it strictly before `length`; exact
    corner hits step diagonally so no zero-dwell cell is reported.
    """
    ox, oy, cs = spec.origin_east, spec.origin_north, spec.cell_size
    t_lo, t_hi = 0.0, length
    for p, d, lo, hi in ((x0, dx, ox, ox + spec.width * cs),
                         (y0, dy, oy, oy + spec.height * cs)):
        if d == 0.0:
            if not lo <= p <= hi:
                return []
        else:
            t1 = (lo - p) / d
            t2 = (hi - p) / d
            if t1 > t2:
                t1, t2 = t2, t1
            t_lo = max(t_lo, t1)
            t_hi = min(t_hi, t2)
    if t_lo >= t_hi:
        return []
    px, py = x0 + t_lo * dx, y0 + t_lo * dy
    fi = (px - ox) / cs
    fj = (py - oy) / cs
    i, j = math.floor(fi), math.floor(fj)
    # Entering exactly on a boundary while moving towards lower indices means
    # the ray is about to leave the floor() cell, not enter it.
    if dx < 0 and fi == i:
        i -= 1
    if dy < 0 and fj == j:
        j -= 1
    i = min(max(i, 0), spec.width - 1)
    j = min(max(j, 0), spec.height - 1)

    if dx > 0:
        si, tx, dtx = 1, (ox + (i + 1) * cs - x0) / dx, cs / dx
    elif dx < 0:
        si, tx, dtx = -1, (ox + i * cs - x0) / dx, -cs / dx
    else:
        si, tx, dtx = 0, math.inf, math.inf
    if dy > 0:
        sj, ty, dty = 1, (oy + (j + 1) * cs - y0) / dy, cs / dy
    elif dy < 0:
        sj, ty, dty = -1, (oy + j * cs - y0) / dy, -cs / dy
    else:
        sj, ty, dty = 0, math.inf, math.inf

    cells: list[tuple[int, int]] = []
    for _ in range(spec.width + spec.height + 2):
        if not (0 <= i < spec.width and 0 <= j < spec.height):
            break
        cells.append((i, j))
        t_next = min(tx, ty)
        if t_next >= t_hi:
            break
        if tx <= t_next:
            tx += dtx
            i += si
        if ty <= t_next:
            ty += dty
            j += sj
    return cells


def _merge_free(cell, weight: float) -> None:
    """Dempster-combine a cell's free/occupied masses with free evidence."""
    f, o, w = cell[frames.SG_FREE], cell[frames.SG_OCCUPIED], cell[frames.SG_OMEGA]
    k = o * weight
    if k >= 1.0 - TOTAL_CONFLICT_TOLERANCE:
        raise TotalConflictError("total conflict between beams in one cell")
    norm = 1.0 - k
    cell[frames.SG_FREE] = (f + w * weight) / norm
    cell[frames.SG_OCCUPIED] = o * (1.0 - weight) / norm
    cell[frames.SG_OMEGA] = w * (1.0 - weight) / norm


def _merge_occupied(cell, weight: float) -> None:
    f, o, w = cell[frames.SG_FREE], cell[frames.SG_OCCUPIED], cell[frames.SG_OMEGA]
    k = f * weight
    if k >= 1.0 - TOTAL_CONFLICT_TOLERANCE:
        raise TotalConflictError("total conflict between beams in one cell")
    norm = 1.0 - k
    cell[frames.SG_OCCUPIED] = (o + w * weight) / norm
    cell[frames.SG_FREE] = f * (1.0 - weight) / norm
    cell[frames.SG_OMEGA] = w * (1.0 - weight) / norm


def build_sg(scan: LidarScan, pose: Pose, spec: GridSpec,
             params: SensorGridParams) -> EvidentialGrid:
    """Convert a scan plus pose into a sensor grid on the free/occupied frame.

    Beams are merged in scan order; the result is invariant under beam
    ordering up to float tolerance because Dempster's rule is commutative
    and associative.
    """
    grid = EvidentialGrid(spec, frames.SENSOR_FRAME)
    masses = grid.masses
    for beam in scan.beams:
        angle = pose.heading + beam.bearing
        dx, dy = math.cos(angle), math.sin(angle)
        cells = traverse_ray(spec, pose.x, pose.y, dx, dy, beam.range)
        if beam.hit:
            end_x = pose.x + beam.range * dx
            end_y = pose.y + beam.range * dy
            hit_cell = spec.world_to_cell(end_x, end_y)
            for c in cells:
                if c == hit_cell:
                    continue
                _merge_free(masses[c], params.free_weight)
            if hit_cell is not None:
                _merge_occupied(masses[hit_cell], params.occupied_weight)
        else:
            for c in cells:
                _merge_free(masses[c], params.free_weight)
    return grid
