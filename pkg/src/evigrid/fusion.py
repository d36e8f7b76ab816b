"""Temporal fusion of sensor evidence, map priors and the perception grid.

Each epoch, per cell:

1. refine the sensor cell onto the 5-class frame;
2. inject the map prior with Dempster's rule;
3. discount the stored perception cell (information ageing);
4. fuse both with a modified conjunctive rule that routes the
   free-then-occupied conflict to the moving class and the
   occupied-then-free conflict to ignorance;
5. update the per-cell occupancy counter from the observed conflict;
6. transfer counter-confirmed mass from moving-containing sets to their
   moving-free subsets (a sustained occupancy is a stopped object).

``step`` runs this vectorised over the whole grid; ``step_cell`` is the
per-cell reference the grid kernel is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from . import frames
from .dst import (MassFunction, TOTAL_CONFLICT_TOLERANCE, TotalConflictError,
                  combine_dempster, discount, pignistic, refine, specialize)
from .grid import EvidentialGrid, PerceptionGrid
from .map_ingest import context_of_cell

DECISION_LABELS = ("F", "I", "U", "S", "M", "UNKNOWN")
UNKNOWN = "UNKNOWN"

# Subsets counting as "occupied" for the counter: non-empty subsets of the
# non-free classes.
_OCCUPIED_SUBSETS = tuple(
    a for a in range(1, frames.PERCEPTION_FRAME.size) if not a & frames.PG_FREE)

# Moving-containing subsets affected by the counter specialization.  The
# singleton {M} is deliberately excluded: stripping M from it would dump the
# mass on the empty set.
_MOVING_SUPERSETS = tuple(
    a for a in range(frames.PERCEPTION_FRAME.size)
    if a & frames.PG_MOVING and a != frames.PG_MOVING)

_CONTEXTS = ("building", "road", "intermediate")


@dataclass(frozen=True)
class FusionParams:
    """Tuning knobs of the temporal fusion, all in [0, 1].

    The defaults are implementation defaults, tuned on the shipped synthetic
    scenarios; they are not authoritative values.
    """

    ageing_rate: float = 0.05        # discount applied to the stored grid each epoch
    counter_inc: float = 0.2         # occupancy counter increment
    counter_dec: float = 0.4         # occupancy counter decrement
    occupancy_threshold: float = 0.6  # min occupied aggregate to count an epoch
    conflict_threshold: float = 0.3   # max tolerated appearance+disappearance conflict
    # Optional per-map-context ageing rates (keys: building, road,
    # intermediate); missing contexts fall back to ageing_rate.
    ageing_by_context: Optional[Mapping[str, float]] = None

    def __post_init__(self):
        for name in ("ageing_rate", "counter_inc", "counter_dec",
                     "occupancy_threshold", "conflict_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.ageing_by_context:
            for key, value in self.ageing_by_context.items():
                if key not in _CONTEXTS:
                    raise ValueError(f"unknown ageing context {key!r}")
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"ageing rate for {key!r} must be in [0, 1]")

    def ageing_for(self, context: str) -> float:
        if self.ageing_by_context:
            return self.ageing_by_context.get(context, self.ageing_rate)
        return self.ageing_rate


@dataclass(frozen=True)
class ConflictPair:
    """Partition of the conjunctive empty-set mass of one fusion.

    ``free_to_occupied`` signals an appearing object, ``occupied_to_free`` a
    disappearing one; ``residual`` collects the remaining empty intersections
    (e.g. infrastructure against stopped).
    """

    free_to_occupied: float
    occupied_to_free: float
    residual: float

    @property
    def total(self) -> float:
        return self.free_to_occupied + self.occupied_to_free + self.residual

    @property
    def dynamic(self) -> float:
        """Appearance plus disappearance conflict, as seen by the counter."""
        return self.free_to_occupied + self.occupied_to_free


def _conflict_kind(b: int, c: int) -> int:
    """Classify an empty product term: 0 appear, 1 disappear, 2 residual.

    `b` comes from the stored grid, `c` from the sensor side; their
    intersection is empty.
    """
    b_free = bool(b & frames.PG_FREE)
    c_free = bool(c & frames.PG_FREE)
    if b_free and c and not c_free:
        return 0
    if c_free and b and not b_free:
        return 1
    return 2


def refine_sg(m_sg: MassFunction) -> MassFunction:
    """Carry a sensor-frame mass function onto the 5-class frame."""
    return refine(m_sg, frames.SENSOR_REFINING)


def combine_prior(m_sensor: MassFunction, m_map: MassFunction) -> MassFunction:
    """Inject the map prior into refined sensor evidence (Dempster's rule)."""
    return combine_dempster(m_sensor, m_map)


def conflict_masses(m_prev: MassFunction, m_sensor: MassFunction) -> ConflictPair:
    """Partition the conjunctive conflict of (stored grid, sensor evidence)."""
    parts = [0.0, 0.0, 0.0]
    for b, vb in m_prev.focal():
        for c, vc in m_sensor.focal():
            if b & c == 0:
                parts[_conflict_kind(b, c)] += vb * vc
    return ConflictPair(*parts)


def fuse_pg(m_prev: MassFunction, m_sensor: MassFunction) -> tuple[MassFunction, ConflictPair]:
    """Modified conjunctive rule adapted to mobile object detection.

    Equal to the conjunctive rule on non-conflicting terms; the appearance
    conflict lands on the moving singleton, the disappearance and residual
    conflict on the full frame (Yager-style), so the output is normal by
    construction.
    """
    frame = m_prev.frame
    out = np.zeros(frame.size)
    parts = [0.0, 0.0, 0.0]
    for b, vb in m_prev.focal():
        for c, vc in m_sensor.focal():
            a = b & c
            term = vb * vc
            if a:
                out[a] += term
            else:
                parts[_conflict_kind(b, c)] += term
    out[frames.PG_MOVING] += parts[0]
    out[frames.PG_OMEGA] += parts[1] + parts[2]
    return MassFunction(frame, out), ConflictPair(*parts)


def update_accumulator(counter_prev: float, m_new: MassFunction,
                       conflicts: ConflictPair, params: FusionParams) -> float:
    """Advance the occupancy counter from the fused cell and its conflict."""
    occupied = sum(m_new.masses[a] for a in _OCCUPIED_SUBSETS)
    if conflicts.dynamic > params.conflict_threshold:
        return max(0.0, counter_prev - params.counter_dec)
    if occupied >= params.occupancy_threshold:
        return min(1.0, counter_prev + params.counter_inc)
    return counter_prev


def specialization_matrix(counter: float) -> np.ndarray:
    """Counter-driven specialization on the 5-class frame.

    Every moving-containing set (except the moving singleton) passes a
    fraction `counter` of its mass to the same set without the moving class.
    """
    if not 0.0 <= counter <= 1.0:
        raise ValueError(f"counter must be in [0, 1], got {counter}")
    size = frames.PERCEPTION_FRAME.size
    s = np.eye(size)
    for a in _MOVING_SUPERSETS:
        s[a, a] = 1.0 - counter
        s[a & ~frames.PG_MOVING, a] = counter
    return s


def apply_accumulator_specialization(m: MassFunction, counter: float) -> MassFunction:
    return specialize(m, specialization_matrix(counter))


def decide(m: MassFunction, unknown_threshold: float) -> str:
    """Classify a cell by the maximum pignistic probability.

    Below the threshold the cell is UNKNOWN; ties break in frame label order.
    """
    bet = pignistic(m)
    k = int(np.argmax(bet))
    if bet[k] < unknown_threshold:
        return UNKNOWN
    return m.frame.labels[k]


def step_cell(m_prev: MassFunction, counter_prev: float,
              m_sg: MassFunction, m_gg: MassFunction,
              params: FusionParams,
              context: str = "intermediate") -> tuple[MassFunction, float, ConflictPair]:
    """Reference per-cell epoch update; mirrors the vectorised ``step``."""
    m_prior = combine_prior(refine_sg(m_sg), m_gg)
    m_aged = discount(m_prev, params.ageing_for(context))
    m_new, conflicts = fuse_pg(m_aged, m_prior)
    counter = update_accumulator(counter_prev, m_new, conflicts, params)
    m_out = apply_accumulator_specialization(m_new, counter)
    return m_out, counter, conflicts


# --- vectorised grid kernel -------------------------------------------------

def _conjunctive_rows(m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    """Row-wise conjunctive combination of two (N, 2**n) mass arrays."""
    out = np.zeros_like(m1)
    for b in np.flatnonzero(m1.any(axis=0)):
        col = m1[:, int(b)]
        for c in np.flatnonzero(m2.any(axis=0)):
            out[:, int(b) & int(c)] += col * m2[:, int(c)]
    return out


def _dempster_rows(m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    out = _conjunctive_rows(m1, m2)
    conflict = out[:, 0]
    if np.any(conflict >= 1.0 - TOTAL_CONFLICT_TOLERANCE):
        cell = int(np.argmax(conflict))
        raise TotalConflictError(f"total conflict with map prior at cell index {cell}")
    out[:, 0] = 0.0
    out /= out.sum(axis=1, keepdims=True)
    return out


def _fuse_rows(prev: np.ndarray, sens: np.ndarray):
    """Row-wise modified conjunctive rule with conflict partitioning."""
    n = prev.shape[0]
    out = np.zeros_like(prev)
    parts = np.zeros((3, n))
    for b in np.flatnonzero(prev.any(axis=0)):
        b = int(b)
        col = prev[:, b]
        for c in np.flatnonzero(sens.any(axis=0)):
            c = int(c)
            term = col * sens[:, c]
            a = b & c
            if a:
                out[:, a] += term
            else:
                parts[_conflict_kind(b, c)] += term
    out[:, frames.PG_MOVING] += parts[0]
    out[:, frames.PG_OMEGA] += parts[1] + parts[2]
    out /= out.sum(axis=1, keepdims=True)
    return out, parts[0], parts[1], parts[2]


def _ageing_vector(gg: EvidentialGrid, params: FusionParams) -> np.ndarray:
    spec = gg.spec
    n = spec.width * spec.height
    if not params.ageing_by_context:
        return np.full(n, params.ageing_rate)
    alpha = np.empty(n)
    for j in range(spec.height):
        for i in range(spec.width):
            alpha[j * spec.width + i] = params.ageing_for(context_of_cell(gg, i, j))
    return alpha


def step_with_conflicts(pg: PerceptionGrid, sg: EvidentialGrid, gg: EvidentialGrid,
                        params: FusionParams) -> tuple[PerceptionGrid, ConflictPair]:
    """One fusion epoch over the whole grid.

    Returns the new perception grid plus the grid-total conflict partition.
    Cells without sensor coverage still age; epochs are strictly sequential.
    """
    if not (pg.spec == sg.spec == gg.spec):
        raise ValueError("perception, sensor and map grids must share a GridSpec")
    if sg.frame != frames.SENSOR_FRAME:
        raise ValueError("sensor grid must be on the free/occupied frame")
    if pg.frame != frames.PERCEPTION_FRAME or gg.frame != frames.PERCEPTION_FRAME:
        raise ValueError("perception and map grids must be on the 5-class frame")

    spec = pg.spec
    n = spec.width * spec.height
    size = frames.PERCEPTION_FRAME.size
    # reshape in (j, i) raster order so the context vector lines up
    sg_m = sg.masses.transpose(1, 0, 2).reshape(n, frames.SENSOR_FRAME.size)
    gg_m = gg.masses.transpose(1, 0, 2).reshape(n, size)
    prev = pg.masses.transpose(1, 0, 2).reshape(n, size).copy()
    counter_prev = pg.counter.transpose(1, 0).reshape(n)

    refined = np.zeros((n, size))
    refined[:, frames.PG_FREE] = sg_m[:, frames.SG_FREE]
    refined[:, frames.OCCUPIED_SET] = sg_m[:, frames.SG_OCCUPIED]
    refined[:, frames.PG_OMEGA] = sg_m[:, frames.SG_OMEGA]

    prior = _dempster_rows(refined, gg_m)

    alpha = _ageing_vector(gg, params)
    prev *= (1.0 - alpha)[:, None]
    prev[:, frames.PG_OMEGA] += alpha

    fused, appear, disappear, residual = _fuse_rows(prev, prior)

    occupied = fused[:, list(_OCCUPIED_SUBSETS)].sum(axis=1)
    dynamic = appear + disappear
    counter = np.where(
        dynamic > params.conflict_threshold,
        np.maximum(0.0, counter_prev - params.counter_dec),
        np.where(occupied >= params.occupancy_threshold,
                 np.minimum(1.0, counter_prev + params.counter_inc),
                 counter_prev))

    for a in _MOVING_SUPERSETS:
        moved = counter * fused[:, a]
        fused[:, a] -= moved
        fused[:, a & ~frames.PG_MOVING] += moved

    out = PerceptionGrid(spec, frames.PERCEPTION_FRAME)
    out.masses = fused.reshape(spec.height, spec.width, size).transpose(1, 0, 2)
    out.counter = counter.reshape(spec.height, spec.width).transpose(1, 0)
    totals = ConflictPair(float(appear.sum()), float(disappear.sum()),
                          float(residual.sum()))
    return out, totals


def step(pg: PerceptionGrid, sg: EvidentialGrid, gg: EvidentialGrid,
         params: FusionParams) -> PerceptionGrid:
    return step_with_conflicts(pg, sg, gg, params)[0]


def pignistic_grid(pg: EvidentialGrid) -> np.ndarray:
    """Per-cell pignistic probabilities, shape (width, height, n_labels)."""
    frame = pg.frame
    weights = np.zeros((frame.size, frame.n))
    for a in range(1, frame.size):
        share = 1.0 / a.bit_count()
        for k in range(frame.n):
            if a >> k & 1:
                weights[a, k] = share
    return pg.masses @ weights


def decide_grid(pg: EvidentialGrid, unknown_threshold: float) -> np.ndarray:
    """Per-cell decision codes, indices into DECISION_LABELS."""
    bet = pignistic_grid(pg)
    codes = bet.argmax(axis=2).astype(np.int8)
    codes[bet.max(axis=2) < unknown_threshold] = len(DECISION_LABELS) - 1
    return codes
