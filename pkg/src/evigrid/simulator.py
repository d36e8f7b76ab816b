"""Synthetic worlds and lidar scans for end-to-end pipeline runs.

Scenario files are JSON documents describing a map, a vehicle trajectory,
tracked objects and the sensor/fusion parameters; see the shipped files under
``scenarios/`` for the schema.  Ray casting is exact and noise-free by
default; an optional uniform range jitter sits behind a seeded RNG.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from . import frames
from .fusion import (ConflictPair, DECISION_LABELS, FusionParams, decide_grid,
                     step_with_conflicts)
from .grid import GridSpec, PerceptionGrid
from .map_ingest import MapConfidence, VectorMap, load_map, rasterize_gg
from .sensor import Beam, LidarScan, Pose, SensorGridParams, build_sg, normalize_heading

# Ignore intersections closer than this along the ray: the emitter itself
# must not count as an obstacle when it sits exactly on a segment.
_RAY_EPS = 1e-9


class ScenarioError(ValueError):
    """A scenario file could not be parsed or is inconsistent."""


@dataclass(frozen=True)
class TimedPose:
    t: float
    pose: Pose


def _wrap_angle_diff(a: float, b: float) -> float:
    return normalize_heading(b - a)


def interpolate_pose(trajectory: tuple[TimedPose, ...], t: float) -> Pose:
    """Piecewise-linear pose at time t, clamped to the trajectory ends.

    Headings interpolate along the shorter arc.
    """
    if t <= trajectory[0].t:
        return trajectory[0].pose
    if t >= trajectory[-1].t:
        return trajectory[-1].pose
    for a, b in zip(trajectory, trajectory[1:]):
        if t <= b.t:
            frac = (t - a.t) / (b.t - a.t)
            return Pose(
                a.pose.x + frac * (b.pose.x - a.pose.x),
                a.pose.y + frac * (b.pose.y - a.pose.y),
                a.pose.heading + frac * _wrap_angle_diff(a.pose.heading, b.pose.heading))
    return trajectory[-1].pose  # unreachable, timestamps are increasing


@dataclass(frozen=True)
class ObjectTrack:
    """A rectangular object, either waypoint-driven or parked.

    Waypoint tracks exist from their first to their last timestamp.  Static
    tracks exist in [appear_t, disappear_t); stop_t is a scenario annotation
    only (a static track never moves).
    """

    length: float
    width: float
    waypoints: tuple[TimedPose, ...] = ()
    pose: Optional[Pose] = None
    appear_t: float = -math.inf
    stop_t: Optional[float] = None
    disappear_t: float = math.inf

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ScenarioError("object footprint dimensions must be positive")
        if bool(self.waypoints) == (self.pose is not None):
            raise ScenarioError("object needs either waypoints or a static pose")

    def pose_at(self, t: float) -> Optional[Pose]:
        if self.waypoints:
            if not self.waypoints[0].t <= t <= self.waypoints[-1].t:
                return None
            return interpolate_pose(self.waypoints, t)
        if self.appear_t <= t < self.disappear_t:
            return self.pose
        return None

    def polygon_at(self, t: float) -> Optional[np.ndarray]:
        """Footprint corners at time t, or None when absent."""
        pose = self.pose_at(t)
        if pose is None:
            return None
        hl, hw = self.length / 2.0, self.width / 2.0
        c, s = math.cos(pose.heading), math.sin(pose.heading)
        corners = np.array([(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)])
        rot = np.array([(c, -s), (s, c)])
        return corners @ rot.T + (pose.x, pose.y)


@dataclass(frozen=True)
class SensorSpec:
    beam_count: int = 181
    fov: float = math.pi
    max_range: float = 30.0
    rate: float = 10.0
    range_jitter: float = 0.0

    def __post_init__(self):
        if self.beam_count < 1:
            raise ScenarioError("beam_count must be >= 1")
        if self.max_range <= 0 or self.rate <= 0:
            raise ScenarioError("max_range and rate must be positive")
        if self.range_jitter < 0:
            raise ScenarioError("range_jitter must be >= 0")

    def bearings(self) -> np.ndarray:
        if self.beam_count == 1:
            return np.zeros(1)
        return np.linspace(-self.fov / 2.0, self.fov / 2.0, self.beam_count)


@dataclass
class ScenarioConfig:
    map_path: Path
    grid: GridSpec
    trajectory: tuple[TimedPose, ...]
    sensor: SensorSpec
    sensor_model: SensorGridParams
    map_confidence: MapConfidence
    fusion: FusionParams
    epochs: int
    objects: list[ObjectTrack] = field(default_factory=list)
    decision_threshold: float = 0.5

    def __post_init__(self):
        if self.epochs < 1:
            raise ScenarioError("epoch count must be >= 1")
        if not self.trajectory:
            raise ScenarioError("trajectory must contain at least one pose")
        times = [tp.t for tp in self.trajectory]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ScenarioError("trajectory timestamps must be strictly increasing")

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from exc
        try:
            return cls.from_dict(data, base_dir=path.parent)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"scenario {path}: {exc}") from exc

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path = Path(".")) -> "ScenarioConfig":
        def timed_poses(entries):
            return tuple(TimedPose(float(e["t"]),
                                   Pose(float(e["x"]), float(e["y"]), float(e["heading"])))
                         for e in entries)

        objects = []
        for entry in data.get("objects", []):
            kwargs = dict(length=float(entry["length"]), width=float(entry["width"]))
            if "waypoints" in entry:
                kwargs["waypoints"] = timed_poses(entry["waypoints"])
            else:
                p = entry["pose"]
                kwargs["pose"] = Pose(float(p["x"]), float(p["y"]), float(p["heading"]))
                if "appear_t" in entry:
                    kwargs["appear_t"] = float(entry["appear_t"])
                if "stop_t" in entry:
                    kwargs["stop_t"] = float(entry["stop_t"])
                if "disappear_t" in entry:
                    kwargs["disappear_t"] = float(entry["disappear_t"])
            objects.append(ObjectTrack(**kwargs))

        return cls(
            map_path=base_dir / data["map"],
            grid=GridSpec(**data["grid"]),
            trajectory=timed_poses(data["trajectory"]),
            sensor=SensorSpec(**data.get("sensor", {})),
            sensor_model=SensorGridParams(**data.get("sensor_model", {})),
            map_confidence=MapConfidence(**data.get("map_confidence", {})),
            fusion=FusionParams(**data.get("fusion", {})),
            epochs=int(data["epochs"]),
            objects=objects,
            decision_threshold=float(data.get("decision_threshold", 0.5)),
        )


def polygon_segments(polygon: np.ndarray) -> np.ndarray:
    """Edges of a closed polygon as an (k, 4) array of x1,y1,x2,y2."""
    rolled = np.roll(polygon, -1, axis=0)
    return np.hstack([polygon, rolled])


def world_segments(vmap: VectorMap, objects: list[ObjectTrack], t: float) -> np.ndarray:
    """Opaque edges at time t: building walls plus object footprints.

    Roads do not block lidar.
    """
    parts = [polygon_segments(p) for p in vmap.buildings]
    for track in objects:
        poly = track.polygon_at(t)
        if poly is not None:
            parts.append(polygon_segments(poly))
    if not parts:
        return np.empty((0, 4))
    return np.vstack(parts)


def simulate_scan(segments: np.ndarray, pose: Pose, sensor: SensorSpec,
                  rng: Optional[random.Random] = None) -> LidarScan:
    """Cast one beam fan against a set of opaque segments.

    Ranges are exact geometric ray-segment intersections; the same ray
    against the same world always returns the identical range.
    """
    p = np.array([pose.x, pose.y])
    if segments.size:
        a = segments[:, :2]
        v = segments[:, 2:] - a
        w = a - p
    beams = []
    for bearing in sensor.bearings():
        angle = pose.heading + bearing
        d = np.array([math.cos(angle), math.sin(angle)])
        rng_t = math.inf
        if segments.size:
            denom = d[0] * v[:, 1] - d[1] * v[:, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_ray = (w[:, 0] * v[:, 1] - w[:, 1] * v[:, 0]) / denom
                u = (w[:, 0] * d[1] - w[:, 1] * d[0]) / denom
            valid = (denom != 0.0) & (t_ray > _RAY_EPS) & (u >= 0.0) & (u <= 1.0)
            if valid.any():
                rng_t = float(t_ray[valid].min())
        if rng is not None and sensor.range_jitter > 0.0 and math.isfinite(rng_t):
            rng_t += rng.uniform(-sensor.range_jitter, sensor.range_jitter)
            rng_t = max(rng_t, _RAY_EPS)
        if rng_t <= sensor.max_range:
            beams.append(Beam(float(bearing), rng_t, True))
        else:
            beams.append(Beam(float(bearing), sensor.max_range, False))
    return LidarScan(tuple(beams), sensor.max_range)


@dataclass
class EpochResult:
    epoch: int
    time: float
    pose: Pose
    scan: LidarScan
    pg: PerceptionGrid
    conflicts: ConflictPair
    stats: dict


def epoch_stats(epoch: int, pg: PerceptionGrid, conflicts: ConflictPair,
                threshold: float) -> dict:
    codes = decide_grid(pg, threshold)
    counts = np.bincount(codes.ravel(), minlength=len(DECISION_LABELS))
    return {
        "t": epoch,
        "cells_F": int(counts[0]),
        "cells_I": int(counts[1]),
        "cells_U": int(counts[2]),
        "cells_S": int(counts[3]),
        "cells_M": int(counts[4]),
        "cells_unknown": int(counts[5]),
        "total_conflict_fo": conflicts.free_to_occupied,
        "total_conflict_of": conflicts.occupied_to_free,
        "total_residual": conflicts.residual,
    }


def run_scenario(cfg: ScenarioConfig,
                 seed: Optional[int] = None) -> Iterator[EpochResult]:
    """Drive the full pipeline: map prior once, then scan/fuse per epoch."""
    vmap = load_map(cfg.map_path)
    gg = rasterize_gg(vmap, cfg.map_confidence, cfg.grid)
    pg = PerceptionGrid(cfg.grid, frames.PERCEPTION_FRAME)
    rng = random.Random(seed) if seed is not None else None
    for epoch in range(cfg.epochs):
        t = epoch / cfg.sensor.rate
        pose = interpolate_pose(cfg.trajectory, t)
        segments = world_segments(vmap, cfg.objects, t)
        scan = simulate_scan(segments, pose, cfg.sensor, rng)
        sg = build_sg(scan, pose, cfg.grid, cfg.sensor_model)
        pg, conflicts = step_with_conflicts(pg, sg, gg, cfg.fusion)
        stats = epoch_stats(epoch, pg, conflicts, cfg.decision_threshold)
        yield EpochResult(epoch, t, pose, scan, pg, conflicts, stats)


def replay_scans(records: list[dict], cfg_grid: GridSpec, gg, sensor_model: SensorGridParams,
                 fusion: FusionParams, decision_threshold: float) -> Iterator[EpochResult]:
    """Run the pipeline from pre-recorded scan records instead of a simulator.

    Each record is a dict {t, pose: {x, y, heading}, beams: [[bearing, range,
    hit], ...]}; timestamps must be non-decreasing order-wise validated by the
    caller.
    """
    pg = PerceptionGrid(cfg_grid, frames.PERCEPTION_FRAME)
    for epoch, rec in enumerate(records):
        pose = Pose(float(rec["pose"]["x"]), float(rec["pose"]["y"]),
                    float(rec["pose"]["heading"]))
        beams = tuple(Beam(float(b), float(r), bool(h)) for b, r, h in rec["beams"])
        max_range = max((b.range for b in beams), default=1.0)
        max_range = float(rec.get("max_range", max_range))
        scan = LidarScan(beams, max_range)
        sg = build_sg(scan, pose, cfg_grid, sensor_model)
        pg, conflicts = step_with_conflicts(pg, sg, gg, fusion)
        stats = epoch_stats(epoch, pg, conflicts, decision_threshold)
        yield EpochResult(epoch, float(rec["t"]), pose, scan, pg, conflicts, stats)
