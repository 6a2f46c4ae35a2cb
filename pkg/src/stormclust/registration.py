"""Latitude-crossing selection, time registration, and uniform-grid resampling.

A storm qualifies when its track makes at least one upcrossing of both a
lower latitude and a registration latitude.  Each qualifying storm's clock
is shifted so relative time 0 is its first upcrossing of the registration
latitude, positions are resampled by spherical interpolation onto a uniform
grid anchored at that instant, and the collection can then be cropped to
the largest window on which every trajectory is defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Sequence

import numpy as np

from . import sphere
from .hurdat import Storm

__all__ = [
    "DEFAULT_GRID_STEP",
    "EmptyOverlap",
    "CrossingSpec",
    "RegisteredTrajectory",
    "find_upcrossings",
    "select_and_register",
    "crop_common",
]

# Grid spacing in seconds; best-track fixes are 6-hourly.
DEFAULT_GRID_STEP = 21600


class EmptyOverlap(ValueError):
    """The registered trajectories share no common grid window."""


@dataclass(frozen=True)
class CrossingSpec:
    """Filter thresholds and year window for trajectory selection."""

    lower_lat: float = 20.0
    register_lat: float = 35.0
    year_range: tuple[int, int] = (1950, 2012)

    def __post_init__(self):
        if not (-90.0 < self.lower_lat < 90.0 and -90.0 < self.register_lat < 90.0):
            raise ValueError("crossing latitudes must lie in (-90, 90)")
        if not self.lower_lat < self.register_lat:
            raise ValueError("lower_lat must be south of register_lat")
        if self.year_range[0] > self.year_range[1]:
            raise ValueError("year_range must be nondecreasing")


@dataclass(frozen=True)
class RegisteredTrajectory:
    """A storm track resampled onto a uniform relative-time grid.

    positions[j] is the unit vector at relative time (i_min + j) * grid_step
    seconds, where relative time 0 is registration_time.
    """

    storm_ref: str
    year: int
    registration_time: datetime
    i_min: int
    positions: np.ndarray
    grid_step: int = DEFAULT_GRID_STEP

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] == 0:
            raise ValueError("positions must be a non-empty (n, 3) array")
        object.__setattr__(self, "positions", pos)
        if not self.i_min <= 0 <= self.i_max:
            raise ValueError("grid must contain relative time 0")

    @property
    def i_max(self) -> int:
        return self.i_min + len(self.positions) - 1

    @property
    def grid_indices(self) -> np.ndarray:
        return np.arange(self.i_min, self.i_max + 1)

    def position_at(self, i: int) -> np.ndarray:
        if not self.i_min <= i <= self.i_max:
            raise IndexError(f"grid index {i} outside [{self.i_min}, {self.i_max}]")
        return self.positions[i - self.i_min]

    def restricted(self, i_lo: int, i_hi: int) -> "RegisteredTrajectory":
        """Return a copy covering only grid indices [i_lo, i_hi]."""
        if i_lo < self.i_min or i_hi > self.i_max or i_lo > i_hi:
            raise ValueError("restriction window outside trajectory domain")
        return RegisteredTrajectory(
            storm_ref=self.storm_ref,
            year=self.year,
            registration_time=self.registration_time,
            i_min=i_lo,
            positions=self.positions[i_lo - self.i_min : i_hi - self.i_min + 1],
            grid_step=self.grid_step,
        )


def find_upcrossings(storm: Storm, lat: float) -> list[tuple[int, datetime]]:
    """Locate the upcrossings of a latitude along a storm's raw track.

    A segment (p_i, p_{i+1}) counts when latitude(p_i) < lat <= latitude(p_{i+1});
    the crossing time comes from linear interpolation of latitude in time.
    Returns (segment index, absolute crossing time) pairs in track order.
    """
    pts = storm.points
    if len(pts) < 2:
        raise ValueError("storm needs at least 2 fixes to test for crossings")
    out = []
    for i in range(len(pts) - 1):
        lat0, lat1 = pts[i].latitude, pts[i + 1].latitude
        if lat0 < lat <= lat1:
            frac = (lat - lat0) / (lat1 - lat0)
            t0, t1 = pts[i].timestamp, pts[i + 1].timestamp
            out.append((i, t0 + (t1 - t0) * frac))
    return out


def _resample(storm: Storm, registration_time: datetime, grid_step: int) -> tuple[int, np.ndarray]:
    """Slerp the raw fixes onto the relative grid; returns (i_min, positions)."""
    pts = storm.points
    rel = np.array([(p.timestamp - registration_time).total_seconds() for p in pts])
    lats = np.array([p.latitude for p in pts])
    lons = np.array([p.longitude for p in pts])
    raw = sphere.from_latlon(lats, lons)

    # Largest grid range inside the raw span; the epsilon absorbs rounding so
    # a grid time landing exactly on a raw fix is kept.
    i_min = math.ceil(rel[0] / grid_step - 1e-9)
    i_max = math.floor(rel[-1] / grid_step + 1e-9)
    grid = np.arange(i_min, i_max + 1) * float(grid_step)

    seg = np.clip(np.searchsorted(rel, grid, side="right") - 1, 0, len(pts) - 2)
    span = rel[seg + 1] - rel[seg]
    frac = np.clip((grid - rel[seg]) / span, 0.0, 1.0)
    positions = sphere.slerp(raw[seg], raw[seg + 1], frac)
    return i_min, positions


def select_and_register(
    storms: Sequence[Storm],
    spec: Optional[CrossingSpec] = None,
    grid_step: int = DEFAULT_GRID_STEP,
) -> list[RegisteredTrajectory]:
    """Filter storms by the crossing criteria and register their clocks.

    Keeps storms inside spec.year_range whose tracks upcross both
    spec.lower_lat and spec.register_lat; each is registered at its first
    upcrossing of spec.register_lat and resampled onto the uniform grid.
    """
    spec = spec or CrossingSpec()
    out = []
    for storm in storms:
        if not spec.year_range[0] <= storm.year <= spec.year_range[1]:
            continue
        if len(storm.points) < 2:
            continue
        if not find_upcrossings(storm, spec.lower_lat):
            continue
        register = find_upcrossings(storm, spec.register_lat)
        if not register:
            continue
        registration_time = register[0][1]
        i_min, positions = _resample(storm, registration_time, grid_step)
        out.append(
            RegisteredTrajectory(
                storm_ref=storm.storm_id,
                year=storm.year,
                registration_time=registration_time,
                i_min=i_min,
                positions=positions,
                grid_step=grid_step,
            )
        )
    return out


def crop_common(
    trajs: Sequence[RegisteredTrajectory],
) -> tuple[list[RegisteredTrajectory], tuple[int, int]]:
    """Restrict every trajectory to the collection's common grid window."""
    if not trajs:
        raise ValueError("crop_common needs at least one trajectory")
    i_lo = max(t.i_min for t in trajs)
    i_hi = min(t.i_max for t in trajs)
    if i_lo > i_hi:
        raise EmptyOverlap(f"no common grid window: [{i_lo}, {i_hi}] is empty")
    return [t.restricted(i_lo, i_hi) for t in trajs], (i_lo, i_hi)
