"""Plot-ready exports: GeoJSON tracks and JSON clustering summaries.

GeoJSON uses [longitude, latitude] coordinate order.  All emitters produce plain dicts; writing with sorted keys keeps
the serialized artifacts byte-stable across runs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import sphere
from .kmeans import Clustering
from .registration import RegisteredTrajectory

__all__ = [
    "track_coordinates",
    "trajectory_feature",
    "centroid_feature",
    "feature_collection",
    "clustering_summary",
]


def track_coordinates(positions: np.ndarray) -> list:
    """Unit vectors (n, 3) -> GeoJSON [lon, lat] coordinate pairs."""
    lats, lons = sphere.to_latlon(positions)
    return [[float(lon), float(lat)] for lat, lon in zip(lats, lons)]


def trajectory_feature(traj: RegisteredTrajectory, label=None) -> dict:
    """A registered trajectory as a GeoJSON LineString feature."""
    properties = {
        "storm_ref": traj.storm_ref,
        "year": traj.year,
        "registration_time": traj.registration_time.isoformat(),
        "grid_step_seconds": traj.grid_step,
        "i_min": traj.i_min,
        "i_max": traj.i_max,
    }
    if label is not None:
        properties["cluster"] = int(label)
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": track_coordinates(traj.positions)},
        "properties": properties,
    }


def centroid_feature(
    label: int, positions: np.ndarray, i_min: int, grid_step: int, size: int
) -> dict:
    """A centroid trajectory as a GeoJSON LineString feature."""
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": track_coordinates(positions)},
        "properties": {
            "cluster": int(label),
            "size": int(size),
            "grid_step_seconds": int(grid_step),
            "i_min": int(i_min),
            "i_max": int(i_min + len(positions) - 1),
        },
    }


def feature_collection(features: Sequence[dict]) -> dict:
    return {"type": "FeatureCollection", "features": list(features)}


def clustering_summary(clustering: Clustering) -> dict:
    """Clustering as a JSON-ready dict (assignments, objective, seed, sizes)."""
    return {
        "k": clustering.k,
        "assignments": [int(a) for a in clustering.assignments],
        "sizes": [int(s) for s in clustering.sizes],
        "objective": clustering.objective,
        "seed": clustering.seed,
        "restarts": clustering.restarts,
        "ordering": list(clustering.ordering),
        "grid": {"i_min": clustering.grid_i_min, "step_seconds": clustering.grid_step},
    }
