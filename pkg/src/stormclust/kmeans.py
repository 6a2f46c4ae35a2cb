"""Cosine-barycentre k-means for registered trajectories.

Trajectory distance is the grid-averaged cosine energy; a cluster centroid
is the pointwise cosine barycentre of its members.  Lloyd's algorithm runs
a fixed number of independent restarts and keeps the best, so results are
fully determined by the master seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import sphere
from .registration import RegisteredTrajectory

__all__ = [
    "MAX_ITERATIONS",
    "GridMismatch",
    "TooFewTrajectories",
    "Clustering",
    "traj_distance",
    "barycentre_trajectory",
    "lloyd_kmeans",
    "order_west_to_east",
    "rms_distances",
]

# Safety cap; assignment convergence is typical well before this.
MAX_ITERATIONS = 100


class GridMismatch(ValueError):
    """Trajectories do not share an identical grid domain."""


class TooFewTrajectories(ValueError):
    """Fewer trajectories than requested clusters."""


@dataclass(frozen=True)
class Clustering:
    """Result of a k-means run on a common-grid trajectory collection.

    centroids has shape (k, n, 3) over the shared grid [grid_i_min, ...];
    ordering maps each raw (restart-order) centroid index to its final
    label, and is the identity until order_west_to_east is applied.
    histories holds the per-iteration objective of every restart.
    """

    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    objective: float
    seed: int
    restarts: int
    ordering: tuple[int, ...]
    grid_i_min: int
    grid_step: int
    histories: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        assignments = np.asarray(self.assignments, dtype=int)
        object.__setattr__(self, "assignments", assignments)
        if assignments.size and not (
            (0 <= assignments).all() and (assignments < self.k).all()
        ):
            raise ValueError("assignments must lie in [0, k)")
        if self.objective < 0:
            raise ValueError("objective must be nonnegative")
        if self.centroids.shape[0] != self.k:
            raise ValueError("centroid count must equal k")

    @property
    def sizes(self) -> np.ndarray:
        """Member count per cluster label."""
        return np.bincount(self.assignments, minlength=self.k)


def _common_grid(trajs: Sequence[RegisteredTrajectory]) -> tuple[int, int, int]:
    """Validate that all trajectories share one grid; returns (i_min, n, step)."""
    first = trajs[0]
    for t in trajs[1:]:
        if (
            t.i_min != first.i_min
            or len(t.positions) != len(first.positions)
            or t.grid_step != first.grid_step
        ):
            raise GridMismatch(
                f"trajectory {t.storm_ref} grid [{t.i_min}, {t.i_max}] step {t.grid_step} "
                f"differs from [{first.i_min}, {first.i_max}] step {first.grid_step}"
            )
    return first.i_min, len(first.positions), first.grid_step


def traj_distance(a: RegisteredTrajectory, b: RegisteredTrajectory) -> float:
    """Mean cosine energy between two trajectories over their shared grid."""
    _common_grid([a, b])
    return float(np.mean(sphere.cosine_energy(a.positions, b.positions)))


def _pointwise_barycentre(stack: np.ndarray, i_min: int) -> np.ndarray:
    """Barycentre of a (m, n, 3) member stack at each of the n grid times."""
    mean = stack.mean(axis=0)
    norms = np.linalg.norm(mean, axis=-1)
    if (norms < sphere.DEGENERATE_NORM_TOL).any():
        worst = int(np.argmin(norms))
        raise sphere.DegenerateMean(float(norms[worst]), grid_index=i_min + worst)
    return mean / norms[:, None]


def barycentre_trajectory(members: Sequence[RegisteredTrajectory]) -> np.ndarray:
    """Pointwise cosine barycentre of trajectories on a common grid.

    Returns the centroid as an (n, 3) array of unit vectors.  Raises
    DegenerateMean, tagged with the offending grid index, if the member
    positions at some time average to nearly zero.
    """
    if not members:
        raise ValueError("barycentre_trajectory needs at least one member")
    i_min, _, _ = _common_grid(members)
    stack = np.stack([m.positions for m in members])
    return _pointwise_barycentre(stack, i_min)


def _energy_matrix(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Mean cosine energy of each trajectory (rows) to each centroid (cols)."""
    n_grid = X.shape[1]
    dots = np.einsum("itd,jtd->ij", X, centroids) / n_grid
    return np.clip(1.0 - dots, 0.0, 2.0)


def _update_centroids(
    X: np.ndarray, assign: np.ndarray, k: int, i_min: int
) -> np.ndarray:
    """Barycentre update with deterministic repair of emptied clusters."""
    centroids = np.zeros((k, X.shape[1], 3))
    empty = []
    for j in range(k):
        members = X[assign == j]
        if len(members) == 0:
            empty.append(j)
        else:
            centroids[j] = _pointwise_barycentre(members, i_min)
    if empty:
        # Reseed each emptied cluster with the trajectory farthest from its
        # assigned centroid; claimed trajectories cannot be picked twice.
        gaps = _energy_matrix(X, centroids)[np.arange(len(X)), assign]
        for j in empty:
            far = int(np.argmax(gaps))
            centroids[j] = X[far]
            gaps[far] = -np.inf
    return centroids


def lloyd_kmeans(
    trajs: Sequence[RegisteredTrajectory],
    k: int,
    restarts: int = 10,
    seed: int = 0,
) -> Clustering:
    """Best-of-restarts Lloyd's k-means under the trajectory cosine distance.

    Each restart draws k distinct trajectories as initial centroids from its
    own RNG stream (master seed XOR restart index), then alternates nearest
    centroid assignment (ties to the lowest index) with barycentre updates
    until assignments stabilize or MAX_ITERATIONS is reached.  The restart
    with the smallest objective wins; ties go to the lowest restart index.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if len(trajs) < k:
        raise TooFewTrajectories(f"need at least {k} trajectories, have {len(trajs)}")
    i_min, _, grid_step = _common_grid(trajs)
    X = np.stack([t.positions for t in trajs])
    n = len(trajs)

    best = None
    histories = []
    for r in range(restarts):
        rng = np.random.default_rng(seed ^ r)
        centroids = X[rng.choice(n, size=k, replace=False)].copy()
        assign = None
        history = []
        for _ in range(MAX_ITERATIONS):
            energies = _energy_matrix(X, centroids)
            new_assign = energies.argmin(axis=1)
            if assign is not None and np.array_equal(new_assign, assign):
                break
            assign = new_assign
            centroids = _update_centroids(X, assign, k, i_min)
            objective = float(
                _energy_matrix(X, centroids)[np.arange(n), assign].sum()
            )
            history.append(objective)
        histories.append(tuple(history))
        if best is None or history[-1] < best[0]:
            best = (history[-1], assign, centroids)

    objective, assign, centroids = best
    return Clustering(
        k=k,
        assignments=assign,
        centroids=centroids,
        objective=objective,
        seed=seed,
        restarts=restarts,
        ordering=tuple(range(k)),
        grid_i_min=i_min,
        grid_step=grid_step,
        histories=tuple(histories),
    )


def _first_crossing_longitude(centroid: np.ndarray, register_lat: float) -> float:
    """Longitude where a centroid track first upcrosses register_lat.

    Returns NaN when the cropped track never upcrosses; the caller then
    falls back to the longitude at relative time 0.
    """
    lats, lons = sphere.to_latlon(centroid)
    for i in range(len(lats) - 1):
        if lats[i] < register_lat <= lats[i + 1]:
            frac = (register_lat - lats[i]) / (lats[i + 1] - lats[i])
            point = sphere.slerp(centroid[i], centroid[i + 1], frac)
            return float(sphere.to_latlon(point)[1])
    return np.nan


def order_west_to_east(clustering: Clustering, register_lat: float = 35.0) -> Clustering:
    """Relabel clusters west to east by centroid crossing longitude.

    Each centroid is keyed by the longitude of its first upcrossing of
    register_lat, falling back to its longitude at relative time 0; label 0
    becomes the most westerly.  Partition and objective are unchanged.
    """
    k = clustering.k
    zero_idx = -clustering.grid_i_min
    keys = np.empty(k)
    for j in range(k):
        lon = _first_crossing_longitude(clustering.centroids[j], register_lat)
        if np.isnan(lon):
            lon = float(sphere.to_latlon(clustering.centroids[j][zero_idx])[1])
        keys[j] = lon
    west_to_east = np.argsort(keys, kind="stable")
    perm = np.empty(k, dtype=int)
    perm[west_to_east] = np.arange(k)
    return Clustering(
        k=k,
        assignments=perm[clustering.assignments],
        centroids=clustering.centroids[west_to_east],
        objective=clustering.objective,
        seed=clustering.seed,
        restarts=clustering.restarts,
        ordering=tuple(int(perm[j]) for j in clustering.ordering),
        grid_i_min=clustering.grid_i_min,
        grid_step=clustering.grid_step,
        histories=clustering.histories,
    )


def rms_distances(
    clustering: Clustering, trajs: Sequence[RegisteredTrajectory]
) -> list[list[float]]:
    """Per-cluster RMS great-circle distances, in km, of members to centroids."""
    if len(trajs) != len(clustering.assignments):
        raise ValueError("trajectory list and assignments disagree in length")
    out: list[list[float]] = [[] for _ in range(clustering.k)]
    for traj, label in zip(trajs, clustering.assignments):
        angles = sphere.gc_distance(traj.positions, clustering.centroids[label])
        rms = float(np.sqrt(np.mean(angles**2)) * sphere.EARTH_RADIUS_KM)
        out[int(label)].append(rms)
    return out
