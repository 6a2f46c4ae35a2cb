"""Unit-sphere primitives: coordinate conversion, great-circle distance,
cosine energy, spherical interpolation, and cosine barycentres.

Points on the sphere are plain numpy arrays of shape (..., 3) with unit
Euclidean norm.  All functions are stateless and broadcast over leading
dimensions, so they are safe to call from multiple threads.
"""

from __future__ import annotations

import numpy as np

EARTH_RADIUS_KM = 6371.0

# Weighted means with norm below this are treated as ill-posed (e.g. points
# spread uniformly over a great circle, where every point of the sphere
# minimises the cosine energy).
DEGENERATE_NORM_TOL = 1e-9

# Below this angle slerp falls back to normalised linear interpolation,
# which is continuous through a == b.
_SLERP_SMALL_ANGLE = 1e-9


class DomainError(ValueError):
    """Input outside the function's mathematical domain."""


class AntipodalError(ValueError):
    """Slerp between antipodal points: the minor arc is not unique."""


class DegenerateMean(ValueError):
    """Weighted Euclidean mean too close to the origin to project."""

    def __init__(self, norm, grid_index=None):
        self.norm = norm
        self.grid_index = grid_index
        where = "" if grid_index is None else f" at grid time {grid_index}"
        super().__init__(
            f"mean vector norm {norm:.3e} below {DEGENERATE_NORM_TOL}{where}; "
            "cosine barycentre undefined"
        )


def from_latlon(lat, lon):
    """Embed latitude/longitude (degrees) as unit vectors in R^3.

    Maps (lat, lon) to (cos lat cos lon, cos lat sin lon, sin lat).
    Accepts scalars or arrays; the result has one extra trailing axis of
    size 3.  Raises DomainError if any latitude is outside [-90, 90].
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if np.any(np.abs(lat) > 90.0):
        bad = lat[np.abs(lat) > 90.0] if lat.ndim else lat
        raise DomainError(f"latitude outside [-90, 90]: {bad}")
    phi = np.radians(lat)
    lam = np.radians(lon)
    cos_phi = np.cos(phi)
    return np.stack(
        [cos_phi * np.cos(lam), cos_phi * np.sin(lam), np.sin(phi)], axis=-1
    )


def to_latlon(v):
    """Inverse of from_latlon: unit vectors to (lat, lon) in degrees.

    Longitude is returned in (-180, 180].  At the poles the longitude is
    arbitrary (atan2 of two zeros).
    """
    v = np.asarray(v, dtype=float)
    lat = np.degrees(np.arcsin(np.clip(v[..., 2], -1.0, 1.0)))
    lon = np.degrees(np.arctan2(v[..., 1], v[..., 0]))
    # atan2 yields [-180, 180]; fold -180 onto +180 to match the convention
    lon = np.where(lon <= -180.0, lon + 360.0, lon)
    return lat, lon


def unit(v):
    """Normalise vectors onto the sphere. Raises DegenerateMean near zero."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < DEGENERATE_NORM_TOL):
        raise DegenerateMean(float(n.min()))
    return v / n


def cosine_energy(a, b):
    """Cosine energy 1 - <a, b> between unit vectors, in [0, 2].

    Equals 1 - cos(great-circle distance), approximately half the squared
    distance for nearby points.  Broadcasts over leading axes.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.clip(1.0 - np.sum(a * b, axis=-1), 0.0, 2.0)


def gc_distance(a, b):
    """Great-circle (arc) distance between unit vectors, in radians [0, pi].

    Computed as atan2(|a x b|, a.b), which is numerically stable near both
    0 and pi, unlike arccos of the dot product.  Multiply by
    EARTH_RADIUS_KM for kilometres.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cross = np.cross(a, b)
    sin_d = np.linalg.norm(cross, axis=-1)
    cos_d = np.sum(a * b, axis=-1)
    return np.arctan2(sin_d, cos_d)


def slerp(a, b, t):
    """Point at fraction t in [0, 1] along the minor arc from a to b.

    gc_distance(a, result) == t * gc_distance(a, b).  Nearly coincident
    endpoints fall back to normalised linear interpolation, so the map is
    continuous at a == b.  Raises AntipodalError when the minor arc is not
    unique.  a and b may carry matching leading axes; t broadcasts.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    ang = gc_distance(a, b)
    if np.any(ang > np.pi - _SLERP_SMALL_ANGLE):
        raise AntipodalError("slerp endpoints are (nearly) antipodal")

    small = ang < _SLERP_SMALL_ANGLE
    # sin(ang) bounded away from 0 on the non-degenerate branch
    denom = np.where(small, 1.0, np.sin(ang))
    w_a = np.where(small, 1.0 - t, np.sin((1.0 - t) * ang) / denom)
    w_b = np.where(small, t, np.sin(t * ang) / denom)
    out = w_a[..., None] * a + w_b[..., None] * b
    return unit(out)


def cosine_barycentre(points, weights=None):
    """Cosine barycentre (mean direction) of a weighted set of unit vectors.

    The normalised weighted Euclidean mean, which minimises the weighted
    mean cosine energy over the sphere.  `points` has shape (n, 3);
    `weights` defaults to uniform, must be nonnegative with positive sum.
    Raises DegenerateMean if the weighted mean is too close to the origin.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, 3) array")
    if weights is None:
        m = points.mean(axis=0)
    else:
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        total = weights.sum()
        if total <= 0.0:
            raise ValueError("weights must have positive sum")
        m = (weights[:, None] * points).sum(axis=0) / total
    n = np.linalg.norm(m)
    if n < DEGENERATE_NORM_TOL:
        raise DegenerateMean(n)
    return m / n
