#!/usr/bin/env python3
"""Generate the bundled synthetic best-track fixture.

Writes data/hurdat2-1851-2012.txt: 1740 storms over 1851-2012 with 233 in
2000-2012, whose 1950-2012 dual-crossing subset registers into 179
trajectories over 37 qualifying years, laid out as twenty west-to-east
trajectory bundles (two of them with fewer than three members) with
within-bundle RMS spread of a few hundred km.  Everything is drawn from a
single seeded generator in a fixed order, so the file is reproducible byte
for byte.

Run with --check to regenerate and verify the file end to end.
"""

from __future__ import annotations

import argparse
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from stormclust.hurdat import Storm, TrackPoint, serialize_hurdat2

SEED = 177

OUT_PATH = Path(__file__).resolve().parent.parent / "data" / "hurdat2-1851-2012.txt"

TOTAL_STORMS = 1740
RECENT_TOTALS = {
    2000: 18, 2001: 17, 2002: 14, 2003: 18, 2004: 30, 2005: 16, 2006: 11,
    2007: 17, 2008: 18, 2009: 13, 2010: 21, 2011: 20, 2012: 20,
}

# Within-year bundle memberships of the qualifying storms, in seasonal
# (registration) order; these define the clustering ground truth.
BUNDLE_SCHEDULE = {
    1950: (5, 1, 13, 8, 2, 13),
    1951: (12, 14, 7),
    1952: (6, 3, 8, 9),
    1953: (11, 12, 11, 4),
    1954: (11, 5, 5),
    1955: (7, 5, 13, 0, 14, 5, 11),
    1958: (5, 14, 7, 13, 8),
    1961: (14, 0, 17, 8, 8, 9),
    1962: (19, 14, 11),
    1963: (12, 13, 16, 12),
    1964: (7, 13, 2, 4, 12, 8, 3),
    1965: (1, 1, 17, 14),
    1966: (7, 9, 9),
    1969: (5, 13, 1),
    1975: (1, 13, 11),
    1976: (14, 19, 15),
    1979: (0, 11, 3, 1, 19, 16, 16),
    1980: (19, 19, 8, 17, 16),
    1981: (3, 18, 8, 13, 14, 13),
    1985: (1, 1, 5, 7),
    1988: (3, 0, 16, 10),
    1989: (12, 17, 17, 13, 5),
    1990: (14, 16, 15, 17),
    1995: (4, 8, 8, 16, 13, 11, 11, 19, 1),
    1996: (3, 8, 5, 11, 19, 15),
    1998: (7, 8, 17, 19, 19, 10),
    1999: (14, 3, 13, 3, 13),
    2000: (14, 4, 4, 14),
    2001: (11, 13, 19),
    2003: (1, 12, 5, 14),
    2004: (4, 6, 17, 2, 1, 2, 16, 17),
    2005: (1, 1, 1, 8, 15, 15, 10),
    2006: (3, 12, 14),
    2008: (12, 1, 0, 5, 0, 15),
    2010: (13, 5, 0, 12, 13),
    2011: (3, 8, 11, 13, 14),
    2012: (0, 13, 19, 12, 9),
}

N_BUNDLES = 20

# Bundle centre-path model on registered time x (6 h steps, x = 0 at the
# 35N crossing): lat = 35 + v x, lon = L + w x + c x^2.  Adjacent anchor
# longitudes get deliberately dissimilar slopes so neighbouring bundles
# fan apart away from the crossing band.
ANCHOR_LON = -88.0 + 3.2 * np.arange(N_BUNDLES)
_V_GRID = np.linspace(0.85, 1.55, N_BUNDLES)
_W_GRID = np.linspace(-0.25, 0.85, N_BUNDLES)
_C_GRID = np.linspace(0.012, 0.060, N_BUNDLES)
BUNDLE_V = _V_GRID[[(7 * j + 3) % N_BUNDLES for j in range(N_BUNDLES)]].copy()
BUNDLE_W = _W_GRID[[(11 * j + 5) % N_BUNDLES for j in range(N_BUNDLES)]].copy()
BUNDLE_C = _C_GRID[[(3 * j + 1) % N_BUNDLES for j in range(N_BUNDLES)]].copy()

# The two small bundles get strongly atypical shapes so they stay isolated:
# bundle 6 is a fast northwest-bound pair, bundle 18 a slow near-zonal
# singleton; bundle 19 is pushed steep and northbound to stay clear of 18.
BUNDLE_V[6], BUNDLE_W[6], BUNDLE_C[6] = 2.60, -2.40, 0.0
BUNDLE_V[18], BUNDLE_W[18], BUNDLE_C[18] = 0.44, 2.60, 0.0
BUNDLE_V[19], BUNDLE_W[19], BUNDLE_C[19] = 1.62, 0.05, 0.055

# Member dispersion knobs (degrees and 6 h steps); the heading clip keeps
# ordinary members inside an envelope the two small bundles sit far beyond.
U_RANGE = (0.70, 1.30)
SIGMA_HEADING = 0.44
HEADING_CLIP = 0.95
SIGMA_CROSS = 0.70
CURV_RANGE = (0.80, 1.20)
PAIR_U_RANGE = (0.97, 1.03)
PAIR_SIGMA_HEADING = 0.10
PAIR_SIGMA_CROSS = 0.30
MAX_PRE_STEPS = 30

NAMES = (
    "ABLE", "BAKER", "CHARLIE", "DOG", "EASY", "FOX", "ALICE", "BARBARA",
    "CAROL", "DOLLY", "EDNA", "FLORENCE", "GILDA", "HAZEL", "IONE", "JANET",
    "KATIE", "AUDREY", "BERTHA", "CARRIE", "DEBBIE", "ELLA", "FIFI", "GRETA",
    "HELENE", "ILSA", "JANICE", "KATE", "LAURIE", "MARTHA", "NETTA", "ORPHA",
    "PEGGY", "QUEENA", "RENA", "SHERRY", "THORA", "VICKY", "WALLIS", "ARLENE",
    "BRET", "CINDY", "DENNIS", "EMILY", "FRANKLIN", "GERT", "HARVEY", "IRENE",
    "JOSE", "KATRINA", "LEE", "MARIA", "NATE", "OPHELIA", "PHILIPPE", "RITA",
    "SEAN", "TAMMY", "VINCE", "WILMA",
)

# Qualifying extras in the non-scheduled 1950-2012 years (at most 2 per
# year, so the minimum-per-year exclusion always drops them).
EXTRAS = {
    1959: 1, 1971: 1,
    1982: 2, 1983: 1, 1984: 1, 1986: 1, 1987: 2,
    1991: 1, 1992: 1, 1993: 2, 1994: 1, 1997: 1,
    2002: 1, 2007: 1,
}


def year_totals() -> dict:
    """Per-year storm totals for 1851-2012, summing to TOTAL_STORMS."""
    totals = {}
    for year in range(1851, 2000):
        totals[year] = 6 + int(round(8.0 * (year - 1851) / 148.0))
    totals.update(RECENT_TOTALS)
    deficit = TOTAL_STORMS - sum(totals.values())
    year = 1933
    step = 0
    while deficit != 0:
        bump = 1 if deficit > 0 else -1
        totals[year] += bump
        deficit -= bump
        step += 1
        year = 1933 + (step * 7) % 60
    return totals


def _synoptic_times(anchor: datetime, first: int, last: int) -> list:
    return [anchor + timedelta(hours=6 * i) for i in range(first, last + 1)]


def _status(wind: int, lat: float) -> str:
    if lat > 40.0:
        return "EX"
    if wind >= 64:
        return "HU"
    if wind >= 34:
        return "TS"
    return "TD"


def _wind_profile(lats: np.ndarray, peak: int, rng) -> np.ndarray:
    """Plausible intensity ramp peaking where the track nears 30N."""
    ref = np.exp(-(((lats - 29.0) / 11.0) ** 2))
    wind = 25 + (peak - 25) * ref
    wind += rng.normal(0.0, 2.0, size=len(lats))
    return np.clip(np.round(wind / 5) * 5, 15, peak).astype(int)


def _points(times, lats, lons, winds, year) -> tuple:
    pts = []
    for t, lat, lon, wind in zip(times, lats, lons, winds):
        pressure = None if year < 1979 else int(round(1013 - (wind - 25) * 0.75))
        pts.append(
            TrackPoint(
                timestamp=t,
                record_id=None,
                status=_status(int(wind), lat),
                latitude=round(float(lat), 1),
                longitude=round(float(lon), 1),
                max_wind=int(wind),
                min_pressure=pressure,
                wind_radii=None,
            )
        )
    return tuple(pts)


def qualifying_track(rng, year: int, crossing: datetime, bundle: int):
    """Fix times and coordinates of one dual-crossing storm."""
    if bundle in (6, 18):
        u = rng.uniform(*PAIR_U_RANGE)
        heading = rng.normal(0.0, PAIR_SIGMA_HEADING)
        cross_off = float(np.clip(rng.normal(0.0, PAIR_SIGMA_CROSS), -0.9, 0.9))
    else:
        u = rng.uniform(*U_RANGE)
        heading = float(np.clip(rng.normal(0.0, SIGMA_HEADING), -HEADING_CLIP, HEADING_CLIP))
        cross_off = float(np.clip(rng.normal(0.0, SIGMA_CROSS), -1.0, 1.0))
    v = BUNDLE_V[bundle] * u
    w = BUNDLE_W[bundle] + heading
    c = BUNDLE_C[bundle] * rng.uniform(*CURV_RANGE)
    lon0 = ANCHOR_LON[bundle] + cross_off

    genesis_lat = rng.uniform(10.5, 14.0)
    # The clamp keeps within-year start order equal to crossing order, which
    # the label table relies on; the floor guarantees the 20N upcrossing
    # survives coordinate rounding even for the slowest movers.
    pre = min(int((35.0 - genesis_lat) / v), MAX_PRE_STEPS)
    pre = max(pre, int(np.ceil(15.7 / v)))
    post = int(min(9 + rng.integers(0, 5), int(27.0 / v), 14))

    # Fixes on the synoptic grid; the crossing instant sits strictly inside
    # a grid interval so registration is always interpolated.
    offset = rng.uniform(0.15, 0.85) * 21600.0
    anchor = crossing - timedelta(seconds=offset)
    times = _synoptic_times(anchor, -pre, post)
    x = (np.arange(-pre, post + 1) * 21600.0 - offset) / 21600.0
    lats = 35.0 + v * x
    lons = lon0 + w * x + c * x * x
    winds = _wind_profile(lats, int(rng.integers(70, 120)), rng)
    return _points(times, lats, lons, winds, year)


def lowlat_track(rng, year: int, start: datetime):
    """A storm that never reaches 20N."""
    n = int(rng.integers(8, 26))
    lat0 = rng.uniform(9.0, 13.5)
    rate = rng.uniform(0.02, min(0.24, (19.2 - lat0) / n))
    lon0 = rng.uniform(-55.0, -20.0)
    drift = rng.uniform(-0.75, -0.35)
    x = np.arange(n + 1, dtype=float)
    lats = lat0 + rate * x
    lons = lon0 + drift * x + rng.normal(0.0, 0.05, n + 1).cumsum()
    times = _synoptic_times(start, 0, n)
    winds = _wind_profile(lats, int(rng.integers(35, 75)), rng)
    return _points(times, lats, lons, winds, year)


def midlat_track(rng, year: int, start: datetime):
    """A storm that upcrosses 20N but dies south of 35N."""
    peak = rng.uniform(24.0, 33.0)
    lat0 = rng.uniform(12.0, 16.0)
    rise = rng.uniform(0.45, 0.75)
    n_rise = int(np.ceil((peak - lat0) / rise))
    n_fade = int(rng.integers(3, 9))
    x = np.arange(n_rise + n_fade + 1, dtype=float)
    lats = np.minimum(lat0 + rise * x, peak)
    lats[n_rise:] = peak - rng.uniform(0.05, 0.3) * (x[n_rise:] - n_rise)
    lon0 = rng.uniform(-75.0, -35.0)
    drift = rng.uniform(-0.7, -0.1)
    lons = lon0 + drift * x + rng.normal(0.0, 0.05, len(x)).cumsum()
    times = _synoptic_times(start, 0, len(x) - 1)
    winds = _wind_profile(lats, int(rng.integers(40, 90)), rng)
    return _points(times, lats, lons, winds, year)


def highlat_track(rng, year: int, start: datetime):
    """A baroclinic system already north of 35N; upcrosses nothing."""
    n = int(rng.integers(6, 14))
    lat0 = rng.uniform(36.5, 44.0)
    rate = rng.uniform(0.2, 0.6)
    lon0 = rng.uniform(-70.0, -40.0)
    drift = rng.uniform(0.5, 1.2)
    x = np.arange(n + 1, dtype=float)
    lats = lat0 + rate * x
    lons = lon0 + drift * x
    times = _synoptic_times(start, 0, n)
    winds = _wind_profile(lats, int(rng.integers(40, 70)), rng)
    return _points(times, lats, lons, winds, year)


def _season_start(rng, year: int, slot: float) -> datetime:
    """A synoptic start time in the warm season at fractional position slot."""
    doy = 150 + slot * 150 + rng.uniform(-6.0, 6.0)
    doy = float(np.clip(doy, 140.0, 320.0))
    return datetime(year, 1, 1) + timedelta(days=int(doy), hours=int(rng.integers(0, 4)) * 6)


def _crossing_times(rng, year: int, count: int) -> list:
    """Strictly increasing crossing instants spread over the season."""
    span = 135.0
    step = span / max(count, 1)
    out = []
    for i in range(count):
        doy = 165.0 + i * step + rng.uniform(-0.25, 0.25) * step
        base = datetime(year, 1, 1) + timedelta(days=doy)
        out.append(base)
    return out


def _storm_name(rng, year: int, index: int) -> str:
    if year < 1950:
        return "UNNAMED"
    return NAMES[(year * 7 + index * 3) % len(NAMES)]


def build_storms() -> list:
    rng = np.random.default_rng(SEED)
    totals = year_totals()

    big_bundles = [0, 1, 3, 4, 5, 7, 8, 11, 12, 13, 14, 15, 16, 17, 19]
    extras = EXTRAS

    storms = []
    for year in range(1851, 2013):
        total = totals[year]
        tracks = []

        schedule = BUNDLE_SCHEDULE.get(year, ())
        if year in extras and extras[year]:
            schedule = tuple(schedule) + tuple(
                rng.choice(big_bundles) for _ in range(extras[year])
            )
        crossings = _crossing_times(rng, year, len(schedule))
        for bundle, crossing in zip(schedule, crossings):
            tracks.append(qualifying_track(rng, year, crossing, int(bundle)))

        n_fill = total - len(schedule)
        if n_fill < 0:
            raise RuntimeError(f"year {year}: total {total} below schedule {len(schedule)}")
        for i in range(n_fill):
            start = _season_start(rng, year, (i + 0.5) / max(n_fill, 1))
            kind = rng.random()
            if year < 1950 and kind < 0.15:
                # Pre-threshold years also saw recurving hurricanes; the
                # year filter keeps them out of the clustering sample.
                bundle = int(rng.choice(big_bundles))
                crossing = start + timedelta(days=float(rng.uniform(2.0, 5.0)))
                tracks.append(qualifying_track(rng, year, crossing, bundle))
            elif kind < 0.55:
                tracks.append(lowlat_track(rng, year, start))
            elif kind < 0.90:
                tracks.append(midlat_track(rng, year, start))
            else:
                tracks.append(highlat_track(rng, year, start))

        tracks.sort(key=lambda pts: pts[0].timestamp)
        for number, pts in enumerate(tracks, start=1):
            storms.append(
                Storm(
                    basin="AL",
                    cyclone_number=number,
                    year=year,
                    name=_storm_name(rng, year, number),
                    points=pts,
                )
            )
    return storms


def check(path: Path) -> None:
    """Parse the written file and verify every fixture-level target."""
    from stormclust.hurdat import count_by_year, parse_hurdat2
    from stormclust.kmeans import lloyd_kmeans, order_west_to_east, rms_distances
    from stormclust.registration import crop_common, select_and_register
    from stormclust.stats import build_label_table

    storms = parse_hurdat2(path.read_text())
    total = sum(count_by_year(storms, (1851, 2012)).values())
    recent = sum(count_by_year(storms, (2000, 2012)).values())
    print(f"storms 1851-2012: {total} (want {TOTAL_STORMS})")
    print(f"storms 2000-2012: {recent} (want 233)")
    assert total == TOTAL_STORMS and recent == 233

    trajs = select_and_register(storms)
    by_year = {}
    for t in trajs:
        by_year.setdefault(t.year, []).append(t)
    qualifying = {y: len(v) for y, v in by_year.items() if len(v) >= 3}
    n_kept = sum(qualifying.values())
    print(f"registered: {len(trajs)}; after year exclusion: {n_kept} over {len(qualifying)} years")
    want = {y: len(row) for y, row in BUNDLE_SCHEDULE.items()}
    assert qualifying == want, sorted(
        set(qualifying.items()) ^ set(want.items())
    )

    # The default k-means run can only keep the two small bundles pure if
    # some restart samples them at initialization; verify that the global
    # trajectory indices of their members are covered.
    small_members = {6: [], 18: []}
    index = 0
    for year in sorted(by_year):
        extra_count = EXTRAS.get(year, 0)
        row = BUNDLE_SCHEDULE.get(year, ()) + (None,) * extra_count
        assert len(row) == len(by_year[year]), f"year {year} registration count"
        for bundle in row:
            if bundle in small_members:
                small_members[bundle].append(index)
            index += 1
    n = len(trajs)
    covering = []
    for r in range(10):
        init = set(np.random.default_rng(0 ^ r).choice(n, size=20, replace=False).tolist())
        if set(small_members[18]) & init and set(small_members[6]) & init:
            covering.append(r)
    print(f"small-bundle members at indices {small_members}; covering restarts: {covering}")
    assert covering, "no default restart samples both small bundles"

    cropped, window = crop_common(trajs)
    print(f"common window: {window}")
    clustering = order_west_to_east(lloyd_kmeans(cropped, 20, 10, 0))
    sizes = clustering.sizes
    print(f"cluster sizes: {list(sizes)}")
    small = int(np.sum(sizes < 3))
    per_cluster = rms_distances(clustering, cropped)
    medians = [float(np.median(r)) if r else float("nan") for r in per_cluster]
    pooled = float(np.median([v for r in per_cluster for v in r]))
    print("cluster median RMS km:", [round(m, 1) for m in medians])
    print(f"pooled median RMS: {pooled:.1f} km; clusters with <3 members: {small}")
    assert small >= 2, "need at least two small clusters"
    assert 150.0 <= pooled <= 600.0, "pooled median RMS outside [150, 600] km"

    table = build_label_table(clustering, cropped)
    print(f"label table: {len(table.rows)} years, {table.n_labels} labels")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=OUT_PATH)
    parser.add_argument("--check", action="store_true", help="verify after writing")
    args = parser.parse_args()

    storms = build_storms()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(serialize_hurdat2(storms))
    print(f"wrote {args.out} ({len(storms)} storms)")
    if args.check:
        check(args.out)


if __name__ == "__main__":
    main()
