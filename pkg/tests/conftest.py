"""Shared fixtures and the acceptance-summary reporting hook."""

from datetime import datetime
from pathlib import Path

import numpy as np
import pytest

from stormclust.hurdat import Storm, TrackPoint, parse_hurdat2
from stormclust.registration import RegisteredTrajectory
from stormclust.sphere import from_latlon
from stormclust.stats import LabelTable

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
TRACK_FILE = DATA_DIR / "hurdat2-1851-2012.txt"
LABEL_FILE = DATA_DIR / "label_table.csv"

_acceptance_lines = []


@pytest.fixture(scope="session")
def track_path() -> Path:
    return TRACK_FILE


@pytest.fixture(scope="session")
def label_path() -> Path:
    return LABEL_FILE


@pytest.fixture(scope="session")
def storms():
    """The pinned best-track file, parsed once per session."""
    return parse_hurdat2(TRACK_FILE.read_text())


@pytest.fixture(scope="session")
def label_table() -> LabelTable:
    return LabelTable.from_csv(LABEL_FILE)


@pytest.fixture
def storm_factory():
    """Build a Storm from (timestamp, lat, lon) fixes."""

    def make(fixes, year=2005, number=1, name="TEST", basin="AL"):
        points = tuple(
            TrackPoint(
                timestamp=ts,
                record_id=None,
                status="HU",
                latitude=lat,
                longitude=lon,
                max_wind=50,
                min_pressure=990,
            )
            for ts, lat, lon in fixes
        )
        return Storm(
            basin=basin, cyclone_number=number, year=year, name=name, points=points
        )

    return make


@pytest.fixture
def traj_factory():
    """Build a RegisteredTrajectory from per-grid-point lat/lon arrays."""

    def make(lats, lons, i_min=0, year=2000, ref="AL012000", step=21600, registration_time=None):
        positions = from_latlon(np.asarray(lats, float), np.asarray(lons, float))
        return RegisteredTrajectory(
            storm_ref=ref,
            year=year,
            registration_time=registration_time or datetime(year, 9, 1),
            i_min=i_min,
            positions=positions,
            grid_step=step,
        )

    return make


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance criterion outcome and assert it.

    Prints an ACCEPTANCE line immediately (visible in captured output) and
    repeats all lines in the terminal summary after the run.
    """

    def record(number, ok, detail):
        line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _acceptance_lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
