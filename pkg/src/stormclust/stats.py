"""Run-statistic tests for temporal association between consecutive storms.

The input is a label table: for each year, the time-ordered sequence of
cluster labels of that year's storms.  The plain statistic T counts, summed
over years, consecutive pairs with equal labels (a multiple-category runs
score).  The decayed variant T_beta additionally counts agreements at
longer lags with geometric weight beta**(lag-1).

Under the null of no association, conditioning on each year's label
multiplicities makes every within-year ordering equally likely.  The
conditional mean and variance of each year's contribution have closed
forms; the total T is referred to a normal approximation, or to an
empirical null from independent within-year permutations.  Years are
treated as independent, so moments add across years.

Permutation replicates draw their RNG streams from (seed, replicate
index), so the replicate set is deterministic for a given seed and
independent of any execution order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from statistics import NormalDist
from typing import Optional

import numpy as np

__all__ = [
    "LabelTable",
    "TestReport",
    "DegenerateRow",
    "ZeroVariance",
    "NoYears",
    "build_label_table",
    "run_statistic",
    "run_statistic_decayed",
    "lag_agreement_counts",
    "conditional_moments",
    "normal_test",
    "permutation_test",
    "partition_function",
    "standardize",
    "qq_data",
]

# One-sided 5% point of the standard normal, as conventionally rounded.
Z_5PCT = 1.645

_NORMAL = NormalDist()


class DegenerateRow(ValueError):
    """A year row too short for conditional moments (needs length >= 2)."""


class ZeroVariance(ValueError):
    """Total conditional variance is zero; standardization undefined."""


class NoYears(ValueError):
    """Label table has no rows after exclusions."""


@dataclass(frozen=True)
class LabelTable:
    """Per-year time-ordered cluster labels.

    rows maps year -> tuple of labels in within-year time order; k is the
    size of the label alphabet.  Rows shorter than 3 are rejected: years
    with fewer storms carry no information about within-year clustering.
    """

    rows: dict
    k: int

    def __post_init__(self):
        object.__setattr__(self, "rows", dict(sorted(self.rows.items())))
        for year, row in self.rows.items():
            if len(row) < 3:
                raise ValueError(f"year {year} has {len(row)} labels; rows must have >= 3")
            for lab in row:
                if not 0 <= lab < self.k:
                    raise ValueError(f"label {lab} outside [0, {self.k}) in year {year}")

    @property
    def n_labels(self) -> int:
        return sum(len(row) for row in self.rows.values())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["year", "position", "label"])
            for year, row in self.rows.items():
                for pos, lab in enumerate(row):
                    writer.writerow([year, pos, lab])

    @classmethod
    def from_csv(cls, path, k: Optional[int] = None) -> "LabelTable":
        by_year = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                by_year.setdefault(int(rec["year"]), []).append(
                    (int(rec["position"]), int(rec["label"]))
                )
        rows = {}
        for year, pairs in by_year.items():
            pairs.sort()
            if [p for p, _ in pairs] != list(range(len(pairs))):
                raise ValueError(f"year {year}: positions are not 0..{len(pairs) - 1}")
            rows[year] = tuple(lab for _, lab in pairs)
        if k is None:
            k = 1 + max((lab for row in rows.values() for lab in row), default=-1)
        return cls(rows=rows, k=k)


@dataclass(frozen=True)
class TestReport:
    """Result of a temporal-association test; fields not computed are None."""

    T_observed: float
    per_year: tuple  # ((year, T_y), ...)
    cond_mean: Optional[float] = None
    cond_variance: Optional[float] = None
    critical_value_5pct: Optional[float] = None
    z_score: Optional[float] = None
    p_normal: Optional[float] = None
    p_permutation: Optional[float] = None
    n_permutations: Optional[int] = None
    beta: Optional[float] = None
    seed: Optional[int] = None
    lag_counts: Optional[tuple] = None

    def merged_with(self, other: "TestReport") -> "TestReport":
        """Overlay another report's non-None fields onto this one."""
        updates = {
            name: value
            for name, value in vars(other).items()
            if value is not None and name not in ("T_observed", "per_year")
        }
        return replace(self, **updates)


def build_label_table(clustering, trajs, min_per_year: int = 3) -> LabelTable:
    """Assemble the per-year label table from a west-to-east ordered clustering.

    Rows are keyed by registration year and ordered by registration time
    within the year; years with fewer than min_per_year storms are dropped.
    trajs[i] must correspond to clustering.assignments[i].
    """
    if len(trajs) != len(clustering.assignments):
        raise ValueError("trajectory list and assignments disagree in length")
    by_year = {}
    for traj, label in zip(trajs, clustering.assignments):
        by_year.setdefault(traj.year, []).append((traj.registration_time, int(label)))
    rows = {}
    for year, entries in sorted(by_year.items()):
        if len(entries) >= min_per_year:
            entries.sort(key=lambda e: e[0])
            rows[year] = tuple(label for _, label in entries)
    return LabelTable(rows=rows, k=clustering.k)


def _row_t(row) -> int:
    row = np.asarray(row)
    return int(np.sum(row[1:] == row[:-1]))


def _row_t_decayed(row, beta: float) -> float:
    row = np.asarray(row)
    total = 0.0
    for lag in range(1, len(row)):
        total += beta ** (lag - 1) * int(np.sum(row[lag:] == row[:-lag]))
    return total


def run_statistic(table: LabelTable):
    """Plain run statistic: (T, ((year, T_y), ...)) with T = sum of T_y.

    T_y counts consecutive equal-label pairs within year y.
    """
    per_year = tuple((year, _row_t(row)) for year, row in table.rows.items())
    return sum(t for _, t in per_year), per_year


def run_statistic_decayed(table: LabelTable, beta: float):
    """Decayed statistic: agreements at lag l weighted by beta**(l-1).

    Requires 0 < beta < 1.  As beta -> 0 the statistic tends to the plain
    lag-1 count T.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    per_year = tuple((year, _row_t_decayed(row, beta)) for year, row in table.rows.items())
    return sum(t for _, t in per_year), per_year


def lag_agreement_counts(table: LabelTable) -> tuple:
    """Total number of equal-label pairs at each lag, summed over years.

    Entry l-1 is the count at lag l; the tuple runs to the largest lag any
    row supports.  Entry 0 equals the plain statistic T.
    """
    longest = max((len(row) for row in table.rows.values()), default=1)
    counts = [0] * (longest - 1)
    for row in table.rows.values():
        arr = np.asarray(row)
        for lag in range(1, len(arr)):
            counts[lag - 1] += int(np.sum(arr[lag:] == arr[:-lag]))
    return tuple(counts)


def conditional_moments(row):
    """Mean and variance of a year's T_y given its label multiplicities.

    With multiplicities r_j, h = sum r_j, m2 = sum r_j (r_j - 1) and
    m3 = sum r_j (r_j - 1)(r_j - 2):

        mean = m2 / h
        var  = m2^2 / (h^2 (h-1)) + (h-3) m2 / (h (h-1)) - 2 m3 / (h (h-1))

    These are exact over the uniform distribution on distinct orderings of
    the row (equivalently, over uniform random permutations).
    """
    h = len(row)
    if h < 2:
        raise DegenerateRow(f"need at least 2 labels, got {h}")
    counts = {}
    for lab in row:
        counts[lab] = counts.get(lab, 0) + 1
    m2 = sum(r * (r - 1) for r in counts.values())
    m3 = sum(r * (r - 1) * (r - 2) for r in counts.values())
    mean = m2 / h
    var = (
        m2 * m2 / (h * h * (h - 1))
        + (h - 3) * m2 / (h * (h - 1))
        - 2 * m3 / (h * (h - 1))
    )
    return mean, var


def normal_test(table: LabelTable) -> TestReport:
    """Refer T to a normal with the summed conditional mean and variance.

    Years are independent, so moments add.  Reports the one-sided upper
    tail p-value and the 5% critical value mean + 1.645 * sd.  If the
    total variance is zero the observed T necessarily equals the mean and
    the p-value is 1; a zero variance with T != mean raises ZeroVariance.
    """
    if not table.rows:
        raise NoYears("label table has no rows")
    T, per_year = run_statistic(table)
    mean = 0.0
    var = 0.0
    for row in table.rows.values():
        m, v = conditional_moments(row)
        mean += m
        var += v
    if var <= 0.0:
        if not math.isclose(T, mean, abs_tol=1e-12):
            raise ZeroVariance(f"variance 0 but T={T} != mean={mean}")
        return TestReport(
            T_observed=float(T),
            per_year=per_year,
            cond_mean=mean,
            cond_variance=0.0,
            critical_value_5pct=mean,
            z_score=0.0,
            p_normal=1.0,
        )
    sd = math.sqrt(var)
    z = (T - mean) / sd
    return TestReport(
        T_observed=float(T),
        per_year=per_year,
        cond_mean=mean,
        cond_variance=var,
        critical_value_5pct=mean + Z_5PCT * sd,
        z_score=z,
        p_normal=_NORMAL.cdf(-z),
    )


def _statistic_fn(statistic: str, beta: Optional[float]):
    if statistic == "plain":
        return lambda rows: sum(_row_t(r) for r in rows)
    if statistic == "decayed":
        if beta is None or not 0.0 < beta < 1.0:
            raise ValueError(f"decayed statistic needs beta in (0, 1), got {beta}")
        return lambda rows: sum(_row_t_decayed(r, beta) for r in rows)
    raise ValueError(f"unknown statistic {statistic!r}")


def _replicates(table: LabelTable, stat_fn, n: int, seed: int) -> np.ndarray:
    """n replicate statistics from independent within-year permutations.

    Replicate r draws from default_rng((seed, r)); each year's row is
    permuted independently, which preserves the year's multiplicity vector
    (the conditioning of the score test).
    """
    rows = [np.asarray(row) for row in table.rows.values()]
    out = np.empty(n)
    for r in range(n):
        rng = np.random.default_rng((seed, r))
        out[r] = stat_fn([rng.permutation(row) for row in rows])
    return out


def permutation_test(
    table: LabelTable,
    statistic: str = "plain",
    beta: Optional[float] = None,
    n: int = 1000,
    seed: int = 0,
) -> TestReport:
    """Permutation test with within-year shuffles preserving multiplicities.

    p = (1 + #{replicates >= observed}) / (n + 1), the add-one estimator,
    which is a valid p-value and never returns 0.  Deterministic for a
    given seed.
    """
    if not table.rows:
        raise NoYears("label table has no rows")
    if n < 1:
        raise ValueError(f"need n >= 1 permutations, got {n}")
    stat_fn = _statistic_fn(statistic, beta)
    if statistic == "plain":
        observed, per_year = run_statistic(table)
        lag_counts = None
    else:
        observed, per_year = run_statistic_decayed(table, beta)
        lag_counts = lag_agreement_counts(table)
    reps = _replicates(table, stat_fn, n, seed)
    exceed = int(np.sum(reps >= observed))
    return TestReport(
        T_observed=float(observed),
        per_year=per_year,
        p_permutation=(1 + exceed) / (n + 1),
        n_permutations=n,
        beta=beta if statistic == "decayed" else None,
        seed=seed,
        lag_counts=lag_counts,
    )


def partition_function(theta: float, h: int, k: int) -> float:
    """Partition function k (e^theta + k - 1)^(h-1) of the one-dimensional
    k-state Potts chain with free boundary conditions on h sites.

    At theta = 0 this is k^h, the count of label sequences.  Provided for
    model diagnostics; the tests condition on multiplicities and do not
    use it.
    """
    if theta < 0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if h < 1 or k < 2:
        raise ValueError(f"need h >= 1 and k >= 2, got h={h}, k={k}")
    return k * (math.exp(theta) + k - 1) ** (h - 1)


def standardize(values, mean: float, sd: float) -> np.ndarray:
    """(values - mean) / sd, the standardization used for Q-Q data."""
    if sd <= 0.0:
        raise ZeroVariance("standard deviation must be positive")
    return (np.asarray(values, dtype=float) - mean) / sd


def qq_data(
    table: LabelTable,
    statistic: str = "plain",
    beta: Optional[float] = None,
    n: int = 1000,
    seed: int = 0,
):
    """Normal Q-Q pairs for the permutation null of the statistic.

    Returns (theoretical, standardized): standard normal quantiles at
    (i - 0.5)/n against sorted replicate statistics standardized by the
    exact conditional moments (plain statistic) or by the replicate sample
    moments (decayed statistic, whose closed-form moments are unwieldy).
    """
    if n < 2:
        raise ValueError(f"need n >= 2 replicates, got {n}")
    stat_fn = _statistic_fn(statistic, beta)
    reps = _replicates(table, stat_fn, n, seed)
    if statistic == "plain":
        mean = 0.0
        var = 0.0
        for row in table.rows.values():
            m, v = conditional_moments(row)
            mean += m
            var += v
        if var <= 0.0:
            raise ZeroVariance("total conditional variance is zero")
        sd = math.sqrt(var)
    else:
        mean = float(np.mean(reps))
        sd = float(np.std(reps))
        if sd <= 0.0:
            raise ZeroVariance("replicate statistics are constant")
    theoretical = np.array([_NORMAL.inv_cdf((i - 0.5) / n) for i in range(1, n + 1)])
    return theoretical, np.sort(standardize(reps, mean, sd))
