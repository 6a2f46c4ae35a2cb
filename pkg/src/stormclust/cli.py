"""Command-line pipeline: ingest, cluster, test, and full end-to-end runs.

Every run is determined by (data file, RunConfig): artifacts are written
with sorted JSON keys and fixed CSV column orders, so rerunning a command
with the same inputs reproduces the output tree byte for byte.  The
resolved configuration is written next to the artifacts for provenance.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from . import export
from .hurdat import ParseError, count_by_year, parse_hurdat2
from .kmeans import lloyd_kmeans, order_west_to_east, rms_distances
from .registration import CrossingSpec, crop_common, find_upcrossings, select_and_register
from .stats import LabelTable, build_label_table, normal_test, permutation_test, qq_data

__all__ = ["RunConfig", "StageError", "main"]

# Storm counts of the pinned 1851-2012 best-track revision; a file whose
# counts differ is assumed to be a later revision and triggers a warning.
PINNED_SPAN = (1851, 2012)
PINNED_TOTAL = 1740
PINNED_RECENT_SPAN = (2000, 2012)
PINNED_RECENT_TOTAL = 233


@dataclass
class RunConfig:
    """Parameters of a full pipeline run; serialized beside every output."""

    data_path: Optional[str] = None
    year_from: int = 1950
    year_to: int = 2012
    lower_lat: float = 20.0
    register_lat: float = 35.0
    grid_step_seconds: int = 21600
    k: int = 20
    restarts: int = 10
    min_per_year: int = 3
    beta: float = 0.25
    permutations: int = 1000
    seed: int = 0
    output_dir: str = "out"

    def crossing_spec(self) -> CrossingSpec:
        return CrossingSpec(
            lower_lat=self.lower_lat,
            register_lat=self.register_lat,
            year_range=(self.year_from, self.year_to),
        )


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for the exit message."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


_CONVERTERS = {
    "data_path": str,
    "year_from": int,
    "year_to": int,
    "lower_lat": float,
    "register_lat": float,
    "grid_step_seconds": int,
    "k": int,
    "restarts": int,
    "min_per_year": int,
    "beta": float,
    "permutations": int,
    "seed": int,
    "output_dir": str,
}


def read_config_file(path) -> dict:
    """Parse a key = value config file; # starts a comment."""
    out = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise ValueError(f"{path}:{line_no}: expected key = value")
            if key not in _CONVERTERS:
                raise ValueError(f"{path}:{line_no}: unknown config key {key!r}")
            try:
                out[key] = _CONVERTERS[key](value)
            except ValueError:
                raise ValueError(f"{path}:{line_no}: bad value {value!r} for {key}")
    return out


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_storms(config: RunConfig):
    if not config.data_path:
        raise ValueError("no data file given (use --data or a config file)")
    text = Path(config.data_path).read_text()
    if not text.strip():
        raise ParseError(0, "empty input file")
    return parse_hurdat2(text)


def _crosses_both(storm, spec: CrossingSpec) -> bool:
    if len(storm.points) < 2:
        return False
    return bool(
        find_upcrossings(storm, spec.lower_lat)
        and find_upcrossings(storm, spec.register_lat)
    )


def cmd_ingest(config: RunConfig) -> dict:
    """Parse the data file and write per-year storm counts.

    counts.csv has one row per year of the file's span with the total storm
    count and the count of storms upcrossing both filter latitudes.  Counts
    differing from the pinned revision produce a warning, not a failure.
    """
    storms = _load_storms(config)
    spec = config.crossing_spec()
    span = (min(s.year for s in storms), max(s.year for s in storms))
    totals = count_by_year(storms, span)
    crossing = {year: 0 for year in totals}
    for storm in storms:
        if _crosses_both(storm, spec):
            crossing[storm.year] += 1

    out = _out_dir(config)
    _write_csv(
        out / "counts.csv",
        ("year", "total", "crossing"),
        ((year, totals[year], crossing[year]) for year in sorted(totals)),
    )

    pinned_total = sum(
        count_by_year(storms, PINNED_SPAN).values()
    )
    pinned_recent = sum(count_by_year(storms, PINNED_RECENT_SPAN).values())
    if (pinned_total, pinned_recent) != (PINNED_TOTAL, PINNED_RECENT_TOTAL):
        print(
            "warning: dataset revision differs from the pinned file "
            f"({PINNED_SPAN[0]}-{PINNED_SPAN[1]}: got {pinned_total}, expected {PINNED_TOTAL}; "
            f"{PINNED_RECENT_SPAN[0]}-{PINNED_RECENT_SPAN[1]}: got {pinned_recent}, "
            f"expected {PINNED_RECENT_TOTAL})",
            file=sys.stderr,
        )

    summary = {
        "storms": len(storms),
        "span": list(span),
        "recent": pinned_recent,
        "crossing": sum(crossing.values()),
    }
    print(
        f"{len(storms)} storms over {span[0]}-{span[1]}; "
        f"{pinned_recent} in {PINNED_RECENT_SPAN[0]}-{PINNED_RECENT_SPAN[1]}; "
        f"{summary['crossing']} upcross both {spec.lower_lat:g}N and {spec.register_lat:g}N"
    )
    print(f"wrote {out / 'counts.csv'}")
    return summary


def _prepare_trajectories(config: RunConfig, storms):
    trajs = select_and_register(storms, config.crossing_spec(), config.grid_step_seconds)
    if not trajs:
        raise ValueError("no trajectories pass the crossing filter")
    return crop_common(trajs)


def cmd_cluster(config: RunConfig, storms=None):
    """Register, crop, cluster, and write the clustering artifacts."""
    if storms is None:
        storms = _load_storms(config)
    trajs, window = _prepare_trajectories(config, storms)
    clustering = order_west_to_east(
        lloyd_kmeans(trajs, config.k, config.restarts, config.seed),
        config.register_lat,
    )

    out = _out_dir(config)
    summary = export.clustering_summary(clustering)
    summary["storm_refs"] = [t.storm_ref for t in trajs]
    _write_json(out / "clustering.json", summary)
    _write_json(
        out / "centroids.geojson",
        export.feature_collection(
            export.centroid_feature(
                j,
                clustering.centroids[j],
                clustering.grid_i_min,
                clustering.grid_step,
                clustering.sizes[j],
            )
            for j in range(clustering.k)
        ),
    )
    _write_json(
        out / "trajectories.geojson",
        export.feature_collection(
            export.trajectory_feature(t, label)
            for t, label in zip(trajs, clustering.assignments)
        ),
    )
    per_cluster = rms_distances(clustering, trajs)
    rows = []
    for label in range(clustering.k):
        members = [
            (i, t) for i, t in enumerate(trajs) if clustering.assignments[i] == label
        ]
        for (_, traj), rms in zip(members, per_cluster[label]):
            rows.append((label, traj.storm_ref, traj.year, rms))
    _write_csv(out / "rms.csv", ("cluster", "storm_ref", "year", "rms_km"), rows)

    print(
        f"{len(trajs)} trajectories on grid window [{window[0]}, {window[1]}], "
        f"k={clustering.k}, objective {clustering.objective:.6f}"
    )
    print(f"wrote {out / 'clustering.json'}")
    return trajs, clustering


def _report_dict(report) -> dict:
    return asdict(report)


def cmd_test(config: RunConfig, labels_path=None, table: Optional[LabelTable] = None):
    """Run the association tests and write report.json and qq.csv.

    The label table comes from an explicit CSV fixture when given,
    otherwise from a fresh clustering of the configured data file.
    """
    if table is None:
        if labels_path:
            table = LabelTable.from_csv(labels_path)
        else:
            trajs, clustering = cmd_cluster(config)
            table = build_label_table(clustering, trajs, config.min_per_year)

    plain = normal_test(table).merged_with(
        permutation_test(table, "plain", n=config.permutations, seed=config.seed)
    )
    decayed = permutation_test(
        table, "decayed", beta=config.beta, n=config.permutations, seed=config.seed
    )

    out = _out_dir(config)
    _write_json(
        out / "report.json",
        {
            "table": {"years": len(table.rows), "labels": table.n_labels, "k": table.k},
            "plain": _report_dict(plain),
            "decayed": _report_dict(decayed),
        },
    )
    rows = []
    for name in ("plain", "decayed"):
        beta = config.beta if name == "decayed" else None
        theo, sample = qq_data(
            table, name, beta=beta, n=config.permutations, seed=config.seed
        )
        rows.extend((name, t, s) for t, s in zip(theo, sample))
    _write_csv(out / "qq.csv", ("statistic", "theoretical", "sample"), rows)

    print(
        f"T = {plain.T_observed:g}: z = {plain.z_score:.3f}, "
        f"p_normal = {plain.p_normal:.4f}, p_perm = {plain.p_permutation:.4f}"
    )
    print(
        f"T_beta (beta={config.beta:g}) = {decayed.T_observed:.5f}: "
        f"p_perm = {decayed.p_permutation:.4f}"
    )
    print(f"wrote {out / 'report.json'}")
    return plain, decayed


def cmd_pipeline(config: RunConfig) -> dict:
    """Run ingest, cluster, and test in sequence and write the manifest."""

    def run(stage, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc

    out = _out_dir(config)
    storms = run("ingest", _load_storms, config)
    run("ingest", cmd_ingest, config)
    trajs, clustering = run("cluster", cmd_cluster, config, storms)
    table = run("label", build_label_table, clustering, trajs, config.min_per_year)
    run("label", table.to_csv, out / "labels.csv")
    run("test", cmd_test, config, table=table)
    _write_json(out / "config.json", asdict(config))

    artifacts = [
        "config.json",
        "counts.csv",
        "clustering.json",
        "centroids.geojson",
        "trajectories.geojson",
        "rms.csv",
        "labels.csv",
        "report.json",
        "qq.csv",
    ]
    manifest = {name: _sha256(out / name) for name in artifacts}
    _write_json(out / "manifest.json", {"artifacts": manifest})
    print(f"wrote {out / 'manifest.json'} ({len(artifacts)} artifacts)")
    return manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stormclust",
        description="Cluster best-track hurricane trajectories and test "
        "temporal association between consecutive storms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "ingest": "parse the data file and write per-year counts",
        "cluster": "register, crop, and cluster trajectories",
        "test": "run the association tests on a clustering or a label table",
        "pipeline": "run ingest, cluster, and test end to end",
    }
    for name, help_text in specs.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="key = value config file")
        cmd.add_argument("--data", dest="data_path", help="HURDAT2 best-track file")
        cmd.add_argument("--year-from", dest="year_from", type=int)
        cmd.add_argument("--year-to", dest="year_to", type=int)
        cmd.add_argument("--lower-lat", dest="lower_lat", type=float)
        cmd.add_argument("--register-lat", dest="register_lat", type=float)
        cmd.add_argument("--grid-step", dest="grid_step_seconds", type=int)
        cmd.add_argument("--k", dest="k", type=int)
        cmd.add_argument("--restarts", dest="restarts", type=int)
        cmd.add_argument("--min-per-year", dest="min_per_year", type=int)
        cmd.add_argument("--beta", dest="beta", type=float)
        cmd.add_argument("--permutations", dest="permutations", type=int)
        cmd.add_argument("--seed", dest="seed", type=int)
        cmd.add_argument("--out", dest="output_dir")
        if name == "test":
            cmd.add_argument("--labels", dest="labels_path", help="label table CSV")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in _CONVERTERS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig(**values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == "ingest":
            cmd_ingest(config)
        elif args.command == "cluster":
            cmd_cluster(config)
        elif args.command == "test":
            cmd_test(config, labels_path=args.labels_path)
        else:
            cmd_pipeline(config)
    except StageError as err:
        print(f"stormclust: error in stage '{err.stage}': {err.cause}", file=sys.stderr)
        return 2
    except Exception as err:
        print(f"stormclust: error in stage '{args.command}': {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
