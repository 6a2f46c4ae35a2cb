"""Trajectory k-means: distances, barycentres, Lloyd's algorithm, ordering."""

import numpy as np
import pytest

from stormclust import sphere
from stormclust.kmeans import (
    Clustering,
    GridMismatch,
    TooFewTrajectories,
    barycentre_trajectory,
    lloyd_kmeans,
    order_west_to_east,
    rms_distances,
    traj_distance,
)

GRID = np.arange(-4, 5)  # i_min -4 .. i_max 4


def make_bundle(traj_factory, rng, lon0, m, lat_slope=1.0, lon_slope=0.8, spread=0.2):
    """m nearby trajectories crossing 35N at longitude ~lon0."""
    out = []
    for i in range(m):
        dlat = rng.uniform(-spread, spread)
        dlon = rng.uniform(-spread, spread)
        out.append(
            traj_factory(
                35.0 + lat_slope * GRID + dlat,
                lon0 + lon_slope * GRID + dlon,
                i_min=-4,
                ref=f"AL{i:02d}{int(abs(lon0)):04d}",
            )
        )
    return out


class TestTrajDistance:
    def test_identity_and_symmetry(self, traj_factory):
        rng = np.random.default_rng(0)
        a, b = make_bundle(traj_factory, rng, -70.0, 2, spread=3.0)
        assert traj_distance(a, a) == pytest.approx(0.0, abs=1e-15)
        assert traj_distance(a, b) == pytest.approx(traj_distance(b, a), abs=1e-15)
        assert traj_distance(a, b) > 0.0

    def test_grid_mismatch(self, traj_factory):
        a = traj_factory(35.0 + GRID, -70.0 + GRID, i_min=-4)
        b = traj_factory([34.0, 35.0, 36.0], [-70.0, -71.0, -72.0], i_min=-1)
        with pytest.raises(GridMismatch):
            traj_distance(a, b)


class TestBarycentreTrajectory:
    def test_single_member_is_itself(self, traj_factory):
        a = traj_factory(35.0 + GRID, -70.0 + 0.8 * GRID, i_min=-4)
        np.testing.assert_allclose(barycentre_trajectory([a]), a.positions, atol=1e-12)

    def test_two_members_pointwise_slerp_midpoint(self, traj_factory):
        a = traj_factory(35.0 + GRID, -72.0 + 0.8 * GRID, i_min=-4)
        b = traj_factory(35.0 + 1.1 * GRID, -68.0 + 0.7 * GRID, i_min=-4)
        centroid = barycentre_trajectory([a, b])
        for j in range(len(GRID)):
            np.testing.assert_allclose(
                centroid[j],
                sphere.slerp(a.positions[j], b.positions[j], 0.5),
                atol=1e-12,
            )

    def test_first_order_optimality(self, traj_factory):
        rng = np.random.default_rng(7)
        members = make_bundle(traj_factory, rng, -70.0, 5, spread=1.5)
        centroid = barycentre_trajectory(members)
        stack = np.stack([m.positions for m in members])
        for j in (0, 4, 8):
            base = np.mean(sphere.cosine_energy(stack[:, j], centroid[j]))
            for _ in range(20):
                step = rng.normal(size=3) * 1e-3
                moved = centroid[j] + step - centroid[j] * (centroid[j] @ step)
                moved /= np.linalg.norm(moved)
                assert np.mean(sphere.cosine_energy(stack[:, j], moved)) >= base - 1e-12

    def test_degenerate_mean_reports_grid_index(self, traj_factory):
        a = traj_factory([0.0, 10.0], [0.0, 10.0], i_min=0)
        b = traj_factory([0.0, 10.0], [180.0, 10.0], i_min=0)
        with pytest.raises(sphere.DegenerateMean) as exc:
            barycentre_trajectory([a, b])
        assert exc.value.grid_index == 0


class TestLloyd:
    def test_k_equals_n_reaches_zero_objective(self, traj_factory):
        rng = np.random.default_rng(1)
        trajs = make_bundle(traj_factory, rng, -70.0, 6, spread=4.0)
        clustering = lloyd_kmeans(trajs, k=6, restarts=3, seed=0)
        assert clustering.objective <= 1e-12
        assert sorted(clustering.sizes) == [1] * 6

    def test_k1_matches_global_barycentre(self, traj_factory):
        rng = np.random.default_rng(2)
        trajs = make_bundle(traj_factory, rng, -70.0, 7, spread=3.0)
        clustering = lloyd_kmeans(trajs, k=1, restarts=2, seed=0)
        np.testing.assert_allclose(
            clustering.centroids[0], barycentre_trajectory(trajs), atol=1e-12
        )
        expected = sum(
            np.mean(sphere.cosine_energy(t.positions, clustering.centroids[0]))
            for t in trajs
        )
        assert clustering.objective == pytest.approx(expected, abs=1e-12)

    def test_two_bundle_recovery_across_seeds(self, traj_factory):
        rng = np.random.default_rng(3)
        west = make_bundle(traj_factory, rng, -80.0, 10)
        east = make_bundle(traj_factory, rng, -55.0, 10)
        trajs = west + east
        truth = np.array([0] * 10 + [1] * 10)
        for seed in range(20):
            clustering = lloyd_kmeans(trajs, k=2, restarts=3, seed=seed)
            a = clustering.assignments
            assert np.array_equal(a, truth) or np.array_equal(a, 1 - truth), seed

    def test_histories_monotone_and_best_restart_wins(self, traj_factory):
        rng = np.random.default_rng(4)
        trajs = (
            make_bundle(traj_factory, rng, -85.0, 8, spread=2.5)
            + make_bundle(traj_factory, rng, -65.0, 9, spread=2.5)
            + make_bundle(traj_factory, rng, -45.0, 7, spread=2.5)
        )
        clustering = lloyd_kmeans(trajs, k=4, restarts=6, seed=0)
        assert len(clustering.histories) == 6
        for history in clustering.histories:
            diffs = np.diff(history)
            assert (diffs <= 1e-12).all()
        assert clustering.objective == min(h[-1] for h in clustering.histories)

    def test_objective_consistent_with_assignments(self, traj_factory):
        rng = np.random.default_rng(5)
        trajs = make_bundle(traj_factory, rng, -70.0, 12, spread=3.0)
        clustering = lloyd_kmeans(trajs, k=3, restarts=4, seed=1)
        recomputed = sum(
            np.mean(sphere.cosine_energy(t.positions, clustering.centroids[label]))
            for t, label in zip(trajs, clustering.assignments)
        )
        assert clustering.objective == pytest.approx(recomputed, abs=1e-12)

    def test_determinism(self, traj_factory):
        rng = np.random.default_rng(6)
        trajs = make_bundle(traj_factory, rng, -70.0, 10, spread=3.0)
        first = lloyd_kmeans(trajs, k=3, restarts=5, seed=11)
        second = lloyd_kmeans(trajs, k=3, restarts=5, seed=11)
        assert np.array_equal(first.assignments, second.assignments)
        assert np.array_equal(first.centroids, second.centroids)
        assert first.objective == second.objective
        assert first.histories == second.histories

    def test_duplicate_trajectories_trigger_repair(self, traj_factory):
        a = traj_factory(35.0 + GRID, -80.0 + GRID, i_min=-4)
        b = traj_factory(35.0 + GRID, -55.0 + GRID, i_min=-4)
        trajs = [a] * 6 + [b] * 6
        clustering = lloyd_kmeans(trajs, k=3, restarts=4, seed=0)
        assert clustering.objective <= 1e-15
        assert clustering.assignments.min() >= 0
        assert clustering.assignments.max() < 3
        assert clustering.sizes.sum() == 12

    def test_too_few_trajectories(self, traj_factory):
        trajs = [traj_factory([34.0, 35.0, 36.0], [-70.0, -71.0, -72.0], i_min=-1)]
        with pytest.raises(TooFewTrajectories):
            lloyd_kmeans(trajs * 2, k=3, restarts=1, seed=0)

    def test_k_validation(self, traj_factory):
        trajs = [traj_factory([34.0, 35.0, 36.0], [-70.0] * 3, i_min=-1)] * 3
        with pytest.raises(ValueError):
            lloyd_kmeans(trajs, k=0, restarts=1, seed=0)
        with pytest.raises(ValueError):
            lloyd_kmeans(trajs, k=1, restarts=0, seed=0)

    def test_grid_mismatch(self, traj_factory):
        a = traj_factory(35.0 + GRID, -70.0 + GRID, i_min=-4)
        b = traj_factory([34.0, 35.0, 36.0], [-70.0] * 3, i_min=-1)
        with pytest.raises(GridMismatch):
            lloyd_kmeans([a, b], k=1, restarts=1, seed=0)


class TestOrdering:
    def test_labels_run_west_to_east(self, traj_factory):
        rng = np.random.default_rng(8)
        trajs = (
            make_bundle(traj_factory, rng, -80.0, 4)
            + make_bundle(traj_factory, rng, -60.0, 4)
            + make_bundle(traj_factory, rng, -70.0, 4)
        )
        clustering = order_west_to_east(lloyd_kmeans(trajs, k=3, restarts=5, seed=0))
        # bundle at -80 must take label 0, -70 label 1, -60 label 2
        assert list(clustering.assignments) == [0] * 4 + [2] * 4 + [1] * 4
        lon_at_zero = [
            sphere.to_latlon(clustering.centroids[j][4])[1] for j in range(3)
        ]
        assert lon_at_zero == sorted(lon_at_zero)

    def test_ordering_preserves_partition_and_objective(self, traj_factory):
        rng = np.random.default_rng(9)
        trajs = make_bundle(traj_factory, rng, -75.0, 9, spread=2.0) + make_bundle(
            traj_factory, rng, -55.0, 7, spread=2.0
        )
        raw = lloyd_kmeans(trajs, k=3, restarts=4, seed=2)
        ordered = order_west_to_east(raw)
        assert ordered.objective == raw.objective
        assert sorted(ordered.sizes) == sorted(raw.sizes)
        perm = ordered.ordering
        for i, label in enumerate(raw.assignments):
            assert ordered.assignments[i] == perm[label]
            np.testing.assert_array_equal(
                ordered.centroids[perm[label]], raw.centroids[label]
            )

    def test_never_crossing_centroid_keys_on_longitude_at_zero(self, traj_factory):
        rng = np.random.default_rng(10)
        crossing = make_bundle(traj_factory, rng, -80.0, 4)
        high = [
            traj_factory(40.0 + 0.5 * GRID, -60.0 + 0.8 * GRID + d, i_min=-4)
            for d in (-0.1, 0.0, 0.1, 0.2)
        ]
        clustering = order_west_to_east(
            lloyd_kmeans(crossing + high, k=2, restarts=4, seed=0)
        )
        assert list(clustering.assignments) == [0] * 4 + [1] * 4

    def test_identity_ordering_before_reorder(self, traj_factory):
        rng = np.random.default_rng(12)
        trajs = make_bundle(traj_factory, rng, -70.0, 5, spread=2.0)
        raw = lloyd_kmeans(trajs, k=2, restarts=3, seed=0)
        assert raw.ordering == tuple(range(2))


class TestRms:
    def test_constant_offset_maps_to_arc_km(self, traj_factory):
        # equatorial tracks a fixed longitude offset apart: the pointwise
        # barycentre is the angular midline, so each member sits exactly
        # delta/2 radians from it at every grid instant
        delta = 4.0
        lons = np.linspace(-80.0, -60.0, 9)
        a = traj_factory(np.zeros(9), lons - delta / 2, i_min=-4)
        b = traj_factory(np.zeros(9), lons + delta / 2, i_min=-4)
        clustering = lloyd_kmeans([a, b], k=1, restarts=1, seed=0)
        per_cluster = rms_distances(clustering, [a, b])
        expected = np.radians(delta / 2) * sphere.EARTH_RADIUS_KM
        assert per_cluster[0] == pytest.approx([expected, expected], abs=1e-6)

    def test_member_on_centroid_has_zero_rms(self, traj_factory):
        a = traj_factory(35.0 + GRID, -70.0 + GRID, i_min=-4)
        clustering = lloyd_kmeans([a, a], k=1, restarts=1, seed=0)
        per_cluster = rms_distances(clustering, [a, a])
        assert per_cluster[0] == pytest.approx([0.0, 0.0], abs=1e-9)

    def test_length_mismatch_rejected(self, traj_factory):
        a = traj_factory(35.0 + GRID, -70.0 + GRID, i_min=-4)
        clustering = lloyd_kmeans([a, a], k=1, restarts=1, seed=0)
        with pytest.raises(ValueError):
            rms_distances(clustering, [a])
