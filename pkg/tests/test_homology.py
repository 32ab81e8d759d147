"""Persistence reduction, Betti curves, brute-force oracle, diagram round-trip."""

import math

import numpy as np
import pytest

from topogap import (
    DistanceMatrix,
    MalformedFileError,
    PersistenceDiagram,
    betti_curve,
    brute_force_betti,
    filtration_grid,
    persistent_homology,
    vietoris_rips,
)
from topogap.homology import read_diagram_csv, write_diagram_csv

from helpers import random_distance_matrix, square_distance_matrix

SQRT2 = math.sqrt(2.0)


def ph_of(dist, eps_max=1.0):
    return persistent_homology(vietoris_rips(dist, eps_max=eps_max, max_dim=2))


def positive_bars(diagram):
    return [bar for bar in diagram.bars if bar[1] > bar[0]]


class TestSmallComplexes:
    def test_single_vertex(self):
        dgm0, dgm1 = ph_of(DistanceMatrix(np.zeros((1, 1))))
        assert dgm0.bars == [(0.0, math.inf)]
        assert dgm1.bars == []

    def test_two_points_merge_at_edge_scale(self):
        d = np.array([[0.0, 0.5], [0.5, 0.0]])
        dgm0, dgm1 = ph_of(DistanceMatrix(d))
        assert dgm0.bars == [(0.0, 0.5), (0.0, math.inf)]
        assert dgm1.bars == []

    def test_square_single_positive_h1_bar(self):
        dgm0, dgm1 = ph_of(square_distance_matrix(), eps_max=1.5)
        assert positive_bars(dgm1) == [(1.0, SQRT2)]
        # simultaneous diagonal edges + triangles leave only zero-length noise
        assert all(b == d for b, d in dgm1.bars if (b, d) != (1.0, SQRT2))
        assert dgm0.bars == [(0.0, 1.0)] * 3 + [(0.0, math.inf)]

    def test_elder_rule_merges_younger_and_tie_breaks_by_index(self):
        # chain 0-1-2: vertex 2 dies at 0.3, vertex 1 at 0.2, vertex 0 immortal
        d = np.zeros((3, 3))
        d[0, 1] = d[1, 0] = 0.2
        d[1, 2] = d[2, 1] = 0.3
        d[0, 2] = d[2, 0] = 0.9
        dgm0, dgm1 = ph_of(DistanceMatrix(d))
        assert dgm0.bars == [(0.0, 0.2), (0.0, 0.3), (0.0, math.inf)]
        # the 0-2 edge closes a cycle at 0.9 that the triangle fills instantly
        assert dgm1.bars == [(0.9, 0.9)]


class TestBettiCurve:
    def test_isolated_points_at_scale_zero(self):
        d = np.ones((5, 5)) * 0.9
        np.fill_diagonal(d, 0.0)
        dgm0, _ = ph_of(DistanceMatrix(d), eps_max=0.5)
        curve = betti_curve(dgm0, np.array([0.0]))
        assert curve.counts.tolist() == [5]

    def test_square_h1_curve_values(self):
        _, dgm1 = ph_of(square_distance_matrix(), eps_max=1.5)
        curve = betti_curve(dgm1, np.array([0.5, 1.2, 1.5]))
        assert curve.counts.tolist() == [0, 1, 0]

    def test_infinite_bars_always_counted(self):
        dgm = PersistenceDiagram(0, [(0.0, math.inf)], eps_max=1.0)
        curve = betti_curve(dgm, np.array([0.0, 0.5, 1.0]))
        assert curve.counts.tolist() == [1, 1, 1]

    def test_scales_must_be_sorted(self):
        dgm = PersistenceDiagram(0, [(0.0, 1.0)], eps_max=1.0)
        with pytest.raises(ValueError):
            betti_curve(dgm, np.array([0.5, 0.1]))


class TestBruteForceOracle:
    def test_filled_triangle_is_contractible(self):
        d = np.full((3, 3), 0.2)
        np.fill_diagonal(d, 0.0)
        assert brute_force_betti(DistanceMatrix(d), 0.5) == (1, 0)

    def test_square_betti_by_scale(self):
        sq = square_distance_matrix()
        assert brute_force_betti(sq, 0.5) == (4, 0)
        assert brute_force_betti(sq, 1.2) == (1, 1)
        assert brute_force_betti(sq, 1.5) == (1, 0)

    def test_size_cap(self):
        d = np.zeros((13, 13))
        with pytest.raises(ValueError, match="capped"):
            brute_force_betti(DistanceMatrix(d), 0.5)

    def test_reduction_agrees_with_oracle_on_random_sets(self):
        rng = np.random.default_rng(42)
        for trial in range(25):
            n = int(rng.integers(3, 9))
            dist = random_distance_matrix(rng, n, ties=bool(trial % 2))
            fc = vietoris_rips(dist, eps_max=1.0, max_dim=2)
            dgm0, dgm1 = persistent_homology(fc)
            grid = filtration_grid(fc, n_steps=200)
            c0 = betti_curve(dgm0, grid).counts
            c1 = betti_curve(dgm1, grid).counts
            for k, eps in enumerate(grid):
                assert (c0[k], c1[k]) == brute_force_betti(dist, eps)


class TestDiagramProperties:
    def test_h0_bar_count_equals_vertex_count(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            n = int(rng.integers(2, 10))
            dgm0, _ = ph_of(random_distance_matrix(rng, n))
            assert len(dgm0.bars) == n

    def test_infinite_h0_bars_equal_components_at_eps_max(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            n = int(rng.integers(2, 10))
            dist = random_distance_matrix(rng, n)
            eps = float(rng.uniform(0.2, 0.9))
            dgm0, _ = ph_of(dist, eps_max=eps)
            assert len(dgm0.infinite_bars()) == brute_force_betti(dist, eps)[0]

    def test_finite_death_multiset_permutation_invariant(self):
        rng = np.random.default_rng(23)
        dist = random_distance_matrix(rng, 8)
        perm = rng.permutation(8)
        permuted = DistanceMatrix(dist.entries[np.ix_(perm, perm)])
        deaths = sorted(d for _, d in ph_of(dist)[0].finite_bars())
        deaths_p = sorted(d for _, d in ph_of(permuted)[0].finite_bars())
        assert deaths == deaths_p

    def test_duplicate_point_adds_one_zero_h0_bar_and_keeps_h1(self):
        rng = np.random.default_rng(24)
        dist = random_distance_matrix(rng, 7)
        dgm0, dgm1 = ph_of(dist)
        # append an exact copy of point 0
        d = dist.entries
        dup = np.zeros((8, 8))
        dup[:7, :7] = d
        dup[7, :7] = d[0, :]
        dup[:7, 7] = d[:, 0]
        dgm0_dup, dgm1_dup = ph_of(DistanceMatrix(dup))
        assert len(dgm0_dup.bars) == len(dgm0.bars) + 1
        assert (0.0, 0.0) in dgm0_dup.bars
        assert sorted(dgm0_dup.finite_bars()) == sorted(dgm0.finite_bars() + [(0.0, 0.0)])
        assert positive_bars(dgm1_dup) == positive_bars(dgm1)

    def test_death_never_precedes_birth_and_h1_capped(self):
        rng = np.random.default_rng(25)
        for _ in range(10):
            dist = random_distance_matrix(rng, 8, ties=True)
            eps = 0.8
            dgm0, dgm1 = ph_of(dist, eps_max=eps)
            for dgm in (dgm0, dgm1):
                for birth, death in dgm.bars:
                    assert death >= birth
            for birth, death in dgm1.bars:
                assert 0.0 <= birth <= eps
                if math.isfinite(death):
                    assert death <= eps

    def test_determinism_identical_diagrams(self):
        rng = np.random.default_rng(26)
        dist = random_distance_matrix(rng, 9, ties=True)
        a = ph_of(dist)
        b = ph_of(dist)
        assert a[0].bars == b[0].bars and a[1].bars == b[1].bars

    def test_bar_validation(self):
        with pytest.raises(ValueError, match="dies before"):
            PersistenceDiagram(1, [(0.5, 0.2)], eps_max=1.0)
        with pytest.raises(ValueError, match="invalid bar"):
            PersistenceDiagram(1, [(math.nan, 1.0)], eps_max=1.0)
        with pytest.raises(ValueError, match="invalid bar"):
            PersistenceDiagram(1, [(math.inf, math.inf)], eps_max=1.0)


class TestDiagramCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(31)
        dgm0, dgm1 = ph_of(random_distance_matrix(rng, 8))
        path = tmp_path / "run.diagram.csv"
        write_diagram_csv(path, [dgm0, dgm1], manifest={"eps_max": 1.0})
        reloaded, manifest = read_diagram_csv(path)
        assert manifest == {"eps_max": 1.0}
        by_dim = {g.dimension: g for g in reloaded}
        assert by_dim[0].bars == dgm0.bars
        if dgm1.bars:
            assert by_dim[1].bars == dgm1.bars
        assert by_dim[0].eps_max == 1.0

    def test_infinite_deaths_written_as_inf_literal(self, tmp_path):
        dgm = PersistenceDiagram(0, [(0.0, math.inf), (0.0, 0.25)], eps_max=1.0)
        path = tmp_path / "d.csv"
        write_diagram_csv(path, [dgm])
        body = path.read_text().splitlines()
        assert body[0] == "dim,birth,death"
        assert body[1] == "0,0,0.25"
        assert body[2] == "0,0,inf"

    def test_canonical_sort_dim_birth_death(self, tmp_path):
        d0 = PersistenceDiagram(0, [(0.0, 0.3)], eps_max=1.0)
        d1 = PersistenceDiagram(1, [(0.4, 0.9), (0.2, 0.5)], eps_max=1.0)
        path = tmp_path / "d.csv"
        write_diagram_csv(path, [d1, d0])
        rows = path.read_text().splitlines()[1:]
        assert rows == ["0,0,0.29999999999999999", "1,0.20000000000000001,0.5",
                        "1,0.40000000000000002,0.90000000000000002"]

    def test_malformed_header_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("birth,death\n0,1\n")
        with pytest.raises(MalformedFileError, match="header"):
            read_diagram_csv(path)

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("dim,birth,death\n1,0.2\n")
        with pytest.raises(MalformedFileError, match="line 2"):
            read_diagram_csv(path)