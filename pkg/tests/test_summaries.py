"""Life/midlife summaries, infinite-bar policies, summary JSON round-trip."""

import math

import numpy as np
import pytest

from topogap import (
    NoCavitiesError,
    PersistenceDiagram,
    life,
    midlife,
    persistent_homology,
    summarize_diagram,
    vietoris_rips,
)
from topogap.summaries import read_summary_json, write_summary_json

from helpers import square_distance_matrix

SQRT2 = math.sqrt(2.0)

# frozen from the geometric benchmark: single bar [1, sqrt(2))
SQUARE_LIFE = 0.41421356237309515
SQUARE_MIDLIFE = 1.2071067811865475


def dgm(bars, eps_max=1.0, dim=1):
    return PersistenceDiagram(dim, bars, eps_max=eps_max)


class TestHandComputed:
    def test_single_bar(self):
        d = dgm([(0.2, 0.5)])
        assert life(d) == (pytest.approx(0.3), 1)
        assert midlife(d) == (pytest.approx(0.35), 1)

    def test_two_bars_average(self):
        d = dgm([(0.0, 0.4), (0.2, 0.6)])
        lam, c = life(d)
        mu, _ = midlife(d)
        assert c == 2
        assert lam == pytest.approx(0.4)
        assert mu == pytest.approx(0.3)

    def test_square_benchmark_values(self):
        _, d1 = persistent_homology(
            vietoris_rips(square_distance_matrix(), eps_max=1.5, max_dim=2)
        )
        summary = summarize_diagram(d1)
        assert summary.life == pytest.approx(SQUARE_LIFE, abs=1e-15)
        assert summary.midlife == pytest.approx(SQUARE_MIDLIFE, abs=1e-15)
        assert summary.n_cavities == 1

    def test_zero_persistence_bars_ignored(self):
        d = dgm([(0.2, 0.5), (0.7, 0.7), (0.3, 0.3)])
        assert life(d) == (pytest.approx(0.3), 1)

    def test_no_positive_bars_raises(self):
        with pytest.raises(NoCavitiesError):
            life(dgm([(0.5, 0.5)]))
        with pytest.raises(NoCavitiesError):
            midlife(dgm([]))


class TestInfinitePolicies:
    def test_exclude_drops_infinite_bars(self):
        d = dgm([(0.1, 0.5), (0.3, math.inf)])
        assert life(d, infinite_policy="exclude") == (pytest.approx(0.4), 1)

    def test_clamp_truncates_at_eps_max(self):
        d = dgm([(0.1, 0.5), (0.3, math.inf)], eps_max=1.0)
        lam, c = life(d, infinite_policy="clamp")
        assert c == 2
        assert lam == pytest.approx((0.4 + 0.7) / 2)
        mu, _ = midlife(d, infinite_policy="clamp")
        assert mu == pytest.approx((0.3 + 0.65) / 2)

    def test_clamp_drops_bar_born_at_eps_max(self):
        d = dgm([(1.0, math.inf), (0.2, 0.6)], eps_max=1.0)
        assert life(d, infinite_policy="clamp") == (pytest.approx(0.4), 1)

    def test_exclude_only_infinite_raises(self):
        d = dgm([(0.3, math.inf)])
        with pytest.raises(NoCavitiesError):
            life(d, infinite_policy="exclude")
        lam, c = life(d, infinite_policy="clamp")
        assert (lam, c) == (pytest.approx(0.7), 1)

    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError, match="policy"):
            life(dgm([(0.1, 0.2)]), infinite_policy="pad")

    def test_total_clamped_lifetime_bounds_total_excluded(self):
        # totals obey exclude <= clamp; the per-bar means do not
        # (e.g. [0, 0.9) + [0.95, inf) at eps_max 1: mean 0.9 vs 0.475)
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(1, 6))
            bars = []
            for _ in range(n):
                b = float(rng.uniform(0, 0.8))
                death = math.inf if rng.random() < 0.3 else float(rng.uniform(b, 1.0))
                bars.append((b, death))
            d = dgm(bars, eps_max=1.0)
            try:
                lam_ex, c_ex = life(d, infinite_policy="exclude")
                total_ex = lam_ex * c_ex
            except NoCavitiesError:
                total_ex = 0.0
            lam_cl, c_cl = life(d, infinite_policy="clamp")
            assert total_ex <= lam_cl * c_cl + 1e-12

    def test_mean_counterexample_pinned(self):
        d = dgm([(0.0, 0.9), (0.95, math.inf)], eps_max=1.0)
        lam_ex, _ = life(d, infinite_policy="exclude")
        lam_cl, _ = life(d, infinite_policy="clamp")
        assert lam_ex > lam_cl  # the mean inequality genuinely reverses


class TestAlgebraicProperties:
    def test_midlife_at_least_half_life(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            bars = []
            for _ in range(int(rng.integers(1, 8))):
                b = float(rng.uniform(0, 0.5))
                bars.append((b, b + float(rng.uniform(1e-6, 0.5))))
            d = dgm(bars)
            lam, _ = life(d)
            mu, _ = midlife(d)
            assert lam >= 0.0
            assert mu >= lam / 2 - 1e-15  # birth >= 0 forces this

    def test_uniform_scaling(self):
        bars = [(0.1, 0.4), (0.2, 0.9)]
        s = 3.5
        scaled = [(s * b, s * d) for b, d in bars]
        lam, _ = life(dgm(bars))
        mu, _ = midlife(dgm(bars))
        lam_s, _ = life(dgm(scaled, eps_max=4.0))
        mu_s, _ = midlife(dgm(scaled, eps_max=4.0))
        assert lam_s == pytest.approx(s * lam, rel=1e-14)
        assert mu_s == pytest.approx(s * mu, rel=1e-14)

    def test_bar_order_invariance(self):
        bars = [(0.3, 0.8), (0.1, 0.2), (0.5, 0.9)]
        assert life(dgm(bars)) == life(dgm(list(reversed(bars))))
        assert midlife(dgm(bars)) == midlife(dgm(list(reversed(bars))))

    def test_concatenation_is_count_weighted_average(self):
        a = [(0.1, 0.5), (0.2, 0.8)]
        b = [(0.3, 0.4)]
        lam_a, ca = life(dgm(a))
        lam_b, cb = life(dgm(b))
        lam_ab, cab = life(dgm(a + b))
        assert cab == ca + cb
        assert lam_ab == pytest.approx((lam_a * ca + lam_b * cb) / cab, rel=1e-14)


class TestSummaryJson:
    def test_round_trip(self, tmp_path):
        summary = summarize_diagram(
            dgm([(0.1, 0.5), (0.3, math.inf)], eps_max=1.0),
            infinite_policy="clamp",
        )
        path = tmp_path / "run.summary.json"
        write_summary_json(path, summary, manifest={"input": "run.csv"})
        loaded, manifest = read_summary_json(path)
        assert loaded == summary
        assert manifest == {"input": "run.csv"}

    def test_json_keys(self, tmp_path):
        summary = summarize_diagram(dgm([(0.2, 0.6)]))
        path = tmp_path / "s.json"
        write_summary_json(path, summary)
        import json

        payload = json.loads(path.read_text())
        assert set(payload) == {"lambda", "mu", "n_cavities", "policy", "eps_max"}
        assert payload["lambda"] == pytest.approx(0.4)
        assert payload["mu"] == pytest.approx(0.4)
        assert payload["n_cavities"] == 1

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text('{"lambda": 0.1}')
        from topogap import MalformedFileError

        with pytest.raises(MalformedFileError):
            read_summary_json(path)