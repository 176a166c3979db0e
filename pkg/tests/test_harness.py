"""Experiment drivers: stream layout, summaries, worker invariance."""
import dataclasses

import numpy as np
import pytest

from regenlab.config import build_config
from regenlab.harness import (TailEstimate, certify_bound, fit_constant_a,
                              maxima_scaling_experiment, replication_stream,
                              run_embedding_check, run_phi_diagnostics,
                              run_rate_experiment, run_tail_experiment)


def _estimate(normalized_high: float) -> TailEstimate:
    return TailEstimate(t=1024.0, x=64.0, p=3.0, region="pair", n=1000,
                        hits=2, p_hat=0.002, ci_low=0.001, ci_high=0.003,
                        normalized=0.002 * 64.0 ** 3 / 1024.0,
                        normalized_high=normalized_high)


class TestStreamLayout:
    def test_distinct_addresses_within_kind(self):
        seen = set()
        for t_index in range(3):
            for rep in range(40):
                s = replication_stream(11, "rate", t_index, 40, rep)
                seen.add(s.stream_index)
        assert len(seen) == 120

    def test_kinds_never_collide(self):
        indices = {}
        for kind in ("rate", "tail", "phis", "maxima", "embedding"):
            for rep in range(200):
                idx = replication_stream(0, kind, 4, 500, rep).stream_index
                assert idx not in indices, (kind, indices.get(idx))
                indices[idx] = kind

    def test_component_children_do_not_leak_into_next_rep(self):
        a = replication_stream(0, "tail", 0, 100, 0)
        b = replication_stream(0, "tail", 0, 100, 1)
        # each replication owns 4 consecutive child slots
        assert b.stream_index - a.stream_index >= 4

    def test_unknown_kind(self):
        with pytest.raises(KeyError):
            replication_stream(0, "sideways", 0, 10, 0)


class TestTailFit:
    def test_constant_is_max_upper_normalized(self):
        ests = [_estimate(0.5), _estimate(0.003 * 64.0 ** 3 / 1024.0),
                _estimate(0.1)]
        assert fit_constant_a(ests) == pytest.approx(0.768)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fit_constant_a([])

    def test_interval_ordering_enforced(self):
        with pytest.raises(ValueError, match="ordering"):
            TailEstimate(t=8.0, x=2.0, p=3.0, region="pair", n=10, hits=1,
                         p_hat=0.1, ci_low=0.2, ci_high=0.3,
                         normalized=0.1, normalized_high=0.3)


@pytest.fixture(scope="module")
def rate_cfg():
    return build_config("rate", mode="shared-innovations",
                        t_grid=(64.0, 128.0, 256.0, 512.0),
                        replications=50, root_seed=3)


class TestRateExperiment:
    def test_structure_and_plausible_fit(self, rate_cfg, workers):
        fit = run_rate_experiment(rate_cfg, workers=workers)
        assert [s.t for s in fit.per_t] == [64.0, 128.0, 256.0, 512.0]
        assert all(s.n == 50 for s in fit.per_t)
        assert all(0 < s.ci_low <= s.median <= s.ci_high for s in fit.per_t)
        assert all(s.median <= s.q90 for s in fit.per_t)
        assert np.isfinite(fit.slope)
        # coupled deviations grow far slower than the sqrt(t) null
        assert fit.slope < 0.45
        assert fit.threshold == pytest.approx(1.0 / 3.0 + 0.1)
        assert fit.passed == (fit.slope <= fit.threshold)
        assert fit.slope_ci[0] <= fit.slope <= fit.slope_ci[1]
        assert len(fit.deviations) == 4
        assert all(len(d) == 50 for d in fit.deviations)

    def test_workers_do_not_change_the_result(self, rate_cfg):
        one = run_rate_experiment(rate_cfg, workers=1)
        two = run_rate_experiment(rate_cfg, workers=2)
        assert one == two


class TestTailExperiment:
    def test_rows_and_normalization(self, workers):
        cfg = build_config("tail", mode="shared-innovations",
                           t_grid=(64.0, 256.0), replications=60,
                           root_seed=5)
        ests = run_tail_experiment(cfg, workers=workers)
        by_t = {}
        for e in ests:
            by_t.setdefault(e.t, []).append(e)
        assert set(by_t) == {64.0, 256.0}
        for t, rows in by_t.items():
            assert [e.x for e in rows] == sorted(e.x for e in rows)
            for e in rows:
                assert e.n == 60
                assert e.normalized == pytest.approx(
                    e.p_hat * e.x ** cfg.p / t)
                assert e.normalized_high == pytest.approx(
                    e.ci_high * e.x ** cfg.p / t)
        assert np.isfinite(fit_constant_a(ests))

    def test_workers_do_not_change_the_result(self):
        cfg = build_config("tail", mode="independent",
                           t_grid=(64.0,), replications=50, root_seed=6)
        assert (run_tail_experiment(cfg, workers=1)
                == run_tail_experiment(cfg, workers=2))


class TestPhiDiagnostics:
    def test_tables_and_side_events(self, workers):
        cfg = build_config("phis", mode="shared-innovations",
                           t_grid=(128.0,), replications=60, root_seed=2)
        diag = run_phi_diagnostics(cfg, workers=workers)
        assert diag.t == 128.0
        assert len(diag.per_term) == 8
        assert len(diag.term_sup_medians) == 8
        assert all(m >= 0 for m in diag.term_sup_medians)
        assert diag.max_residual < 1e-8 * 100
        assert diag.triangle_max_violation <= 1e-9
        assert 0.0 <= diag.passage_exceed_freq <= 1.0
        assert diag.passage_exceed_freq <= diag.passage_exceed_bound + 0.05
        # structural rows: empirical term-1 tail against its moment bound
        for x, lhs, rhs in diag.structure_rows:
            assert x > 0 and 0.0 <= lhs <= 1.0 and rhs > 0


class TestMaximaExperiment:
    def test_rows_and_scaling_fields(self, workers):
        cfg = build_config("maxima", family="pareto-cycle",
                           model_params={"tail_index": 3.5},
                           t_grid=(1024.0, 4096.0, 16384.0),
                           replications=60, root_seed=4)
        trend = maxima_scaling_experiment(cfg, workers=workers)
        assert trend.n_values == (1024, 4096, 16384)
        assert len(trend.rows) == 3
        for row in trend.rows:
            assert 0 < row.ci_low <= row.median <= row.ci_high
        assert isinstance(trend.passed, bool)

    def test_workers_do_not_change_the_result(self):
        cfg = build_config("maxima", family="pareto-cycle",
                           model_params={"tail_index": 3.5},
                           t_grid=(512.0, 2048.0), replications=50,
                           root_seed=4)
        assert (maxima_scaling_experiment(cfg, workers=1)
                == maxima_scaling_experiment(cfg, workers=2))


class TestCertification:
    def test_unknown_name(self):
        with pytest.raises(KeyError, match="registry"):
            certify_bound("no-such-inequality")

    def test_poisson_inverse_is_exact(self):
        record = certify_bound("poisson-inverse")
        assert record.passed
        assert len(record.rows) == 3
        for row in record.rows:
            assert row.se == 0.0
            assert row.lhs <= row.bound

    def test_rows_are_recomputable(self):
        record = certify_bound("poisson-inverse")
        for row in record.rows:
            again = dataclasses.replace(row)
            assert again == row


class TestEmbeddingCheck:
    def test_marginals_hold_at_reduced_size(self, workers):
        result = run_embedding_check(root_seed=0, n_units=20_000,
                                     bundles=100, t=200.0, workers=workers)
        assert result["gof_pvalue"] > 0.001
        assert result["count_mean"] == pytest.approx(result["rate"], rel=0.05)
        assert result["covariance"].shape == (2, 2)
        assert result["cov_ok"]
        assert result["gof_ok"]
