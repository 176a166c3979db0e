"""Cycle containers, path evaluation, counting inversion, CSV round trips."""
import io

import numpy as np
import pytest

from regenlab.paths import (CountingPath, CyclePath, HorizonExceededError,
                            RegenerativePath, evaluate_path, invert_counting,
                            read_cycle_csv, renewal_count, write_cycle_csv,
                            write_events_csv)
from regenlab.models import single_event_path


def _two_cycle_path() -> RegenerativePath:
    first = CyclePath(tau=2.0, xi=np.array([1.0]),
                      offsets=np.array([0.5, 2.0]),
                      values=np.array([[3.0], [1.0]]),
                      interpolation="piecewise-constant")
    second = CyclePath(tau=1.0, xi=np.array([-2.0]),
                       offsets=np.array([0.25, 1.0]),
                       values=np.array([[-0.5], [-2.0]]),
                       interpolation="piecewise-constant")
    return RegenerativePath.from_cycles([first, second])


class TestCyclePath:
    def test_rejects_nonpositive_duration(self):
        with pytest.raises(ValueError):
            CyclePath(tau=0.0, xi=np.array([1.0]), offsets=np.array([0.0]),
                      values=np.array([[1.0]]))

    def test_rejects_mismatched_terminal_value(self):
        with pytest.raises(ValueError):
            CyclePath(tau=1.0, xi=np.array([1.0]), offsets=np.array([1.0]),
                      values=np.array([[0.5]]))

    def test_rejects_last_offset_not_tau(self):
        with pytest.raises(ValueError):
            CyclePath(tau=1.0, xi=np.array([1.0]), offsets=np.array([0.5]),
                      values=np.array([[1.0]]))


class TestRegenerativePath:
    def test_renewal_structure(self):
        path = _two_cycle_path()
        np.testing.assert_array_equal(path.renewal_times, [0.0, 2.0, 3.0])
        np.testing.assert_array_equal(path.prefix_xi[:, 0], [0.0, 1.0, -1.0])

    def test_evaluate_exact_at_events(self):
        path = _two_cycle_path()
        values = path.evaluate(np.array([0.5, 2.0, 2.25, 3.0]))
        np.testing.assert_array_equal(values[:, 0], [3.0, 1.0, 0.5, -1.0])

    def test_piecewise_constant_holds_between_events(self):
        path = _two_cycle_path()
        values = path.evaluate(np.array([0.0, 0.49, 0.51, 1.99]))
        np.testing.assert_array_equal(values[:, 0], [0.0, 0.0, 3.0, 3.0])

    def test_evaluate_beyond_horizon_raises(self):
        path = _two_cycle_path()
        with pytest.raises(HorizonExceededError):
            path.evaluate(np.array([3.1]))
        with pytest.raises(HorizonExceededError):
            path.evaluate(np.array([-0.1]))

    def test_renewal_counts_matches_brute_force(self):
        path = _two_cycle_path()
        times = np.array([0.0, 1.0, 2.0, 2.5, 3.0])
        counts = path.renewal_counts(times)
        brute = [sum(1 for rt in path.renewal_times[1:] if rt <= t)
                 for t in times]
        np.testing.assert_array_equal(counts, brute)

    def test_eta_is_per_cycle_sup(self):
        path = _two_cycle_path()
        np.testing.assert_array_equal(path.eta(), [3.0, 2.0])

    def test_cycle_round_trip(self):
        path = _two_cycle_path()
        cycle = path.cycle(1)
        assert cycle.tau == 1.0
        np.testing.assert_array_equal(cycle.values[:, 0], [-0.5, -2.0])

    def test_module_level_helpers_agree(self):
        path = _two_cycle_path()
        np.testing.assert_array_equal(
            evaluate_path(path, 2.5), path.evaluate(np.array([2.5]))[0])
        assert renewal_count(path, 2.5) == 1


class TestSingleEventPath:
    def test_prefix_sums_at_renewals(self):
        tau = np.array([1.0, 2.0, 0.5])
        xi = np.array([[1.0], [-3.0], [0.25]])
        path = single_event_path(tau, xi, "piecewise-linear")
        at_renewals = path.evaluate(path.renewal_times)
        np.testing.assert_allclose(at_renewals[:, 0],
                                   [0.0, 1.0, -2.0, -1.75], atol=0)

    def test_linear_interpolation_midpoint(self):
        tau = np.array([2.0])
        xi = np.array([[4.0]])
        path = single_event_path(tau, xi, "piecewise-linear")
        value = path.evaluate(np.array([1.0]))
        np.testing.assert_allclose(value[0, 0], 2.0)


class TestCountingInversion:
    def test_first_passage_is_ceiling_inverse(self):
        jump_times = np.array([0.5, 1.25, 1.25, 4.0])
        counting = CountingPath(jump_times=jump_times)
        # level 2 is first reached at the double jump, level 0 at time zero
        assert invert_counting(counting, 0.0) == 0.0
        assert invert_counting(counting, 1.0) == 0.5
        assert invert_counting(counting, 2.0) == 1.25
        assert invert_counting(counting, 3.0) == 1.25
        assert invert_counting(counting, 3.5) == 4.0

    def test_fractional_level_rounds_up(self):
        counting = CountingPath(jump_times=np.array([1.0, 2.0]))
        assert invert_counting(counting, 0.5) == 1.0
        assert invert_counting(counting, 1.5) == 2.0

    def test_level_beyond_jumps_raises(self):
        counting = CountingPath(jump_times=np.array([1.0]))
        with pytest.raises(HorizonExceededError):
            invert_counting(counting, 2.0)


class TestCsv:
    def test_cycle_csv_round_trip_bitwise(self):
        rng = np.random.default_rng(0)
        tau = rng.gamma(2.0, 1.0, size=13)
        xi = rng.standard_normal((13, 2))
        eta = np.abs(xi).max(axis=1)
        buffer = io.StringIO()
        write_cycle_csv(buffer, tau, xi, eta)
        buffer.seek(0)
        tau2, xi2, eta2 = read_cycle_csv(buffer)
        np.testing.assert_array_equal(tau, tau2)
        np.testing.assert_array_equal(xi, xi2)
        np.testing.assert_array_equal(eta, eta2)

    def test_events_csv_header_and_offsets(self):
        path = _two_cycle_path()
        buffer = io.StringIO()
        write_events_csv(buffer, path)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "cycle_index,offset,value_1"
        assert len(lines) == 1 + path.event_times.size
        first = lines[1].split(",")
        assert first[0] == "0" and float(first[1]) == 0.5
