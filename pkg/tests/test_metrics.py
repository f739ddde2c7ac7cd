import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from csbench import (
    InvalidArgumentError,
    MetricDescriptor,
    Process,
    SparseSignal,
    TRIAL_METRIC_KEYS,
    UndefinedMetricError,
    compression_ratio,
    compute_trial_metrics,
    correlation,
    covariance,
    csv_value,
    default_hamming_tol,
    error_sparsity,
    generate_sparse_signal,
    hamming_distance,
    is_success,
    json_value,
    metric_registry,
    mse,
    recovery_error,
    registry_lookup,
    rsnr,
    snr_db,
)

finite_vec = hnp.arrays(np.float64, st.integers(2, 12),
                        elements=st.floats(-1e3, 1e3))


class TestRecoveryError:
    def test_exact_recovery(self):
        assert recovery_error([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_zero_estimate(self):
        assert recovery_error([1.0, 2.0], [0.0, 0.0]) == 1.0

    def test_hand_value(self):
        assert recovery_error([3.0, 4.0], [0.0, 4.0]) == pytest.approx(0.6)

    def test_zero_signal_undefined(self):
        with pytest.raises(UndefinedMetricError):
            recovery_error([0.0, 0.0], [1.0, 0.0])

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            recovery_error([1.0], [1.0, 2.0])


class TestMse:
    def test_exact_recovery(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_values(self):
        assert mse([1.0, 2.0], [0.0, 2.0]) == 0.5
        assert mse([1.0] * 4, [0.0] * 4) == 1.0


class TestCorrelation:
    def test_perfect(self):
        assert correlation([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0

    def test_negated(self):
        assert correlation([1.0, 2.0, 3.0], [-1.0, -2.0, -3.0]) == -1.0

    def test_scale_invariance(self):
        assert correlation([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]) == \
            pytest.approx(1.0, abs=1e-12)

    def test_constant_undefined(self):
        with pytest.raises(UndefinedMetricError):
            correlation([1.0, 2.0], [5.0, 5.0])

    def test_needs_two_components(self):
        with pytest.raises(InvalidArgumentError):
            correlation([1.0], [2.0])

    @given(finite_vec, st.floats(-5, 5), st.floats(-10, 10))
    @settings(max_examples=60, deadline=None)
    def test_affine_images(self, x, a, b):
        if np.ptp(x) < 1e-6 or abs(a) < 1e-6:
            return
        r = correlation(x, a * x + b)
        assert r == pytest.approx(1.0 if a > 0 else -1.0, abs=1e-9)

    @given(finite_vec, finite_vec)
    @settings(max_examples=60, deadline=None)
    def test_bounds(self, x, y):
        if x.shape != y.shape:
            return
        try:
            r = correlation(x, y)
        except UndefinedMetricError:
            return
        assert -1.0 <= r <= 1.0


class TestCovariance:
    def test_constant_estimate(self):
        assert covariance([1.0, 2.0, 3.0], [7.0, 7.0, 7.0]) == 0.0

    def test_hand_values(self):
        assert covariance([1.0, -1.0], [1.0, -1.0]) == 1.0
        assert covariance([1.0, -1.0], [-1.0, 1.0]) == -1.0

    @given(finite_vec, finite_vec)
    @settings(max_examples=60, deadline=None)
    def test_symmetry(self, x, y):
        if x.shape != y.shape:
            return
        assert covariance(x, y) == covariance(y, x)


class TestErrorSparsity:
    def test_exact_recovery(self):
        sig = generate_sparse_signal(8, 3, seed=0)
        es = error_sparsity(sig, sig.values, 0.0)
        assert (es.count_delta, es.support_mismatch) == (0, 0)

    def test_zero_estimate(self):
        sig = generate_sparse_signal(8, 3, seed=0)
        es = error_sparsity(sig, np.zeros(8), 0.0)
        assert (es.count_delta, es.support_mismatch) == (-3, 3)

    def test_shifted_support(self):
        sig = SparseSignal(values=np.array([1.0, 1.0, 0.0, 0.0]), n=4,
                           support=(0, 1), k=2)
        es = error_sparsity(sig, np.array([0.0, 1.0, 1.0, 0.0]), 0.0)
        assert (es.count_delta, es.support_mismatch) == (0, 2)

    def test_negative_tol_rejected(self):
        sig = generate_sparse_signal(8, 3, seed=0)
        with pytest.raises(InvalidArgumentError):
            error_sparsity(sig, np.zeros(8), -1.0)


class TestCompressionRatio:
    def test_values(self):
        assert compression_ratio(5, 5) == 1.0
        assert compression_ratio(64, 256) == 0.25
        assert compression_ratio(1, 1000) == 0.001

    def test_rejects_expansion(self):
        with pytest.raises(InvalidArgumentError):
            compression_ratio(10, 5)
        with pytest.raises(InvalidArgumentError):
            compression_ratio(0, 5)


class TestSnr:
    def test_zero_estimate_is_zero_db(self):
        assert snr_db([3.0, 4.0], [0.0, 0.0]) == 0.0

    def test_exact_recovery_infinite(self):
        assert snr_db([3.0, 4.0], [3.0, 4.0]) == math.inf
        assert rsnr([3.0, 4.0], [3.0, 4.0]) == math.inf

    def test_hand_values(self):
        assert snr_db([3.0, 4.0], [0.0, 4.0]) == \
            pytest.approx(4.4369749923, abs=1e-9)
        assert rsnr([3.0, 4.0], [0.0, 4.0]) == pytest.approx(25.0 / 9.0)
        assert rsnr([3.0, 4.0], [0.0, 0.0]) == 1.0

    def test_zero_signal_undefined(self):
        for fn in (snr_db, rsnr):
            with pytest.raises(UndefinedMetricError):
                fn([0.0, 0.0], [1.0, 0.0])


class TestHamming:
    def test_identical(self):
        assert hamming_distance([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1e-9) == 0

    def test_single_difference(self):
        assert hamming_distance([1.0, 1.0, 1.0], [1.0, 1.0, 0.0], 1e-9) == 1

    def test_all_differ(self):
        y = np.zeros(5)
        assert hamming_distance(y, y + 2e-9, 1e-9) == 5

    def test_strictly_greater(self):
        # a gap of exactly tol is still a match
        assert hamming_distance([0.0], [1e-9], 1e-9) == 0

    def test_default_tol(self):
        assert default_hamming_tol([0.5, -0.25]) == 1e-6
        assert default_hamming_tol([4.0, -8.0]) == 8e-6


class TestIsSuccess:
    def test_exact_recovery(self):
        assert is_success([3.0, 4.0], [3.0, 4.0])

    def test_zero_estimate(self):
        assert not is_success([3.0, 4.0], [0.0, 0.0])

    def test_threshold_moves_the_line(self):
        # relative error 0.6: fails at 0.9, passes at 0.3
        assert not is_success([3.0, 4.0], [0.0, 4.0], 0.9)
        assert is_success([3.0, 4.0], [0.0, 4.0], 0.3)

    def test_threshold_domain(self):
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(InvalidArgumentError):
                is_success([1.0, 0.0], [1.0, 0.0], bad)


class TestCrossMetricIdentities:
    @given(finite_vec, finite_vec)
    @settings(max_examples=80, deadline=None)
    def test_error_mse_rsnr_snr(self, x, x_hat):
        if x.shape != x_hat.shape or np.linalg.norm(x) < 1e-6:
            return
        r = recovery_error(x, x_hat)
        m = mse(x, x_hat)
        nrm2 = float(np.linalg.norm(x)) ** 2
        assert r * r * nrm2 == pytest.approx(x.size * m, rel=1e-9, abs=1e-12)
        if r > 1e-9:
            assert rsnr(x, x_hat) == pytest.approx(r ** -2, rel=1e-9)
            assert snr_db(x, x_hat) == \
                pytest.approx(10.0 * math.log10(rsnr(x, x_hat)), abs=1e-9)


class TestRegistry:
    def test_row_count(self):
        assert len(metric_registry()) == 18

    def test_lookups(self):
        assert registry_lookup("Coherence").processes == \
            {Process.SAMPLING_MATRIX, Process.RECOVERY}
        assert registry_lookup("Sparsity").processes == \
            {Process.SPARSE_REPRESENTATION}
        assert registry_lookup("Complexity").processes == \
            {Process.SPARSE_REPRESENTATION, Process.SAMPLING_MATRIX,
             Process.RECOVERY}

    def test_near_duplicate_rows_kept_apart(self):
        per_trial = registry_lookup("Recovery SNR")
        averaged = registry_lookup("Recovered SNR")
        assert per_trial is not averaged
        assert registry_lookup("Phase transmission diagram") is not None

    def test_unknown_name(self):
        with pytest.raises(InvalidArgumentError):
            registry_lookup("Latency")

    def test_descriptor_requires_a_process(self):
        with pytest.raises(InvalidArgumentError):
            MetricDescriptor("Empty", frozenset(), "n/a")


class TestValueMarkers:
    def test_json_value(self):
        assert json_value(None) == "undefined"
        assert json_value(math.inf) == "infinite"
        assert json_value(3) == 3
        assert json_value(0.5) == 0.5

    def test_csv_value(self):
        assert csv_value(None) == "nan"
        assert csv_value(True) == "true"
        assert csv_value(False) == "false"
        assert csv_value(7) == "7"
        assert csv_value(math.inf) == "inf"
        assert csv_value(-math.inf) == "-inf"
        assert csv_value(math.nan) == "nan"
        assert csv_value(0.1) == "0.10000000000000001"
        assert csv_value(1.0) == "1"


class TestTrialReport:
    def report_for(self, x_hat_offset):
        sig = generate_sparse_signal(10, 3, seed=5)
        x_hat = sig.values + x_hat_offset
        y = np.arange(4, dtype=np.float64)
        return compute_trial_metrics(sig, x_hat, y, y, m=4, n=10)

    def test_key_set(self):
        report = self.report_for(0.0)
        assert tuple(report.values) == TRIAL_METRIC_KEYS

    def test_exact_recovery_markers(self):
        report = self.report_for(0.0)
        assert report.values["recovery_error"] == 0.0
        assert report.values["rsnr"] == math.inf
        assert report.values["snr_db"] == math.inf
        doc = report.to_flat_json_dict()
        assert doc["rsnr"] == "infinite"
        assert json.dumps(doc)  # whole report serializes

    def test_zero_signal_markers(self):
        sig = generate_sparse_signal(10, 0, seed=5)
        y = np.zeros(4)
        report = compute_trial_metrics(sig, np.zeros(10), y, y, m=4, n=10)
        for key in ("recovery_error", "rsnr", "snr_db"):
            assert report.values[key] is None
            assert report.to_flat_json_dict()[key] == "undefined"
        assert csv_value(report.values["rsnr"]) == "nan"

    def test_tolerances_recorded(self):
        report = self.report_for(0.0)
        assert set(report.tolerances) == {"support_tol", "hamming_tol"}
        assert report.tolerances["hamming_tol"] == \
            default_hamming_tol(np.arange(4, dtype=np.float64))
