import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csbench import (
    BudgetExceededError,
    CertificationReport,
    DegenerateMatrixError,
    InvalidArgumentError,
    RipMethod,
    build_matrix,
    certify_matrix,
    coherence,
    custom_matrix,
    measurement_bound,
    nsp_order,
    rip_constant,
    rip_to_nsp_constant,
    spark,
    welch_bound,
)


def duplicated_column_matrix(seed=2):
    base = build_matrix("gaussian", 4, 7, seed=seed)
    return custom_matrix(np.column_stack([base.entries, base.entries[:, 0]]),
                         normalize=True)


class TestCoherence:
    def test_identity_orthogonal(self):
        assert coherence(build_matrix("identity", 4, 4, seed=0)) == 0.0

    def test_duplicate_column_is_one(self):
        assert coherence(duplicated_column_matrix()) == 1.0

    def test_hand_inner_product(self):
        cols = np.array([[1.0, 1 / math.sqrt(2)], [0.0, 1 / math.sqrt(2)]])
        mat = custom_matrix(cols, normalize=False)
        assert abs(coherence(mat) - 1 / math.sqrt(2)) < 1e-12

    def test_zero_column_degenerate(self):
        mat = custom_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]),
                            normalize=False)
        with pytest.raises(DegenerateMatrixError):
            coherence(mat)

    def test_needs_two_columns(self):
        mat = custom_matrix(np.array([[1.0]]), normalize=False)
        with pytest.raises(InvalidArgumentError):
            coherence(mat)

    @given(seed=st.integers(0, 2**32))
    @settings(max_examples=25, deadline=None)
    def test_column_scale_invariance(self, seed):
        rng = np.random.default_rng(seed)
        entries = rng.standard_normal((4, 6))
        scaled = entries.copy()
        j = int(rng.integers(0, 6))
        scaled[:, j] *= float(rng.uniform(0.1, 10.0)) * (-1) ** int(j % 2)
        a = custom_matrix(entries, normalize=False)
        b = custom_matrix(scaled, normalize=False)
        assert abs(coherence(a) - coherence(b)) < 1e-12


class TestWelchBound:
    def test_square_is_zero(self):
        assert welch_bound(8, 8) == 0.0

    def test_single_row(self):
        assert welch_bound(1, 2) == 1.0

    def test_hand_value(self):
        assert abs(welch_bound(4, 8) - 0.3779644730092272) < 1e-15
        assert abs(welch_bound(4, 8) - math.sqrt(4 / 28)) < 1e-15

    def test_requires_two_columns(self):
        with pytest.raises(InvalidArgumentError):
            welch_bound(1, 1)

    @given(m=st.integers(1, 20), extra=st.integers(1, 20))
    @settings(max_examples=30, deadline=None)
    def test_welch_inequality_gaussian(self, m, extra):
        n = m + extra
        mat = build_matrix("gaussian", m, n, seed=m * 1000 + n)
        assert coherence(mat) >= welch_bound(m, n) - 1e-12


class TestSpark:
    def test_zero_column(self):
        mat = custom_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]),
                            normalize=False)
        result = spark(mat)
        assert result.value == 1 and result.is_exact
        assert result.witness == (1,)

    def test_proportional_columns(self):
        mat = custom_matrix(np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]]),
                            normalize=False)
        result = spark(mat)
        assert result.value == 2
        assert result.witness == (0, 1)

    def test_generic_gaussian_4x8(self):
        mat = build_matrix("gaussian", 4, 8, seed=11)
        result = spark(mat, cap=5)
        assert result.value == 5 and result.is_exact
        assert result.witness == (0, 1, 2, 3, 4)

    def test_truncated_search_marker(self):
        eye = build_matrix("identity", 4, 4, seed=0)
        result = spark(eye, cap=4)
        assert not result.is_exact
        assert result.value is None
        assert result.as_text() == "greater_than(4)"
        assert result.lower_bound == 5

    def test_cap_precondition(self):
        mat = build_matrix("gaussian", 4, 8, seed=11)
        with pytest.raises(InvalidArgumentError):
            spark(mat, cap=6)  # cap must stay within min(m+1, n)

    def test_duplicate_column_forces_two(self):
        result = spark(duplicated_column_matrix())
        assert result.value == 2
        assert result.witness == (0, 7)


class TestNspOrder:
    def test_zero_column_gives_zero(self):
        mat = custom_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]),
                            normalize=False)
        assert nsp_order(mat) == 0

    def test_generic_gaussian(self):
        assert nsp_order(build_matrix("gaussian", 4, 8, seed=11)) == 2

    def test_identity_truncated(self):
        assert nsp_order(build_matrix("identity", 4, 4, seed=0), cap=4) == 2

    def test_duplicate_column(self):
        assert nsp_order(duplicated_column_matrix()) == 0


class TestRipConstant:
    def test_orthonormal_square_zero(self):
        eye = build_matrix("identity", 5, 5, seed=0)
        for k in (1, 2, 5):
            assert rip_constant(eye, k).delta <= 1e-12

    def test_unit_columns_order_one(self):
        mat = build_matrix("toeplitz", 4, 9, seed=6)
        est = rip_constant(mat, 1)
        assert est.delta <= 1e-12
        assert est.is_exact and est.method is RipMethod.EXHAUSTIVE

    def test_exhaustive_4x8_order2(self):
        mat = build_matrix("gaussian", 4, 8, seed=11)
        est = rip_constant(mat, 2)
        assert abs(est.delta - 0.9759122089963945) < 1e-12
        # for unit columns the order-2 constant equals the coherence
        assert abs(est.delta - coherence(mat)) < 1e-12

    def test_monte_carlo_lower_bounds_exhaustive(self):
        mat = build_matrix("gaussian", 4, 8, seed=11)
        exact = rip_constant(mat, 2)
        for seed in range(5):
            mc = rip_constant(mat, 2, method=RipMethod.MONTE_CARLO,
                              trials=64, seed=seed)
            assert mc.delta <= exact.delta + 1e-12
            assert not mc.is_exact
            assert mc.method_text() == "monte_carlo(64)"

    def test_monte_carlo_deterministic_in_seed(self):
        mat = build_matrix("gaussian", 6, 16, seed=1)
        a = rip_constant(mat, 3, method=RipMethod.MONTE_CARLO, trials=50,
                         seed=9)
        b = rip_constant(mat, 3, method=RipMethod.MONTE_CARLO, trials=50,
                         seed=9)
        assert a.delta == b.delta

    def test_exhaustive_monotone_in_k(self):
        mat = build_matrix("gaussian", 4, 8, seed=11)
        deltas = [rip_constant(mat, k).delta for k in (1, 2, 3)]
        assert deltas[0] <= deltas[1] + 1e-12 <= deltas[2] + 2e-12

    def test_budget_error_names_count(self):
        mat = build_matrix("gaussian", 8, 32, seed=0)
        with pytest.raises(BudgetExceededError, match="10518300"):
            rip_constant(mat, 8)  # C(32,8) = 10518300 > 10**6


class TestRipToNsp:
    def test_hand_values(self):
        assert abs(rip_to_nsp_constant(0.1) - 0.26365097626261) < 1e-12
        assert abs(rip_to_nsp_constant(0.2) - 0.7734590803390137) < 1e-12

    def test_pole_divergence(self):
        edge = (math.sqrt(2) - 1) * (1 - 1e-4)
        assert rip_to_nsp_constant(edge) > 1e3

    @pytest.mark.parametrize("bad", [0.0, math.sqrt(2) - 1, 0.5, -0.1])
    def test_open_interval_domain(self, bad):
        with pytest.raises(InvalidArgumentError):
            rip_to_nsp_constant(bad)


class TestMeasurementBound:
    def test_dense_clamps_to_n(self):
        assert measurement_bound(50, 50, 2.0) == 50

    def test_hand_values(self):
        assert measurement_bound(1024, 10, 2.0) == 93
        assert measurement_bound(256, 4, 1.0) == 17

    @given(n=st.integers(2, 300), s=st.integers(1, 300),
           c=st.floats(0.1, 5.0))
    @settings(max_examples=50, deadline=None)
    def test_clamps(self, n, s, c):
        s = min(s, n)
        bound = measurement_bound(n, s, c)
        assert bound <= n
        assert bound >= min(n, 2 * s)


class TestRipImpliesNsp:
    def test_small_matrices(self):
        # exhaustive order-2k constant below sqrt(2)-1 must give nsp >= k
        for mat in (build_matrix("identity", 4, 4, seed=0),
                    build_matrix("partial_dct", 6, 6, seed=3,
                                 normalize=False)):
            est = rip_constant(mat, 2)
            assert est.delta < math.sqrt(2) - 1
            assert nsp_order(mat) >= 1


class TestCertifyMatrix:
    def test_full_report_gaussian(self):
        mat = build_matrix("gaussian", 4, 8, seed=11)
        report = certify_matrix(mat, rip_orders=(1, 2), seed=0)
        assert abs(report.coherence - 0.9759122089963944) < 1e-12
        assert abs(report.welch_bound - 0.3779644730092272) < 1e-12
        assert report.spark.value == 5
        assert report.nsp_order == 2
        assert report.min_measurements >= 4

    def test_json_envelope(self, tmp_path):
        mat = build_matrix("gaussian", 4, 8, seed=11)
        report = certify_matrix(mat, rip_orders=(1, 2), seed=0)
        doc = report.to_json_dict()
        assert set(doc) == {"coherence", "welch_bound", "spark", "nsp_order",
                            "rip", "min_measurements"}
        assert doc["spark"] == 5
        assert set(doc["rip"][0]) == {"k", "delta", "method", "exact"}
        path = tmp_path / "report.json"
        report.save(path)
        assert json.loads(path.read_text()) == doc

    def test_identity_report_markers(self):
        eye = build_matrix("identity", 4, 4, seed=0)
        report = certify_matrix(eye, rip_orders=(1, 2), seed=0)
        assert report.to_json_dict()["spark"] == "greater_than(4)"
        assert report.nsp_order == 2
        assert report.coherence == 0.0

    def test_report_type_checks(self):
        with pytest.raises(InvalidArgumentError):
            CertificationReport(coherence=1.5, welch_bound=0.0,
                                spark=spark(build_matrix("identity", 2, 2,
                                                         seed=0)),
                                nsp_order=0, rip=(), min_measurements=1)
