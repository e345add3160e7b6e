"""Parameter counting and model-sizing protocols."""

import math

import numpy as np
import pytest

from gmrbm.matching import (
    budget_hidden_units,
    capacity_matched_mprime,
    capacity_matched_report,
    format_match_report,
    gb_param_count,
    gm_param_count,
    match_report_kv,
    parameter_matched_report,
)
from gmrbm.model import ModelParams, reduce_q2


class TestParamCounts:
    def test_gm_minimal(self):
        assert gm_param_count(1, 1, 1) == 3

    def test_gm_published_budget(self):
        assert gm_param_count(400, 500, 4) == 802400

    def test_gm_equal_budget_across_q(self):
        assert gm_param_count(400, 1000, 2) == gm_param_count(400, 500, 4) == 802400

    def test_gb_minimal(self):
        assert gb_param_count(1, 1) == 3

    def test_gb_value(self):
        assert gb_param_count(400, 1000) == 401400

    def test_gb_no_hidden(self):
        assert gb_param_count(7, 0) == 7

    def test_validation(self):
        with pytest.raises(ValueError):
            gm_param_count(0, 1, 1)
        with pytest.raises(ValueError):
            gb_param_count(1, -1)


class TestCapacityMatch:
    def test_binary_is_identity(self):
        for m in (1, 17, 500):
            assert capacity_matched_mprime(m, 2) == m

    def test_q4(self):
        assert capacity_matched_mprime(500, 4) == 1000

    def test_q6_ceiling(self):
        assert capacity_matched_mprime(333, 6) == 861

    def test_q1_rejected(self):
        with pytest.raises(ValueError):
            capacity_matched_mprime(10, 1)

    def test_ceiling_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            m = int(rng.integers(1, 2000))
            q = int(rng.integers(2, 16))
            mprime = capacity_matched_mprime(m, q)
            assert mprime * math.log(2) >= m * math.log(q) - math.log(2)


class TestBudget:
    def test_published_row(self):
        expected = {2: 1000, 4: 500, 6: 333, 8: 250, 10: 200}
        for q, m in expected.items():
            assert budget_hidden_units(800_000, 400, q) == m

    def test_ceiling_mode_differs_only_on_fractions(self):
        assert budget_hidden_units(800_000, 400, 6, rounding="ceil") == 334
        assert budget_hidden_units(800_000, 400, 4, rounding="ceil") == 500

    def test_exact_budget_single_unit(self):
        assert budget_hidden_units(400 * 3, 400, 3) == 1

    def test_nonincreasing_in_q(self):
        prev = None
        for q in range(1, 30):
            m = budget_hidden_units(123_456, 78, q)
            if prev is not None:
                assert m <= prev
            prev = m

    def test_bad_rounding_mode(self):
        with pytest.raises(ValueError):
            budget_hidden_units(100, 10, 2, rounding="nearest")


class TestReports:
    def test_parameter_mode_uses_budget(self):
        r = parameter_matched_report(800_000, 400, 4)
        assert r.gm_m == 500 and r.gb_mprime == 1000
        assert r.gm_params == 802_400
        assert r.gb_params == gb_param_count(400, 1000)
        assert r.gm_log2_codebook == pytest.approx(1000.0)

    def test_capacity_mode(self):
        r = capacity_matched_report(400, 500, 4)
        assert r.gb_mprime == 1000
        assert r.gb_log2_codebook == pytest.approx(r.gm_log2_codebook)

    def test_kv_output_parses(self):
        r = capacity_matched_report(10, 4, 4)
        kv = dict(line.split("=") for line in match_report_kv(r).splitlines())
        assert kv["mode"] == "capacity"
        assert int(kv["gb_mprime"]) == 8
        text = format_match_report(r)
        assert "hidden units" in text and "parameters" in text


class TestTiedCountRelationship:
    def test_reduced_q2_model_has_gb_param_count_free_values(self):
        # the q=2 reduction emits exactly n + m' + n*m' independent values
        rng = np.random.default_rng(1)
        n, m = 5, 3
        p = ModelParams(n, m, 2, rng.standard_normal(n),
                        rng.standard_normal((m, 2)), rng.standard_normal((2, m, n)))
        gb = reduce_q2(p)
        free = gb.mu.size + gb.bhid.size + gb.W.size
        assert free == gb_param_count(n, m)
