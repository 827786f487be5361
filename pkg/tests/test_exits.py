"""Exit rule, cascade semantics, and threshold calibration."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from tierroute import (
    ConfigError,
    CostModel,
    DeploymentConfig,
    Device,
    calibrate_threshold,
    cascade_outcome,
    empirical_expected_reward,
    first_exit,
    threshold_grid,
)
from tierroute.synth import default_scenario, generate

import oracle
from util import trace, trace_set

CFG = DeploymentConfig(m=3, n=6, l=12)


class TestGrid:
    def test_binary_grid_values(self):
        g = threshold_grid(2)
        assert g.values[0] == 0.5
        assert g.values[-1] == 1.0
        for k, v in enumerate(g.values):
            assert v == pytest.approx(0.5 + k / 18, abs=1e-12)

    def test_four_class_endpoints(self):
        g = threshold_grid(4)
        assert g.values[0] == 0.25
        assert g.values[-1] == 1.0
        assert g.values[1] - g.values[0] == pytest.approx(0.75 / 9, abs=1e-12)

    def test_equidistant_within_tolerance(self):
        for c in (2, 3, 5, 10):
            v = threshold_grid(c).values
            gaps = np.diff(v)
            assert np.max(gaps) - np.min(gaps) < 1e-12

    def test_single_class_rejected(self):
        with pytest.raises(ConfigError):
            threshold_grid(1)


class TestFirstExit:
    def test_first_crossing(self):
        confs = np.array([0.6, 0.95, 0.99])
        assert first_exit(confs, 0.9, 1, 3) == 2

    def test_no_crossing(self):
        confs = np.array([0.6, 0.7, 0.8])
        assert first_exit(confs, 0.9, 1, 3) is None

    def test_zero_threshold_exits_immediately(self):
        confs = np.array([0.5] * 12)
        assert first_exit(confs, 0.0, 1, 12) == 1

    def test_exactly_at_threshold_counts(self):
        confs = np.array([0.5, 0.9, 0.95])
        assert first_exit(confs, 0.9, 1, 3) == 2


class TestCascade:
    def test_mobile_branch(self):
        s = trace("a", [0.5, 0.95] + [0.99] * 10)
        out = cascade_outcome(s, 0.9, CFG)
        assert (out.device, out.exit_layer) == (Device.MOBILE, 2)

    def test_edge_branch(self):
        s = trace("a", [0.5, 0.6, 0.7, 0.8, 0.92] + [0.99] * 7)
        out = cascade_outcome(s, 0.9, CFG)
        assert (out.device, out.exit_layer) == (Device.EDGE, 5)

    def test_cloud_branch(self):
        s = trace("a", [0.8] * 6 + [0.99] * 6)
        out = cascade_outcome(s, 0.9, CFG)
        assert (out.device, out.exit_layer) == (Device.CLOUD, 12)

    def test_outcome_reads_trace_at_exit(self):
        preds = np.arange(12)
        s = trace("a", [0.5, 0.95] + [0.99] * 10, preds=preds, label=1)
        out = cascade_outcome(s, 0.9, CFG)
        assert out.prediction == 1
        assert out.confidence == 0.95
        assert out.correct

    def test_degenerate_equal_m_n_never_edge(self):
        cfg = DeploymentConfig(m=4, n=4, l=12)
        rng = np.random.default_rng(0)
        for _ in range(200):
            s = trace("a", rng.uniform(0.5, 1.0, 12))
            assert cascade_outcome(s, 0.9, cfg).device is not Device.EDGE

    def test_degenerate_n_equals_l(self):
        cfg = DeploymentConfig(m=3, n=12, l=12)
        confident_late = trace("a", [0.5] * 11 + [0.95])
        out = cascade_outcome(confident_late, 0.9, cfg)
        assert (out.device, out.exit_layer) == (Device.EDGE, 12)
        never = trace("b", [0.5] * 12)
        out = cascade_outcome(never, 0.9, cfg)
        assert (out.device, out.exit_layer) == (Device.CLOUD, 12)

    def test_device_depends_only_on_confidences_alpha_m_n(self):
        rng = np.random.default_rng(1)
        confs = rng.uniform(0.5, 1.0, 12)
        a = trace("a", confs, preds=np.zeros(12, dtype=int), embedding=rng.normal(size=4))
        b = trace("b", confs, preds=np.ones(12, dtype=int), embedding=rng.normal(size=4), label=1)
        oa, ob = cascade_outcome(a, 0.85, CFG), cascade_outcome(b, 0.85, CFG)
        assert (oa.device, oa.exit_layer) == (ob.device, ob.exit_layer)

    def test_exit_monotone_in_alpha(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            confs = rng.uniform(0.5, 1.0, 12)
            a1, a2 = sorted(rng.uniform(0.5, 1.0, 2))
            e1 = first_exit(confs, a1, 1, 12)
            e2 = first_exit(confs, a2, 1, 12)
            if e2 is not None:
                assert e1 is not None and e1 <= e2


# written out literally so the oracle can use the same float constants
COSTS = CostModel(
    lambda_mobile=0.15, lambda_edge=0.1, offload_edge=0.25, offload_cloud=0.3, cloud_charge=0.1
)


class TestExpectedReward:
    def test_single_sample(self):
        ts = trace_set([trace("a", [0.95] + [0.99] * 11)])
        # mobile exit at layer 1: 0.95 - 0.15
        assert empirical_expected_reward(ts, 0.9, CFG, COSTS) == pytest.approx(0.80)

    def test_mean_of_two(self):
        costs = CostModel(0.15, 0.10, 0.25, 0.30, 0.10)
        ts = trace_set(
            [
                trace("a", [0.5, 0.95] + [0.99] * 10),  # mobile@2: 0.95 - 0.30 = 0.65
                trace("b", [0.5] * 4 + [0.92] + [0.99] * 7),  # edge@5: 0.92 - 0.50 - 0.25 = 0.17
            ]
        )
        assert empirical_expected_reward(ts, 0.9, CFG, costs) == pytest.approx(0.41)

    def test_empty_set_rejected(self):
        with pytest.raises(ConfigError):
            empirical_expected_reward(trace_set([]), 0.9, CFG, COSTS)

    def test_fifty_sample_fixture_matches_oracle(self):
        ts = generate(replace(default_scenario(), num_samples=50, seed=9))
        for alpha in (0.6, 0.85, 0.95):
            expected = oracle.mean_cascade_reward(
                ts.samples, alpha, 3, 6, 12, 0.15, 0.1, 0.25, 0.3, 0.1
            )
            assert empirical_expected_reward(ts, alpha, CFG, COSTS) == expected


class TestCalibration:
    def test_tie_breaks_to_smallest_alpha(self):
        # every alpha <= 0.99 exits at layer 1 with the same reward
        ts = trace_set([trace(f"s{i}", [0.99] * 12) for i in range(5)])
        tiny = CostModel(1e-6, 1e-6, 1e-6, 1e-6, 1e-6)
        result = calibrate_threshold(ts, threshold_grid(2), CFG, tiny)
        assert result.alpha_star == 0.5

    def test_cloud_dominant_fixture_prefers_one(self):
        # free cloud, perfectly confident final layer, costly early exits;
        # early confidences cross every grid value except 1.0
        ts = trace_set([trace(f"s{i}", [0.95] * 11 + [1.0]) for i in range(5)])
        costs = CostModel(lambda_mobile=0.2, lambda_edge=0.2, offload_edge=0.2,
                          offload_cloud=0.0, cloud_charge=0.0)
        result = calibrate_threshold(ts, threshold_grid(2), CFG, costs)
        assert result.alpha_star == 1.0

    def test_matches_oracle_on_synthetic_set(self):
        ts = generate(replace(default_scenario(), num_samples=200, seed=3))
        grid = threshold_grid(2)
        result = calibrate_threshold(ts, grid, CFG, COSTS)
        alpha_star, profile = oracle.calibrate(
            ts.samples, list(grid.values), 3, 6, 12, 0.15, 0.1, 0.25, 0.3, 0.1
        )
        assert result.alpha_star == alpha_star
        assert list(result.expected_reward) == profile

    def test_alpha_star_non_increasing_in_cloud_offload(self):
        ts = generate(replace(default_scenario(), num_samples=300, seed=4))
        grid = threshold_grid(2)
        previous = None
        for o_c in (0.05, 0.1, 0.2, 0.4, 0.8, 1.6):
            costs = replace(COSTS, offload_cloud=o_c)
            alpha = calibrate_threshold(ts, grid, CFG, costs).alpha_star
            if previous is not None:
                assert alpha <= previous
            previous = alpha


def test_deployment_config_validation():
    with pytest.raises(ConfigError, match="1 <= m <= n <= l"):
        DeploymentConfig(m=7, n=6, l=12)
    with pytest.raises(ConfigError):
        DeploymentConfig(m=0, n=6, l=12)
    DeploymentConfig(m=1, n=1, l=1)
