"""Nearest-centroid routing, fixed and adaptive."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from tierroute import (
    ConfigError,
    DeploymentConfig,
    Device,
    PoolState,
    RoutingMode,
    build_pools,
    classify_embedding,
    initialize_router,
    load_router,
    route_adaptive,
    route_fixed,
    save_router,
)
from tierroute.synth import default_scenario, generate

import oracle
from util import trace

STATE = PoolState(
    centroid_easy=np.array([0.0, 0.0]),
    centroid_moderate=np.array([5.0, 5.0]),
    centroid_hard=np.array([10.0, 10.0]),
    count_easy=4,
    count_moderate=4,
    count_hard=4,
)


def emb_trace(sid, xy):
    return trace(sid, [0.9] * 12, embedding=np.asarray(xy, dtype=float), d=2)


class TestClassify:
    def test_nearest_wins(self):
        a = classify_embedding(np.array([1.0, 1.0]), STATE)
        assert a.device is Device.MOBILE
        assert set(a.distances) == {"easy", "moderate", "hard"}

    def test_tie_prefers_cheaper_device(self):
        midpoint = np.array([2.5, 2.5])
        assert classify_embedding(midpoint, STATE).device is Device.MOBILE

    def test_undefined_pool_excluded(self):
        state = PoolState(
            centroid_easy=np.array([0.0, 0.0]),
            centroid_moderate=np.array([5.0, 5.0]),
            centroid_hard=None,
            count_easy=4,
            count_moderate=4,
            count_hard=0,
        )
        a = classify_embedding(np.array([10.0, 10.0]), state)
        assert a.device is Device.EDGE
        assert "hard" not in a.distances

    def test_all_undefined_rejected(self):
        with pytest.raises(ConfigError):
            classify_embedding(np.zeros(2), PoolState(None, None, None, 0, 0, 0))

    def test_scale_invariance(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            x = rng.normal(size=2) * 6.0
            base = classify_embedding(x, STATE).device
            for t in (0.5, 3.0, 1000.0):
                scaled = PoolState(
                    centroid_easy=STATE.centroid_easy * t,
                    centroid_moderate=STATE.centroid_moderate * t,
                    centroid_hard=STATE.centroid_hard * t,
                    count_easy=4,
                    count_moderate=4,
                    count_hard=4,
                )
                assert classify_embedding(x * t, scaled).device is base

    def test_cosine_metric(self):
        state = PoolState(
            centroid_easy=np.array([1.0, 0.0]),
            centroid_moderate=np.array([0.0, 1.0]),
            centroid_hard=np.array([-1.0, 0.0]),
            count_easy=1,
            count_moderate=1,
            count_hard=1,
        )
        # magnitude is irrelevant under cosine; direction decides the pool
        a = classify_embedding(np.array([100.0, 1.0]), state, metric="cosine")
        assert a.device is Device.MOBILE
        b = classify_embedding(np.array([0.5, 80.0]), state, metric="cosine")
        assert b.device is Device.EDGE

    def test_unknown_metric_rejected(self):
        with pytest.raises(ConfigError, match="distance metric"):
            classify_embedding(np.zeros(2), STATE, metric="manhattan")


class TestFixed:
    def test_pure(self):
        t = emb_trace("a", [1.0, 1.0])
        first = route_fixed(t, STATE)
        second = route_fixed(t, STATE)
        assert first == second

    def test_order_independent(self):
        rng = np.random.default_rng(13)
        batch = [emb_trace(f"s{i}", rng.normal(size=2) * 5) for i in range(50)]
        forward = {t.id: route_fixed(t, STATE).device for t in batch}
        backward = {t.id: route_fixed(t, STATE).device for t in reversed(batch)}
        assert forward == backward

    def test_matches_oracle_on_scenario(self):
        ts = generate(replace(default_scenario(), num_samples=300, seed=14))
        pools, _ = build_pools(ts, 0.9444444444444444, DeploymentConfig(3, 6, 12))
        centroids = {
            lb: (None if pools.centroid(lb) is None else pools.centroid(lb).tolist())
            for lb in ("easy", "moderate", "hard")
        }
        device_for = {"easy": Device.MOBILE, "moderate": Device.EDGE, "hard": Device.CLOUD}
        for s in ts:
            expected = oracle.nearest_pool(s.embedding.tolist(), centroids)
            assert route_fixed(s, pools).device is device_for[expected]


class TestAdaptive:
    def test_running_mean_update(self):
        state = PoolState(
            centroid_easy=np.array([1.0, 1.0]),
            centroid_moderate=np.array([9.0, 9.0]),
            centroid_hard=np.array([20.0, 20.0]),
            count_easy=4,
            count_moderate=1,
            count_hard=1,
        )
        assignment, updated = route_adaptive(emb_trace("a", [2.0, 2.0]), state)
        assert assignment.device is Device.MOBILE
        np.testing.assert_allclose(updated.centroid_easy, [1.2, 1.2], atol=1e-15)
        assert updated.count_easy == 5
        np.testing.assert_array_equal(updated.centroid_moderate, state.centroid_moderate)

    def test_only_chosen_pool_changes(self):
        assignment, updated = route_adaptive(emb_trace("a", [11.0, 11.0]), STATE)
        assert assignment.device is Device.CLOUD
        np.testing.assert_array_equal(updated.centroid_easy, STATE.centroid_easy)
        np.testing.assert_array_equal(updated.centroid_moderate, STATE.centroid_moderate)
        assert updated.count_hard == 5
        assert updated.count_easy == 4 and updated.count_moderate == 4

    def test_assignment_uses_pre_update_state(self):
        # sample sits closer to easy; after enough updates the centroid
        # moves, but the very first assignment must use the initial state
        state = PoolState(
            centroid_easy=np.array([0.0, 0.0]),
            centroid_moderate=np.array([4.0, 4.0]),
            centroid_hard=None,
            count_easy=1,
            count_moderate=1,
            count_hard=0,
        )
        assignment, updated = route_adaptive(emb_trace("a", [1.9, 1.9]), state)
        assert assignment.device is Device.MOBILE
        np.testing.assert_allclose(updated.centroid_easy, [0.95, 0.95])

    def test_stream_equals_batch_mean(self):
        rng = np.random.default_rng(15)
        state = STATE
        xs = rng.normal(size=(400, 2)) * 4.0
        sums = {lb: np.asarray(STATE.centroid(lb)) * STATE.count(lb) for lb in ("easy", "moderate", "hard")}
        counts = {lb: STATE.count(lb) for lb in ("easy", "moderate", "hard")}
        label_of = {Device.MOBILE: "easy", Device.EDGE: "moderate", Device.CLOUD: "hard"}
        for i, x in enumerate(xs):
            assignment, state = route_adaptive(emb_trace(f"s{i}", x), state)
            lb = label_of[assignment.device]
            sums[lb] = sums[lb] + x
            counts[lb] += 1
            for pool in ("easy", "moderate", "hard"):
                batch_mean = sums[pool] / counts[pool]
                assert float(np.max(np.abs(state.centroid(pool) - batch_mean))) <= 1e-9

    def test_count_conservation(self):
        rng = np.random.default_rng(16)
        state = STATE
        n0 = state.total_count()
        for i in range(100):
            _, state = route_adaptive(emb_trace(f"s{i}", rng.normal(size=2) * 5), state)
        assert state.total_count() == n0 + 100


class TestRouterState:
    def test_counts_copied(self):
        router = initialize_router(STATE, RoutingMode.FIXED)
        assert router.pools.count_easy == 4

    def test_fixed_mode_never_mutates(self):
        router = initialize_router(STATE, RoutingMode.FIXED)
        before = router.pools
        for i in range(20):
            router.route(emb_trace(f"s{i}", [float(i % 12), 1.0]))
        assert router.pools is before

    def test_adaptive_mode_increments_exactly_one_count(self):
        router = initialize_router(STATE, RoutingMode.ADAPTIVE)
        router.route(emb_trace("a", [0.5, 0.5]))
        counts = (router.pools.count_easy, router.pools.count_moderate, router.pools.count_hard)
        assert counts == (5, 4, 4)

    def test_all_empty_rejected(self):
        with pytest.raises(ConfigError):
            initialize_router(
                PoolState(None, None, None, 0, 0, 0), RoutingMode.FIXED
            )

    def test_snapshot_round_trip(self, tmp_path):
        router = initialize_router(STATE, RoutingMode.ADAPTIVE, metric="cosine")
        save_router(router, tmp_path / "router.json", embedding_dim=2)
        back = load_router(tmp_path / "router.json")
        assert back.mode is RoutingMode.ADAPTIVE
        assert back.metric == "cosine"
        np.testing.assert_array_equal(back.pools.centroid_hard, STATE.centroid_hard)
