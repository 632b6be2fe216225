import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from swa_sim.game import GameConfig, intrinsic_reward, step, welfare


class TestGameConfig:
    def test_defaults(self):
        c = GameConfig()
        assert (c.n, c.C, c.beta, c.x_max, c.T) == (5, 20.0, 1.6, 8.0, 20)

    @pytest.mark.parametrize(
        "kwargs, match",
        [
            ({"n": 1, "beta": 1.5}, "n must be"),
            ({"beta": 1.0}, "beta must be > 1"),
            ({"beta": 5.0}, "beta < n"),
            ({"C": 0.0}, "capacity"),
            ({"x_max": 4.0}, "overload is reachable"),
            ({"T": 0}, "T must be"),
            ({"x_max": -1.0}, "x_max"),
        ],
    )
    def test_rejects(self, kwargs, match):
        with pytest.raises(ValueError, match=match):
            GameConfig(**kwargs)


class TestIntrinsicReward:
    def test_at_capacity(self, cfg):
        assert intrinsic_reward(cfg, (4, 4, 4, 4, 4), 0) == 4.0

    def test_symmetric_overload(self, cfg):
        assert intrinsic_reward(cfg, (5, 5, 5, 5, 5), 0) == pytest.approx(3.4, abs=1e-12)

    def test_asymmetric_overload(self, cfg):
        assert intrinsic_reward(cfg, (4, 5, 5, 5, 6), 0) == pytest.approx(2.4, abs=1e-12)

    def test_index_out_of_range(self, cfg):
        with pytest.raises(IndexError):
            intrinsic_reward(cfg, (4, 4, 4, 4, 4), 5)

    @pytest.mark.parametrize("x", [(4, 4, 4, 4), (4, 4, 4, 4, 9), (4, 4, 4, 4, -1)])
    def test_invalid_profile(self, cfg, x):
        with pytest.raises(ValueError):
            intrinsic_reward(cfg, x, 0)


class TestWelfare:
    @pytest.mark.parametrize("X, beta, expected", [(20, 1.6, 20.0), (25, 1.6, 17.0), (25, 3.0, 10.0)])
    def test_examples(self, X, beta, expected):
        assert welfare(GameConfig(beta=beta), X) == pytest.approx(expected, abs=1e-12)

    def test_negative_load(self, cfg):
        with pytest.raises(ValueError):
            welfare(cfg, -1.0)

    def test_peak_at_capacity(self, cfg):
        grid = [0.1 * k for k in range(401)]
        best = max(grid, key=lambda X: welfare(cfg, X))
        assert best == pytest.approx(cfg.C)
        assert welfare(cfg, cfg.C) == cfg.C

    def test_piecewise_slopes(self, cfg):
        h = 1e-3
        for X in (1.0, 10.0, 19.0):
            assert (welfare(cfg, X + h) - welfare(cfg, X - h)) / (2 * h) == pytest.approx(1.0, abs=1e-9)
        for X in (21.0, 30.0, 39.0):
            assert (welfare(cfg, X + h) - welfare(cfg, X - h)) / (2 * h) == pytest.approx(1 - cfg.beta, abs=1e-9)


class TestStep:
    def test_overloaded(self, cfg):
        r = step(cfg, 1, (5, 5, 5, 5, 5))
        assert r.X == 25 and r.W == pytest.approx(17.0) and r.overloaded
        assert all(v == pytest.approx(3.4) for v in r.rewards)

    def test_zero(self, cfg):
        r = step(cfg, 1, (0,) * 5)
        assert r.X == 0 and r.W == 0 and not r.overloaded and r.rewards == (0.0,) * 5

    def test_severe(self, cfg3):
        r = step(cfg3, 1, (8,) * 5)
        assert r.X == 40 and r.W == pytest.approx(-20.0)
        assert all(v == pytest.approx(-4.0) for v in r.rewards)

    def test_at_capacity_not_overloaded(self, cfg):
        assert not step(cfg, 1, (4,) * 5).overloaded

    def test_float_noise_at_capacity_not_overloaded(self, cfg):
        # 0.1-grid demands summing to 20 up to rounding
        r = step(cfg, 1, (0.1 * 44, 0.1 * 53, 0.1 * 5, 0.1 * 33, 0.1 * 65))
        assert abs(r.X - 20) < 1e-12
        assert not r.overloaded


demand = st.floats(min_value=0.0, max_value=8.0, allow_nan=False)
profiles = st.lists(demand, min_size=5, max_size=5)
betas = st.floats(min_value=1.01, max_value=4.99)


@given(profiles, betas)
def test_adding_up(x, beta):
    cfg = GameConfig(beta=beta)
    total = sum(intrinsic_reward(cfg, x, i) for i in range(5))
    W = welfare(cfg, math.fsum(x))
    assert math.isclose(total, W, rel_tol=1e-9, abs_tol=1e-9)


@given(profiles, st.permutations(range(1, 5)))
def test_symmetry_in_peers(x, perm):
    cfg = GameConfig()
    y = [x[0]] + [x[j] for j in perm]
    assert intrinsic_reward(cfg, y, 0) == pytest.approx(intrinsic_reward(cfg, x, 0), abs=1e-12)


@given(st.floats(min_value=20.5, max_value=39.0), st.floats(min_value=0.01, max_value=1.0), betas)
def test_monotone_damage(X, dx, beta):
    cfg = GameConfig(beta=beta)
    assert welfare(cfg, X + dx) < welfare(cfg, X)
    assert (welfare(cfg, X + dx) - welfare(cfg, X)) / dx == pytest.approx(1 - beta, abs=1e-6)


@given(profiles)
def test_step_invariants(x):
    cfg = GameConfig()
    r = step(cfg, 3, x)
    assert r.X == pytest.approx(sum(x))
    assert r.overloaded == (r.X > cfg.C + 1e-9)
    assert math.isclose(math.fsum(r.rewards), r.W, rel_tol=1e-9, abs_tol=1e-9)
