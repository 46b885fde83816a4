import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from draftsim.agents import RandomAgent
from draftsim.config import make_game_config, sweep_configs
from draftsim.dqn import QNetwork
from draftsim.errors import ConfigError, RemapError, ShapeError, StatisticsError
from draftsim.metrics import (
    envsim,
    evaluate_win_rate,
    generalization_sweep,
    kl_divergence,
    mem_influence,
    welch_t_test,
    wilson_interval,
)
from draftsim.observation import FeatureLayout
from draftsim.runner import play_game

# (xs, ys, t, df, p) - values from an independent implementation, 4 significant figures
WELCH = {
    "small_shift": ([1, 2, 3], [4, 5, 6], -3.674, 4.0, 0.02131),
    "unequal_var": ([27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0,
                     21.7, 21.4],
                    [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9,
                     20.5, 24.4], -2.455, 24.99, 0.02138),
    "unequal_n": ([19.8, 20.4, 19.6, 17.8, 18.5, 18.9, 18.3, 18.9, 19.5, 22.0],
                  [28.2, 26.6, 20.1, 23.3, 25.2, 22.1, 17.7, 27.6, 20.6, 13.7, 23.2, 17.5, 20.6,
                   18.0, 23.9, 21.6, 24.3, 20.4, 23.9, 13.3], -2.226, 24.52, 0.03548),
    "positive_diff": ([30.02, 29.99, 30.11, 29.97, 30.01, 29.99],
                      [29.89, 29.93, 29.72, 29.98, 30.02, 29.98], 1.959, 7.031, 0.09077),
    "two_points": ([0.0, 2.0], [1.0, 1.5, 2.0, 2.5], -0.7137, 1.215, 0.5874),
}


def sig4(x):
    return float(f"{x:.4g}")


@pytest.mark.parametrize("name", WELCH)
def test_welch_fixtures(name):
    xs, ys, t, df, p = WELCH[name]
    r = welch_t_test(xs, ys)
    assert (sig4(r.t_statistic), sig4(r.degrees_of_freedom), sig4(r.p_value)) == (t, df, p)
    assert r.mean_diff == pytest.approx(np.mean(xs) - np.mean(ys))


def test_welch_identical_samples():
    r = welch_t_test([1.0, 2.0, 4.0], [1.0, 2.0, 4.0])
    assert r.t_statistic == 0 and r.p_value == 1


def test_welch_errors():
    with pytest.raises(StatisticsError):
        welch_t_test([1.0], [1.0, 2.0])
    with pytest.raises(StatisticsError):
        welch_t_test([1.0, 1.0], [2.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(xs=st.lists(st.floats(-100, 100), min_size=2, max_size=12),
       ys=st.lists(st.floats(-100, 100), min_size=2, max_size=12),
       scale=st.floats(0.1, 10))
def test_welch_symmetry_and_scale(xs, ys, scale):
    if np.var(xs) + np.var(ys) < 1e-6:
        return
    a, b = welch_t_test(xs, ys), welch_t_test(ys, xs)
    assert a.t_statistic == pytest.approx(-b.t_statistic, abs=1e-9)
    assert a.p_value == pytest.approx(b.p_value, abs=1e-12)
    assert 0 <= a.p_value <= 1
    c = welch_t_test([x * scale for x in xs], [y * scale for y in ys])
    assert c.t_statistic == pytest.approx(a.t_statistic, rel=1e-6, abs=1e-9)


def test_kl_fixtures():
    assert kl_divergence(np.array([0.3, 0.7]), np.array([0.3, 0.7])) == 0
    assert abs(kl_divergence(np.array([0.25, 0.75]), np.array([0.5, 0.5]))
               - 0.13081203594113697) < 1e-9
    # a zero entry in p contributes nothing
    assert abs(kl_divergence(np.array([0.0, 1.0]), np.array([0.5, 0.5])) - math.log(2)) < 1e-9
    with pytest.raises(ShapeError):
        kl_divergence(np.array([1.0]), np.array([0.5, 0.5]))
    with pytest.raises(ShapeError):
        kl_divergence(np.array([0.2, 0.2]), np.array([0.5, 0.5]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1), min_size=2, max_size=8), st.integers(0, 1000))
def test_kl_nonnegative(weights, seed):
    p = np.array(weights) / np.sum(weights)
    q = np.random.default_rng(seed).dirichlet(np.ones(len(p)))
    assert kl_divergence(p, q) >= -1e-12


# -- envsim -----------------------------------------------------------------------

def test_envsim_examples():
    assert envsim(["a", "b"], ["a", "b"]) == 0
    assert envsim(["a", "b"], ["a", "c"]) == 2
    assert envsim([f"x{i}" for i in range(8)], [f"y{i}" for i in range(8)]) == 16


def test_envsim_is_metric_on_small_sets():
    menus = [frozenset(c) for c in itertools.combinations("abcdef", 3)]
    for a in menus:
        for b in menus:
            d = envsim(a, b)
            assert d == envsim(b, a) and d % 2 == 0 and (d == 0) == (a == b)
            for c in menus:
                assert envsim(a, c) <= d + envsim(b, c)


# -- win rate ---------------------------------------------------------------------

def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert (round(lo, 4), round(hi, 4)) == (0.4038, 0.5962)
    assert wilson_interval(0, 10)[0] == 0.0


def test_identical_agents_near_quarter(mfm):
    res = evaluate_win_rate(RandomAgent(), [RandomAgent()] * 3, mfm, 400, 0)
    assert res.ci_low < 0.25 < res.ci_high
    assert res.n_games == 400 and len(res.rewards) == 400


def test_win_credit_sums_to_one(mfm):
    rng = np.random.default_rng(0)
    for g in range(30):
        record = play_game(mfm.with_seed(g), [RandomAgent()] * 4, rng)
        credits = [1 / len(record.result.winners) if s in record.result.winners else 0
                   for s in range(4)]
        assert sum(credits) == 1


def test_evaluate_deterministic(mfm):
    a = evaluate_win_rate(RandomAgent(), [RandomAgent()] * 3, mfm, 40, 5)
    b = evaluate_win_rate(RandomAgent(), [RandomAgent()] * 3, mfm, 40, 5)
    assert a == b


def test_evaluate_validation(mfm):
    with pytest.raises(ConfigError):
        evaluate_win_rate(RandomAgent(), [RandomAgent()] * 2, mfm, 10, 0)
    with pytest.raises(ConfigError):
        evaluate_win_rate(RandomAgent(), [RandomAgent()] * 3, mfm, 0, 0)


# -- generalization sweep --------------------------------------------------------------

def test_sweep_cells_and_groups():
    configs = sweep_configs()
    first = next(iter(configs.values()))
    lay = FeatureLayout.for_config(first, False)
    models = {name: [(QNetwork.init(lay.length, first.n, np.random.default_rng(i), (8,)), lay)]
              for i, name in enumerate(configs)}
    res = generalization_sweep(models, {k: v.menu for k, v in configs.items()}, configs,
                               lambda cfg: [RandomAgent()] * 3, 4, [0, 1])
    assert len(res.cells) == 25
    assert all(c.envsim == 0 for c in res.cells if c.train == c.test)
    assert sorted(res.by_envsim()) == [0, 2, 4, 6, 8]
    assert sum(len(v) for v in res.by_envsim().values()) == 25
    grouped = res.grouped()
    weighted = sum(r["mean_win_rate"] * r["cells"] for r in grouped) / 25
    assert weighted == pytest.approx(np.mean([c.mean_win_rate for c in res.cells]))
    names = list(configs)
    assert res.value(names[0], names[2]).envsim == res.value(names[2], names[0]).envsim == 4


def test_sweep_layout_mismatch():
    cfg = make_game_config("my_first_meal")
    lay = FeatureLayout.for_config(cfg, False)
    net = QNetwork.init(lay.length, cfg.n, np.random.default_rng(0), (8,))
    other = make_game_config("cutthroat_combo")
    with pytest.raises(RemapError):
        generalization_sweep({"a": [(net, lay)]}, {"a": cfg.menu}, {"b": other},
                             lambda c: [RandomAgent()] * 3, 1, [0])


# -- MemInfluence -------------------------------------------------------------------

def memory_net(cfg, seed=0, zero_memory=False):
    lay = FeatureLayout.for_config(cfg, True)
    net = QNetwork.init(lay.length, cfg.n, np.random.default_rng(seed), (16,))
    if zero_memory:
        net.weights[0][lay.slice("memory"), :] = 0
    return net, lay


def test_meminfluence_zero_for_zeroed_memory(mfm):
    net, _ = memory_net(mfm, zero_memory=True)
    rep = mem_influence(net, mfm, n_states=20, n_pert=5, seed=0)
    assert rep.mean_kl == 0 and all(k == 0 for k in rep.state_kls)


def test_meminfluence_nonnegative(mfm):
    net, _ = memory_net(mfm)
    rep = mem_influence(net, mfm, n_states=20, n_pert=5, seed=1)
    assert rep.mean_kl >= 0 and min(rep.state_kls) >= 0
    assert rep.n_states == 20 and rep.n_pert == 5 and len(rep.perturbations) == 100
    assert all(o.turn >= 5 for o in rep.observations)


def test_meminfluence_requires_memory(mfm):
    lay = FeatureLayout.for_config(mfm, False)
    net = QNetwork.init(lay.length, mfm.n, np.random.default_rng(0), (8,))
    with pytest.raises(ConfigError):
        mem_influence(net, mfm, 5, 2)


def analytic_linear_case(cfg, action=None, seed=0):
    """Linear net: one action's Q-value is a weighted sum of the remembered upstream counts.

    Negative weights keep the action in hands so most perturbations move the policy.
    """
    lay = FeatureLayout.for_config(cfg, True)
    action = cfg.kind_id("tempura") if action is None else action
    w = -0.1 * np.arange(1, cfg.n + 1)
    W = np.zeros((lay.length, cfg.n))
    for k in range(cfg.n):
        W[lay.memory_index(0, k), action] = w[k]
    rep = mem_influence(QNetwork([W], [np.zeros(cfg.n)]), cfg, n_states=100, n_pert=10, seed=seed)

    def closed_form(obs, removed, added):
        # softmax over m legal actions, all at q = 0 except `action` at x
        legal = obs.legal_mask
        if not legal[action] or legal.sum() == 1:
            return 0.0
        x = float(w @ obs.memory[obs.upstream, 1:])
        x2 = x + w[added] - w[removed]
        m = int(legal.sum())
        p2 = math.exp(x2) / (math.exp(x2) + m - 1)
        return p2 * (x2 - x) - math.log((math.exp(x2) + m - 1) / (math.exp(x) + m - 1))

    expected = [closed_form(rep.observations[r.state], r.removed, r.added) for r in rep.perturbations]
    return rep, expected


def test_meminfluence_matches_closed_form():
    cfg = make_game_config("my_first_meal")
    rep, expected = analytic_linear_case(cfg)
    got = np.array([r.kl for r in rep.perturbations])
    expected = np.array(expected)
    assert np.all(np.abs(got - expected) <= 1e-6 * np.abs(expected) + 1e-12)
    assert np.count_nonzero(expected) >= 300
    mean = np.mean(expected.reshape(100, 10).mean(axis=1))
    assert mean > 0
    assert abs(rep.mean_kl - mean) / mean < 1e-6
