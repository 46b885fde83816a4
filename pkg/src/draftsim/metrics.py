"""Evaluation metrics: EnvSim, win rates, the generalization sweep, KL-based
memory influence and Welch's t-test."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.special import betainc

from .config import GameConfig, Menu
from .dqn.network import QNetwork
from .dqn.train import DQNAgent, policy_distribution
from .errors import ConfigError, RemapError, ShapeError, StatisticsError
from .observation import FeatureLayout, Observation, perturb_memory, perturbation_options
from .runner import game_seed, play_game

Z95 = 1.959963984540054


def envsim(a: Menu | Iterable[str], b: Menu | Iterable[str]) -> int:
    """Size of the symmetric difference of the two card sets."""
    sa = set(a.items if isinstance(a, Menu) else a)
    sb = set(b.items if isinstance(b, Menu) else b)
    return len(sa ^ sb)


# -- win rates ---------------------------------------------------------------

def wilson_interval(successes: float, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class WinRateResult:
    win_rate: float
    ci_low: float
    ci_high: float
    n_games: int
    credits: list[float] = field(default_factory=list)  # per game, 1/|winners| if the agent won
    scores: list[int] = field(default_factory=list)  # the agent's final score per game
    rewards: list[float] = field(default_factory=list)  # score + 100 on a win

    @property
    def mean_reward(self) -> float:
        return float(np.mean(self.rewards)) if self.rewards else float("nan")


def evaluate_win_rate(agent, opponents: Sequence, game_config: GameConfig, n_games: int,
                      seed: int, log=None) -> WinRateResult:
    """Play ``n_games`` with ``agent`` rotating through every seat.

    Ties credit ``1/|winners|`` so identical agents split exactly 1 per game.
    """
    from .dqn.train import WIN_BONUS

    if n_games < 1:
        raise ConfigError("n_games must be >= 1")
    players = game_config.players
    if len(opponents) != players - 1:
        raise ConfigError(f"need {players - 1} opponents, got {len(opponents)}")
    credits, scores, rewards = [], [], []
    for g in range(n_games):
        seat = g % players
        seats = list(opponents)
        seats.insert(seat, agent)
        rng = np.random.default_rng([seed, g, 1])
        record = play_game(game_config.with_seed(game_seed(seed, g)), seats, rng, log=log, game_id=g)
        won = seat in record.result.winners
        credits.append(1.0 / len(record.result.winners) if won else 0.0)
        scores.append(record.result.scores[seat])
        rewards.append(record.result.scores[seat] + (WIN_BONUS if won else 0))
    total = float(sum(credits))
    lo, hi = wilson_interval(total, n_games)
    return WinRateResult(total / n_games, lo, hi, n_games, credits, scores, rewards)


# -- generalization ------------------------------------------------------------

@dataclass
class SweepCell:
    train: str
    test: str
    envsim: int
    mean_win_rate: float
    std_win_rate: float
    n_models: int
    n_batches: int
    games: int
    win_rates: list[float] = field(default_factory=list)

    @property
    def swaps(self) -> int:
        return self.envsim // 2


@dataclass
class GenSweepResult:
    cells: list[SweepCell]

    def value(self, train: str, test: str) -> SweepCell:
        for c in self.cells:
            if (c.train, c.test) == (train, test):
                return c
        raise KeyError((train, test))

    def by_envsim(self) -> dict[int, list[SweepCell]]:
        groups: dict[int, list[SweepCell]] = {}
        for c in sorted(self.cells, key=lambda c: c.envsim):
            groups.setdefault(c.envsim, []).append(c)
        return groups

    def grouped(self) -> list[dict]:
        rows = []
        for k, cells in self.by_envsim().items():
            rates = [c.mean_win_rate for c in cells]
            rows.append({"envsim": k, "swaps": k // 2, "cells": len(cells),
                         "mean_win_rate": float(np.mean(rates)),
                         "std_win_rate": float(np.std(rates))})
        return rows

    CELL_COLUMNS = ["train_config", "test_config", "envsim", "swaps", "mean_win_rate",
                    "std_win_rate", "n_models", "n_batches", "games_per_batch"]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.CELL_COLUMNS)
            for c in self.cells:
                w.writerow([c.train, c.test, c.envsim, c.swaps, f"{c.mean_win_rate:.6f}",
                            f"{c.std_win_rate:.6f}", c.n_models, c.n_batches, c.games])

    def write_grouped_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["envsim", "swaps", "cells", "mean_win_rate", "std_win_rate"])
            for r in self.grouped():
                w.writerow([r["envsim"], r["swaps"], r["cells"], f"{r['mean_win_rate']:.6f}",
                            f"{r['std_win_rate']:.6f}"])


def check_layout(layout: FeatureLayout, config: GameConfig) -> None:
    expected = FeatureLayout.for_config(config, layout.memory)
    if layout != expected:
        diffs = [f"{name}: model {getattr(layout, name)!r} vs game {getattr(expected, name)!r}"
                 for name in ("kinds", "players", "rounds", "hand_size")
                 if getattr(layout, name) != getattr(expected, name)]
        raise RemapError("feature layouts differ; build every config over one shared card "
                         "universe. " + "; ".join(diffs))


def generalization_sweep(models: Mapping[str, Sequence[tuple[QNetwork, FeatureLayout]]],
                         train_menus: Mapping[str, Menu],
                         test_configs: Mapping[str, GameConfig],
                         opponent_factory: Callable[[GameConfig], Sequence],
                         games_per_batch: int, batch_seeds: Sequence[int]) -> GenSweepResult:
    """Evaluate every trained model on every test configuration.

    Each (model, batch) pair yields one win rate; a cell's mean and std are
    over all of them.
    """
    cells = []
    for train_name, nets in models.items():
        for test_name, cfg in test_configs.items():
            rates = []
            for net, layout in nets:
                check_layout(layout, cfg)
                agent = DQNAgent(net, layout.memory)
                for b in batch_seeds:
                    res = evaluate_win_rate(agent, opponent_factory(cfg), cfg, games_per_batch, b)
                    rates.append(res.win_rate)
            cells.append(SweepCell(train_name, test_name, envsim(train_menus[train_name], cfg.menu),
                                   float(np.mean(rates)), float(np.std(rates)), len(nets),
                                   len(batch_seeds), games_per_batch, rates))
    return GenSweepResult(cells)


# -- memory influence ----------------------------------------------------------

def kl_divergence(p: np.ndarray, q: np.ndarray, floor: float = 1e-12) -> float:
    """KL(p || q) in nats; terms with p_i = 0 contribute 0, q is floored at 1e-12."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ShapeError(f"distributions must be 1-d and equal length: {p.shape} vs {q.shape}")
    if abs(p.sum() - 1) > 1e-9 or abs(q.sum() - 1) > 1e-9:
        raise ShapeError("inputs must sum to 1")
    support = p > 0
    return float(np.sum(p[support] * np.log(p[support] / np.maximum(q[support], floor))))


@dataclass
class PerturbationRecord:
    state: int
    removed: int
    added: int
    kl: float


@dataclass
class MemInfluenceReport:
    mean_kl: float
    state_kls: list[float]
    perturbations: list[PerturbationRecord]
    n_states: int
    n_pert: int
    max_state: int
    max_kl: float
    top_action: int  # argmax before perturbation, at the max-KL perturbation
    perturbed_action: int  # argmax after
    runner_up: int  # second most likely action before perturbation
    probability_shift: float  # |p'(top) - p(top)|
    observations: list[Observation] = field(default_factory=list, repr=False)


def _memory_layout(net: QNetwork, game_config: GameConfig) -> FeatureLayout:
    with_mem = FeatureLayout.for_config(game_config, True)
    if net.input_dim == with_mem.length:
        return with_mem
    if net.input_dim == FeatureLayout.for_config(game_config, False).length:
        raise ConfigError("network was trained without the memory block")
    raise ShapeError(f"network input {net.input_dim} matches no layout for this game")


def sample_memory_states(net: QNetwork, game_config: GameConfig, n_states: int, seed: int,
                         max_games: int = 10_000) -> list[Observation]:
    """Observations from greedy self-play in the second half of each round.

    Only states whose previous-player memory is known and nonempty qualify.
    A pool four times the requested size is gathered, then sampled uniformly.
    """
    first_turn = math.ceil(game_config.hand_size / 2)
    agent = DQNAgent(net, memory=True)
    pool: list[Observation] = []

    def keep(state, seat, obs, action):
        if state.turn >= first_turn:
            row = obs.memory[obs.upstream]
            if row[0] and row[1:].any():
                pool.append(obs)

    g = 0
    while len(pool) < 4 * n_states and g < max_games:
        rng = np.random.default_rng([seed, g, 2])
        play_game(game_config.with_seed(game_seed(seed, g)), [agent] * game_config.players, rng,
                  on_decision=keep)
        g += 1
    if len(pool) < n_states:
        raise StatisticsError(f"only {len(pool)} eligible states after {g} games")
    pick = np.random.default_rng([seed, 3]).choice(len(pool), size=n_states, replace=False)
    return [pool[i] for i in sorted(pick)]


def influence_over(net: QNetwork, observations: Sequence[Observation], n_pert: int, seed: int,
                   temperature: float = 1.0) -> MemInfluenceReport:
    rng = np.random.default_rng([seed, 4])
    records: list[PerturbationRecord] = []
    state_kls = []
    best = None
    for i, obs in enumerate(observations):
        p = policy_distribution(net, obs.vector(True), obs.legal_mask, temperature)
        kls = []
        for _ in range(n_pert):
            options = perturbation_options(obs)
            removed, added = options[int(rng.integers(len(options)))]
            pert = perturb_memory(obs, rng, (removed, added))
            p2 = policy_distribution(net, pert.vector(True), obs.legal_mask, temperature)
            kl = kl_divergence(p2, p)
            kls.append(kl)
            records.append(PerturbationRecord(i, removed, added, kl))
            if best is None or kl > best[0]:
                best = (kl, i, p, p2)
        state_kls.append(float(np.mean(kls)))
    kl, idx, p, p2 = best
    order = np.argsort(-p, kind="stable")
    top = int(order[0])
    runner = int(order[1]) if np.count_nonzero(p) > 1 else top
    return MemInfluenceReport(float(np.mean(state_kls)), state_kls, records, len(observations),
                              n_pert, idx, float(kl), top, int(np.argmax(p2)), runner,
                              float(abs(p2[top] - p[top])), list(observations))


def mem_influence(net: QNetwork, game_config: GameConfig, n_states: int = 100, n_pert: int = 10,
                  seed: int = 0, temperature: float = 1.0) -> MemInfluenceReport:
    """Mean KL(pi(.|perturbed) || pi(.|original)) over sampled late-round states."""
    _memory_layout(net, game_config)
    states = sample_memory_states(net, game_config, n_states, seed)
    return influence_over(net, states, n_pert, seed, temperature)


# -- Welch's t-test -----------------------------------------------------------------

@dataclass(frozen=True)
class TTestReport:
    mean_a: float
    mean_b: float
    mean_diff: float
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    n_a: int
    n_b: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def welch_t_test(xs: Sequence[float], ys: Sequence[float]) -> TTestReport:
    a = np.asarray(xs, dtype=np.float64)
    b = np.asarray(ys, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise StatisticsError("each sample needs at least 2 values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    if va + vb == 0:
        raise StatisticsError("both samples have zero variance")
    diff = a.mean() - b.mean()
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    p = min(1.0, max(0.0, t_two_sided_p(t, df)))
    return TTestReport(float(a.mean()), float(b.mean()), float(diff), float(t), float(df), p,
                       int(a.size), int(b.size))
