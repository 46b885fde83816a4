"""DQN self-play: exploration, TD targets, gradient steps and the training loop.

One shared network plays every seat; all seats' transitions go into a single
replay buffer.  A seat's reward is its round score when a round ends, plus its
dessert points and a win bonus on the final transition, so the rewards of a
game sum to the seat's final score (+100 for each winner).
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from ..config import GameConfig
from ..engine import finalize, new_game, step
from ..errors import ConfigError, StateError, TrainingError
from ..observation import FeatureLayout, observe
from ..runner import game_seed
from .network import HIDDEN, QNetwork, q_loss_and_grads
from .replay import Batch, ReplayBuffer, ReplayEntry

log = logging.getLogger(__name__)

WIN_BONUS = 100


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.5  # share of training spent decaying epsilon
    buffer_capacity: int = 100_000
    batch_size: int = 64
    lr: float = 1e-3
    optimizer: str = "sgd"
    target_sync: int = 1000  # gradient steps between target-network copies
    epochs: int = 10
    games_per_epoch: int = 2000
    train_every: int = 2  # environment steps per gradient step
    warmup: int = 1000  # transitions collected before the first gradient step
    huber_delta: float = 1.0
    hidden: tuple[int, ...] = HIDDEN
    dtype: str = "float32"  # training precision; checkpoints always store float64
    memory_enabled: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        for name in ("epsilon_start", "epsilon_end", "epsilon_decay_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if min(self.batch_size, self.buffer_capacity, self.epochs, self.games_per_epoch,
               self.target_sync, self.train_every) < 1 or self.lr <= 0:
            raise ConfigError("sizes, counts and lr must be positive")
        object.__setattr__(self, "hidden", tuple(self.hidden))

    @property
    def total_games(self) -> int:
        return self.epochs * self.games_per_epoch

    def epsilon(self, game: int) -> float:
        span = self.epsilon_decay_fraction * self.total_games
        frac = 1.0 if span <= 0 else min(1.0, game / span)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown train config fields {sorted(unknown)}")
        return cls(**d)


def act_epsilon_greedy(q: np.ndarray, mask: np.ndarray, epsilon: float,
                       rng: np.random.Generator) -> int:
    """Uniform legal action with probability epsilon, else the best legal one (lowest id on ties)."""
    legal = np.flatnonzero(mask)
    if legal.size == 0:
        raise StateError("no legal action")
    if epsilon > 0 and rng.random() < epsilon:
        return int(legal[rng.integers(legal.size)])
    return int(legal[np.argmax(np.asarray(q)[legal])])


def masked_max(q: np.ndarray, masks: np.ndarray) -> np.ndarray:
    return np.where(masks, q, -np.inf).max(axis=1)


def td_target(entry: ReplayEntry, target_net: QNetwork, gamma: float) -> float:
    if entry.done:
        return float(entry.reward)
    q = target_net.forward(entry.next_obs)
    return float(entry.reward + gamma * q[np.asarray(entry.legal_mask_next, bool)].max())


def td_targets(batch: Batch, target_net: QNetwork, gamma: float) -> np.ndarray:
    targets = batch.rewards.astype(np.float64).copy()
    live = ~batch.dones
    if live.any():
        q = target_net.forward(batch.next_obs[live])
        targets[live] += gamma * masked_max(q, batch.next_masks[live])
    return targets


class SGD:
    def __init__(self, lr: float):
        self.lr = lr

    def update(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        for p, g in zip(params, grads):
            p -= self.lr * g


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None

    def update(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(name: str, lr: float):
    return Adam(lr) if name == "adam" else SGD(lr)


def train_step(net: QNetwork, target_net: QNetwork, batch: Batch, lr: float,
               gamma: float = 0.99, optimizer=None, delta: float = 1.0) -> tuple[QNetwork, float]:
    """One gradient step on the mean Huber TD loss.  Updates ``net`` in place."""
    if len(batch) == 0:
        raise TrainingError("empty batch")
    targets = td_targets(batch, target_net, gamma)
    loss, grads = q_loss_and_grads(net, batch.obs, batch.actions, targets, delta)
    if not np.isfinite(loss) or not all(np.isfinite(g).all() for g in grads):
        worst = float(np.abs(targets).max()) if np.isfinite(targets).all() else float("nan")
        raise TrainingError(f"non-finite loss {loss} (max |target| {worst}, "
                            f"max |param| {max(float(np.abs(p).max()) for p in net.parameters())})")
    (optimizer or SGD(lr)).update(net.parameters(), grads)
    return net, loss


def softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max()
    e = np.exp(z)
    return e / e.sum()


def policy_distribution(net: QNetwork, obs: np.ndarray, mask: np.ndarray,
                        temperature: float = 1.0) -> np.ndarray:
    """Softmax of q / temperature over legal actions; illegal actions get 0."""
    mask = np.asarray(mask, dtype=bool)
    q = net.forward(obs)
    p = np.zeros(q.shape[-1])
    p[mask] = softmax(q[mask] / temperature)
    return p


class DQNAgent:
    """Greedy (or epsilon-greedy) player backed by a Q-network."""

    def __init__(self, net: QNetwork, memory: bool, epsilon: float = 0.0, name: str = "dqn"):
        self.net = net
        self.memory = memory
        self.epsilon = epsilon
        self.name = name

    def act(self, obs, legal, rng):
        q = self.net.forward(obs.vector(self.memory))
        return act_epsilon_greedy(q, obs.legal_mask, self.epsilon, rng)


@dataclass
class EpochStats:
    epoch: int
    games: int
    updates: int
    mean_loss: float
    epsilon: float
    mean_score: float
    mean_reward: float


@dataclass
class TrainResult:
    nets: list[QNetwork] = field(default_factory=list)  # one snapshot per epoch
    stats: list[EpochStats] = field(default_factory=list)
    layout: FeatureLayout | None = None


def game_rewards(state_after) -> list[float]:
    """Per-seat reward for the step that produced ``state_after``."""
    players = state_after.config.players
    rewards = [0.0] * players
    if state_after.last_round_scores is not None:
        rewards = [float(d) for d in state_after.last_round_scores]
    if state_after.finished:
        result = finalize(state_after)
        for s in range(players):
            rewards[s] += result.dessert_points[s]
            if s in result.winners:
                rewards[s] += WIN_BONUS
    return rewards


def self_play_train(config: TrainConfig, game_config: GameConfig,
                    on_epoch: Callable[[int, QNetwork, EpochStats], None] | None = None,
                    net: QNetwork | None = None) -> TrainResult:
    """Train one shared network by self-play; snapshot it after every epoch."""
    layout = FeatureLayout.for_config(game_config, config.memory_enabled)
    players, n = game_config.players, game_config.n
    rng = np.random.default_rng([config.seed, 0])
    if net is None:
        net = QNetwork.init(layout.length, n, np.random.default_rng([config.seed, 1]), config.hidden)
    net = net.astype(config.dtype)
    if net.input_dim != layout.length or net.n_actions != n:
        raise ConfigError("network shape does not match the game's feature layout")
    target = net.copy()
    optimizer = make_optimizer(config.optimizer, config.lr)
    buffer = ReplayBuffer(config.buffer_capacity, layout.length, n)
    result = TrainResult(layout=layout)
    memory = config.memory_enabled
    updates = env_steps = 0
    game = 0

    for epoch in range(config.epochs):
        losses: list[float] = []
        scores: list[float] = []
        rewards_total: list[float] = []
        for _ in range(config.games_per_epoch):
            eps = config.epsilon(game)
            state = new_game(game_config.with_seed(game_seed(config.seed, game)))
            obs = [observe(state, s, memory) for s in range(players)]
            feats = np.stack([o.vector() for o in obs])
            masks = np.stack([o.legal_mask for o in obs])
            returns = np.zeros(players)
            while True:
                q = net.forward(feats)
                actions = [act_epsilon_greedy(q[s], masks[s], eps, rng) for s in range(players)]
                nxt = step(state, actions)
                rewards = game_rewards(nxt)
                returns += rewards
                if nxt.finished:
                    for s in range(players):
                        buffer.add(feats[s], actions[s], rewards[s], feats[s], True, masks[s])
                else:
                    obs = [observe(nxt, s, memory) for s in range(players)]
                    nfeats = np.stack([o.vector() for o in obs])
                    nmasks = np.stack([o.legal_mask for o in obs])
                    for s in range(players):
                        buffer.add(feats[s], actions[s], rewards[s], nfeats[s], False, nmasks[s])
                state = nxt
                env_steps += 1
                if len(buffer) >= max(config.warmup, config.batch_size) and env_steps % config.train_every == 0:
                    batch = buffer.sample(config.batch_size, rng)
                    _, loss = train_step(net, target, batch, config.lr, config.gamma, optimizer,
                                         config.huber_delta)
                    losses.append(loss)
                    updates += 1
                    if updates % config.target_sync == 0:
                        target = net.copy()
                if state.finished:
                    break
                feats, masks = nfeats, nmasks
            final = finalize(state)
            scores.append(float(np.mean(final.scores)))
            rewards_total.append(float(returns.mean()))
            game += 1
        stats = EpochStats(epoch, game, updates, float(np.mean(losses)) if losses else float("nan"),
                           config.epsilon(game), float(np.mean(scores)), float(np.mean(rewards_total)))
        log.info("epoch %d: games=%d updates=%d loss=%.4f eps=%.3f score=%.2f", epoch, game,
                 updates, stats.mean_loss, stats.epsilon, stats.mean_score)
        snapshot = net.astype(np.float64)
        result.nets.append(snapshot)
        result.stats.append(stats)
        if on_epoch is not None:
            on_epoch(epoch, snapshot, stats)
    return result
