from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import TrainingError


class ReplayEntry(NamedTuple):
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool
    legal_mask_next: np.ndarray


class Batch(NamedTuple):
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray
    next_masks: np.ndarray

    def __len__(self) -> int:
        return len(self.actions)

    @classmethod
    def from_entries(cls, entries: list[ReplayEntry]) -> "Batch":
        return cls(np.stack([e.obs for e in entries]),
                   np.array([e.action for e in entries], dtype=np.int64),
                   np.array([e.reward for e in entries], dtype=np.float64),
                   np.stack([e.next_obs for e in entries]),
                   np.array([e.done for e in entries], dtype=bool),
                   np.stack([e.legal_mask_next for e in entries]))


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int, n_actions: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.next_obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity, dtype=bool)
        self.next_masks = np.zeros((capacity, n_actions), dtype=bool)
        self.size = 0
        self._next = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, action, reward, next_obs, done, next_mask) -> None:
        i = self._next
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.dones[i] = done
        self.next_masks[i] = next_mask
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        if self.size == 0:
            raise TrainingError("cannot sample from an empty replay buffer")
        idx = rng.integers(self.size, size=batch_size)
        return Batch(self.obs[idx], self.actions[idx], self.rewards[idx], self.next_obs[idx],
                     self.dones[idx], self.next_masks[idx])
