"""Agent interface and the baseline agents (random, priority-list follower)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .config import GameConfig
from .errors import ConfigError, StateError
from .observation import Observation


class Agent(Protocol):
    name: str
    memory: bool  # whether the agent reads the sleuthed-memory block

    def act(self, obs: Observation, legal: Sequence[int], rng: np.random.Generator) -> int: ...


@dataclass(frozen=True)
class PriorityList:
    ranking: tuple[str, ...]  # best first

    def __post_init__(self):
        if len(set(self.ranking)) != len(self.ranking):
            raise ConfigError("priority list has duplicate cards")

    def order_for(self, config: GameConfig) -> tuple[int, ...]:
        """Catalog ids in priority order; every catalog kind must be ranked."""
        missing = [k for k in config.names if k not in self.ranking]
        if missing:
            raise ConfigError(f"priority list does not rank {missing}")
        return tuple(config.kind_id(name) for name in self.ranking if name in config.names)

    def to_json(self) -> list[str]:
        return list(self.ranking)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "PriorityList":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"priority list file not found: {path}")
        data = json.loads(path.read_text())
        if isinstance(data, dict):
            data = data["ranking"]
        return cls(tuple(data))


def placeholder_priority() -> PriorityList:
    """Stand-in for the average-human list, derived from simulated games.

    NOT human data; regenerate with ``scripts/make_placeholder_priority.py``.
    """
    data = json.loads(resources.files("draftsim.data").joinpath("priority_placeholder.json").read_text())
    return PriorityList(tuple(data["ranking"]))


def priority_act(hand: np.ndarray, order: Sequence[int]) -> int:
    """Highest-ranked kind present in ``hand``."""
    for kind in order:
        if hand[kind] > 0:
            return int(kind)
    raise StateError("empty hand")


def random_act(hand: np.ndarray, rng: np.random.Generator) -> int:
    """Uniform over the kinds present (not over card copies)."""
    present = np.flatnonzero(hand)
    if present.size == 0:
        raise StateError("empty hand")
    return int(present[rng.integers(present.size)])


class RandomAgent:
    name = "random"
    memory = False

    def act(self, obs, legal, rng):
        return random_act(obs.own_hand, rng)


class PriorityAgent:
    memory = False

    def __init__(self, priority: PriorityList, config: GameConfig, name: str = "priority"):
        self.priority = priority
        self.order = priority.order_for(config)
        self.name = name

    def act(self, obs, legal, rng):
        return priority_act(obs.own_hand, self.order)


class FixedAgent:
    """Always plays the lowest-id legal kind; handy for forced test scenarios."""

    name = "fixed"
    memory = False

    def act(self, obs, legal, rng):
        return int(legal[0])
