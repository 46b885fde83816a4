"""Player-centric observations and exact sleuthing of circulating hands.

Feature layout (all raw counts, no normalisation)::

    [own_hand n | own_board n | (P-1) x opponent_board n | round R | turn H |
     (P-1) x (known flag, hand n)]            <- memory block, optional

Opponents are listed in seat order starting from the seat after the observer.
Boards include desserts kept from earlier rounds, which stay on the table.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .config import GameConfig
from .engine import GameState
from .errors import PerturbationError, TrackingError


def held_hand(seat: int, turn: int, players: int, direction: str = "left") -> int:
    """Index of the originally dealt hand that ``seat`` holds at ``turn``."""
    return (seat + turn) % players if direction == "left" else (seat - turn) % players


def has_seen(observer: int, target: int, turn: int, players: int, direction: str = "left") -> bool:
    """Whether the hand ``target`` holds now passed through ``observer`` earlier this round."""
    if direction == "left":
        lag = (target + turn - observer) % players
    else:
        lag = (observer - target + turn) % players
    return lag <= turn


@dataclass(frozen=True)
class MemoryTracker:
    """Event-driven record of which seat has seen which circulating hand.

    Contents are tracked exactly: a hand's cards are fixed once dealt and every
    pick from it is public, so a seat that has held a hand knows it from then on.
    """

    players: int
    direction: str = "left"
    round: int = -1
    turn: int = 0
    held: tuple[int, ...] = ()
    contents: np.ndarray | None = None  # original hand index -> counts
    seen_by: np.ndarray | None = None  # seat x original hand
    log: tuple[tuple[int, int, int, int], ...] = ()  # (round, turn, seat, kind)

    def deal(self, round_index: int, hands: np.ndarray) -> "MemoryTracker":
        if round_index != self.round + 1:
            raise TrackingError(f"deal for round {round_index} after round {self.round}")
        if self.contents is not None and self.contents.any():
            raise TrackingError("new deal before the previous round's hands were played out")
        return replace(self, round=round_index, turn=0, held=tuple(range(self.players)),
                       contents=np.array(hands, dtype=np.int64, copy=True),
                       seen_by=np.eye(self.players, dtype=bool))

    def picks(self, round_index: int, turn: int, actions: Sequence[int]) -> "MemoryTracker":
        if self.contents is None or (round_index, turn) != (self.round, self.turn):
            raise TrackingError(f"picks for round {round_index} turn {turn}, "
                                f"expected round {self.round} turn {self.turn}")
        contents = self.contents.copy()
        log = list(self.log)
        for seat, kind in enumerate(actions):
            h = self.held[seat]
            if contents[h, kind] <= 0:
                raise TrackingError(f"seat {seat} revealed card {kind} not in its hand")
            contents[h, kind] -= 1
            log.append((round_index, turn, seat, int(kind)))
        shift = 1 if self.direction == "left" else -1
        held = tuple(self.held[(s + shift) % self.players] for s in range(self.players))
        seen = self.seen_by.copy()
        seen[np.arange(self.players), held] = True
        return replace(self, turn=turn + 1, held=held, contents=contents, seen_by=seen,
                       log=tuple(log))


def track(tracker: MemoryTracker, event: tuple) -> MemoryTracker:
    """Apply ``("deal", round, hands)`` or ``("picks", round, turn, actions)``."""
    kind, *args = event
    if kind == "deal":
        return tracker.deal(*args)
    if kind == "picks":
        return tracker.picks(*args)
    raise TrackingError(f"unknown event {kind!r}")


def sleuth(tracker: MemoryTracker, observer: int, target: int) -> np.ndarray | None:
    """Exact current hand of ``target`` if ``observer`` can deduce it, else None."""
    if tracker.contents is None:
        return None
    h = tracker.held[target]
    if not tracker.seen_by[observer, h]:
        return None
    return tracker.contents[h].copy()


def sleuth_state(state: GameState, observer: int, target: int) -> np.ndarray | None:
    """Closed-form sleuthing straight from the state (same answer as the tracker)."""
    cfg = state.config
    if has_seen(observer, target, state.turn, cfg.players, cfg.pass_direction):
        return state.hands[target].copy()
    return None


@dataclass(frozen=True)
class FeatureLayout:
    kinds: tuple[str, ...]
    players: int
    rounds: int
    hand_size: int
    memory: bool

    @property
    def n(self) -> int:
        return len(self.kinds)

    def blocks(self) -> list[tuple[str, int, int]]:
        n, opp = self.n, self.players - 1
        sizes = [("own_hand", n), ("own_board", n), ("opponent_boards", opp * n),
                 ("round", self.rounds), ("turn", self.hand_size)]
        if self.memory:
            sizes.append(("memory", opp * (1 + n)))
        out, start = [], 0
        for name, size in sizes:
            out.append((name, start, size))
            start += size
        return out

    @property
    def length(self) -> int:
        name, start, size = self.blocks()[-1]
        return start + size

    def slice(self, name: str) -> slice:
        for block, start, size in self.blocks():
            if block == name:
                return slice(start, start + size)
        raise KeyError(name)

    def memory_index(self, opponent: int, kind: int | None = None) -> int:
        """Vector index of an opponent's known flag (kind=None) or one of its hand counts."""
        base = self.slice("memory").start + opponent * (1 + self.n)
        return base if kind is None else base + 1 + kind

    def feature_names(self) -> list[str]:
        names = [f"own_hand[{k}]" for k in self.kinds] + [f"own_board[{k}]" for k in self.kinds]
        for o in range(1, self.players):
            names += [f"opp{o}_board[{k}]" for k in self.kinds]
        names += [f"round[{r}]" for r in range(self.rounds)]
        names += [f"turn[{t}]" for t in range(self.hand_size)]
        if self.memory:
            for o in range(1, self.players):
                names += [f"opp{o}_known"] + [f"opp{o}_hand[{k}]" for k in self.kinds]
        return names

    def to_json(self) -> dict:
        return {"kinds": list(self.kinds), "players": self.players, "rounds": self.rounds,
                "hand_size": self.hand_size, "memory": self.memory, "length": self.length,
                "blocks": [{"name": b, "start": s, "size": z} for b, s, z in self.blocks()]}

    @classmethod
    def from_json(cls, d: dict) -> "FeatureLayout":
        return cls(tuple(d["kinds"]), d["players"], d["rounds"], d["hand_size"], d["memory"])

    @classmethod
    def for_config(cls, config: GameConfig, memory: bool) -> "FeatureLayout":
        return cls(config.names, config.players, config.rounds, config.hand_size, memory)


@dataclass(frozen=True)
class Observation:
    seat: int
    own_hand: np.ndarray
    own_board: np.ndarray
    opponent_boards: np.ndarray  # (P-1) x n
    round: int
    turn: int
    rounds: int
    hand_size: int
    memory: np.ndarray  # (P-1) x (1+n): known flag then counts
    legal_mask: np.ndarray
    upstream: int  # opponent row of the seat whose hand we receive next
    menu_kinds: tuple[int, ...]
    memory_enabled: bool = False

    @property
    def legal(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.legal_mask))

    def vector(self, memory: bool | None = None) -> np.ndarray:
        memory = self.memory_enabled if memory is None else memory
        round_hot = np.zeros(self.rounds)
        round_hot[self.round] = 1.0
        turn_hot = np.zeros(self.hand_size)
        turn_hot[self.turn] = 1.0
        parts = [self.own_hand, self.own_board, self.opponent_boards.ravel(), round_hot, turn_hot]
        if memory:
            parts.append(self.memory.ravel())
        return np.concatenate(parts).astype(np.float64)


def observe(state: GameState, seat: int, memory_enabled: bool = False) -> Observation:
    cfg = state.config
    players, n = cfg.players, cfg.n
    others = [(seat + o) % players for o in range(1, players)]
    on_table = np.array([b.counts for b in state.boards]) + state.desserts
    mem = np.zeros((players - 1, 1 + n), dtype=np.int64)
    for row, target in enumerate(others):
        if has_seen(seat, target, state.turn, players, cfg.pass_direction):
            mem[row, 0] = 1
            mem[row, 1:] = state.hands[target]
    upstream = 0 if cfg.pass_direction == "left" else players - 2
    return Observation(
        seat=seat,
        own_hand=state.hands[seat].copy(),
        own_board=on_table[seat],
        opponent_boards=on_table[others],
        round=state.round,
        turn=state.turn,
        rounds=cfg.rounds,
        hand_size=cfg.hand_size,
        memory=mem,
        legal_mask=state.hands[seat] > 0,
        upstream=upstream,
        menu_kinds=cfg.in_play,
        memory_enabled=memory_enabled,
    )


def encode(state: GameState, seat: int, memory_enabled: bool = False) -> np.ndarray:
    return observe(state, seat, memory_enabled).vector()


def perturbation_options(obs: Observation) -> list[tuple[int, int]]:
    """Every (removed kind, added kind) choice, one entry per card copy in the memory hand."""
    if not obs.memory_enabled:
        raise PerturbationError("memory is disabled for this observation")
    row = obs.memory[obs.upstream]
    if not row[0] or not row[1:].any():
        raise PerturbationError("previous player's hand is unknown or empty")
    options = []
    for a in np.flatnonzero(row[1:]):
        for _ in range(int(row[1 + a])):
            options.extend((int(a), b) for b in obs.menu_kinds if b != a)
    return options


def perturb_memory(obs: Observation, rng: np.random.Generator,
                   choice: tuple[int, int] | None = None) -> Observation:
    """Swap one remembered card of the previous player's hand for another menu kind."""
    options = perturbation_options(obs)
    a, b = choice if choice is not None else options[int(rng.integers(len(options)))]
    mem = obs.memory.copy()
    mem[obs.upstream, 1 + a] -= 1
    mem[obs.upstream, 1 + b] += 1
    return replace(obs, memory=mem)
