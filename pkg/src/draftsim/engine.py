"""Simultaneous pick-and-pass state machine.

A ``GameState`` is a value: ``step`` returns a new state and never mutates its
input.  Hands are frequency vectors over the config's catalog (one row per
seat).  Dealing draws from a per-round generator seeded by ``(seed, round)``,
so any state can be replayed from its config and the action history.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .config import GameConfig
from .errors import ActionError, ConfigError, StateError
from .scoring import dessert_scores, round_scores, scoring_table


@dataclass(frozen=True)
class Board:
    counts: np.ndarray
    play_order: tuple[tuple[int, int], ...] = ()  # (turn, kind id)
    wasabi_pairings: tuple[tuple[int, int], ...] = ()  # (wasabi play index, nigiri play index)
    miso_voided: frozenset[int] = frozenset()

    @classmethod
    def empty(cls, n: int) -> "Board":
        return cls(np.zeros(n, dtype=np.int64))

    @classmethod
    def from_plays(cls, n: int, catalog, plays: Sequence[int],
                   voided: Sequence[int] = ()) -> "Board":
        """Board built by playing ``plays`` in order, one per turn."""
        board = cls.empty(n)
        types = [k.rule_type for k in catalog]
        for turn, kind in enumerate(plays):
            board = board.play(turn, kind, types, turn in voided)
        return board

    def play(self, turn: int, kind: int, rule_types: Sequence[str], voided: bool = False) -> "Board":
        counts = self.counts.copy()
        counts[kind] += 1
        index = len(self.play_order)
        pairings = self.wasabi_pairings
        if rule_types[kind] == "nigiri":
            paired = {w for w, _ in pairings}
            for i, (_, k) in enumerate(self.play_order):
                if rule_types[k] == "wasabi" and i not in paired:
                    pairings = pairings + ((i, index),)
                    break
        miso = self.miso_voided | {index} if voided else self.miso_voided
        return Board(counts, self.play_order + ((turn, kind),), pairings, miso)


@dataclass(frozen=True)
class GameState:
    config: GameConfig
    hands: np.ndarray  # players x n
    boards: tuple[Board, ...]
    round: int = 0
    turn: int = 0
    scores: tuple[int, ...] = ()
    desserts: np.ndarray = field(default=None)  # dessert cards kept from finished rounds
    finished: bool = False
    last_round_scores: tuple[int, ...] | None = None  # set by the step that ends a round

    @property
    def players(self) -> int:
        return self.config.players

    @property
    def hand_size(self) -> int:
        return int(self.hands[0].sum())

    @property
    def rng_state(self) -> tuple[int, int]:
        return self.config.seed, self.round

    def dessert_counts(self) -> np.ndarray:
        """Dessert cards held per seat, including any played this round."""
        ids = list(self.config.dessert_ids)
        held = self.desserts[:, ids].sum(axis=1)
        if not self.finished:
            held = held + np.array([b.counts[ids].sum() for b in self.boards], dtype=np.int64)
        return held


class FinalResult(NamedTuple):
    scores: tuple[int, ...]
    winners: tuple[int, ...]
    dessert_points: tuple[int, ...]


def _deal(config: GameConfig, round_index: int, desserts: np.ndarray) -> np.ndarray:
    copies = np.array(config.deck.copies, dtype=np.int64)
    injected = sum(config.deck.dessert_schedule[: round_index + 1])
    for k in config.dessert_ids:
        # each round adds scheduled desserts; ones already kept by players are gone
        copies[k] = max(0, min(copies[k], injected) - int(desserts[:, k].sum()))
    needed = config.players * config.hand_size
    if copies.sum() < needed:
        raise ConfigError(f"round {round_index}: deck holds {copies.sum()} cards, {needed} needed")
    deck = np.repeat(np.arange(config.n), copies)
    rng = np.random.default_rng([config.seed, round_index])
    dealt = rng.permutation(deck)[:needed].reshape(config.players, config.hand_size)
    hands = np.zeros((config.players, config.n), dtype=np.int64)
    for s in range(config.players):
        hands[s] = np.bincount(dealt[s], minlength=config.n)
    return hands


def new_game(config: GameConfig) -> GameState:
    desserts = np.zeros((config.players, config.n), dtype=np.int64)
    return GameState(
        config=config,
        hands=_deal(config, 0, desserts),
        boards=tuple(Board.empty(config.n) for _ in range(config.players)),
        scores=(0,) * config.players,
        desserts=desserts,
    )


def legal_actions(state: GameState, seat: int) -> tuple[int, ...]:
    if state.finished:
        raise StateError("game is finished")
    hand = state.hands[seat]
    if not hand.any():
        raise StateError(f"seat {seat} has an empty hand")
    return tuple(int(k) for k in np.flatnonzero(hand))


def score_round(state: GameState) -> tuple[int, ...]:
    """Per-seat points for the round just completed (hands must be empty)."""
    if state.hands.any():
        raise StateError("round still in progress")
    return tuple(round_scores(state.boards, state.config.catalog))


def step(state: GameState, actions: Sequence[int]) -> GameState:
    """Everyone plays one card at once, then hands pass one seat along."""
    config = state.config
    if state.finished:
        raise StateError("game is finished")
    if len(actions) != config.players:
        raise ActionError(-1, f"expected {config.players} actions, got {len(actions)}")
    actions = [int(a) for a in actions]
    for seat, a in enumerate(actions):
        if not 0 <= a < config.n or state.hands[seat, a] <= 0:
            raise ActionError(seat, f"card {a} not in hand")

    table = scoring_table(config.catalog)
    rule_types = [p["type"] for p in table.params]
    miso_plays = [s for s, a in enumerate(actions) if rule_types[a] == "miso"]
    collided = set(miso_plays) if len(miso_plays) > 1 else set()
    boards = tuple(b.play(state.turn, a, rule_types, s in collided)
                   for s, (b, a) in enumerate(zip(state.boards, actions)))

    hands = state.hands.copy()
    hands[np.arange(config.players), actions] -= 1
    # left: seat i receives seat i+1's hand
    hands = np.roll(hands, -1 if config.pass_direction == "left" else 1, axis=0)
    after = replace(state, hands=hands, boards=boards, turn=state.turn + 1, last_round_scores=None)
    if hands.any():
        return after

    deltas = score_round(after)
    scores = tuple(s + d for s, d in zip(state.scores, deltas))
    desserts = state.desserts.copy()
    for k in config.dessert_ids:
        desserts[:, k] += [b.counts[k] for b in boards]
    if state.round + 1 >= config.rounds:
        return replace(after, scores=scores, desserts=desserts, finished=True,
                       last_round_scores=deltas)
    return GameState(
        config=config,
        hands=_deal(config, state.round + 1, desserts),
        boards=tuple(Board.empty(config.n) for _ in range(config.players)),
        round=state.round + 1,
        turn=0,
        scores=scores,
        desserts=desserts,
        last_round_scores=deltas,
    )


def finalize(state: GameState) -> FinalResult:
    """Final scores with desserts; ties on points go to the most desserts, then share."""
    if not state.finished:
        raise StateError("game not finished")
    bonus = dessert_scores(state.desserts, state.config.catalog)
    final = tuple(s + b for s, b in zip(state.scores, bonus))
    best = max(final)
    leaders = [s for s, v in enumerate(final) if v == best]
    if len(leaders) > 1:
        held = state.dessert_counts()
        most = max(held[s] for s in leaders)
        leaders = [s for s in leaders if held[s] == most]
    return FinalResult(final, tuple(leaders), tuple(bonus))
