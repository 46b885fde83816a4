"""Play full games between agents and emit JSON-lines game logs.

Log format, one JSON object per line::

    {"event": "game",   "game": g, "config": {...GameConfig.to_dict()...}}
    {"event": "pick",   "game": g, "round": r, "turn": t, "seat": s,
     "card": "tempura", "hand": {"tempura": 2, ...}}      # hand before the pick
    {"event": "result", "game": g, "scores": [...], "winners": [...]}
"""

from __future__ import annotations

import json
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence, TextIO

import numpy as np

from .config import GameConfig
from .engine import FinalResult, GameState, finalize, new_game, step
from .observation import Observation, observe

DecisionHook = Callable[[GameState, int, Observation, int], None]


class GameRecord(NamedTuple):
    result: FinalResult
    final_state: GameState


def game_seed(seed: int, game: int) -> int:
    """Independent 63-bit seed for game ``game`` of a run seeded with ``seed``."""
    return int(np.random.SeedSequence([seed, game]).generate_state(1, np.uint64)[0] >> 1)


def hand_dict(hand: np.ndarray, names: Sequence[str]) -> dict[str, int]:
    return {names[k]: int(hand[k]) for k in np.flatnonzero(hand)}


def play_game(config: GameConfig, agents: Sequence, rng: np.random.Generator,
              log: TextIO | None = None, game_id: int = 0,
              on_decision: DecisionHook | None = None) -> GameRecord:
    """Play one game; ``agents[s]`` controls seat ``s``."""
    state = new_game(config)
    names = config.names
    if log is not None:
        log.write(json.dumps({"event": "game", "game": game_id, "config": config.to_dict()}) + "\n")
    while not state.finished:
        actions = []
        for seat, agent in enumerate(agents):
            obs = observe(state, seat, agent.memory)
            action = agent.act(obs, obs.legal, rng)
            if on_decision is not None:
                on_decision(state, seat, obs, action)
            if log is not None:
                log.write(json.dumps({"event": "pick", "game": game_id, "round": state.round,
                                      "turn": state.turn, "seat": seat, "card": names[action],
                                      "hand": hand_dict(state.hands[seat], names)}) + "\n")
            actions.append(action)
        state = step(state, actions)
    result = finalize(state)
    if log is not None:
        log.write(json.dumps({"event": "result", "game": game_id, "scores": list(result.scores),
                              "winners": list(result.winners)}) + "\n")
    return GameRecord(result, state)


def read_log(lines: Iterable[str]) -> Iterator[dict]:
    for line in lines:
        line = line.strip()
        if line:
            yield json.loads(line)
