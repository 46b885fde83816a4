import json

import numpy as np
import pytest

from draftsim.agents import (
    FixedAgent,
    PriorityAgent,
    PriorityList,
    RandomAgent,
    placeholder_priority,
    priority_act,
    random_act,
)
from draftsim.config import sweep_configs
from draftsim.engine import new_game
from draftsim.errors import ConfigError, StateError
from draftsim.observation import observe
from draftsim.runner import game_seed, play_game, read_log


def test_priority_act_takes_highest_ranked(mfm):
    plist = PriorityList(("tempura", "soy_sauce") + tuple(
        k for k in mfm.names if k not in ("tempura", "soy_sauce")))
    order = plist.order_for(mfm)
    hand = np.zeros(mfm.n, dtype=np.int64)
    hand[mfm.kind_id("tempura")] = 1
    hand[mfm.kind_id("soy_sauce")] = 1
    assert priority_act(hand, order) == mfm.kind_id("tempura")
    hand[mfm.kind_id("tempura")] = 0
    assert priority_act(hand, order) == mfm.kind_id("soy_sauce")
    with pytest.raises(StateError):
        priority_act(np.zeros(mfm.n, dtype=np.int64), order)


def test_priority_list_must_rank_everything(mfm):
    with pytest.raises(ConfigError):
        PriorityList(("tempura",)).order_for(mfm)
    with pytest.raises(ConfigError):
        PriorityList(("tempura", "tempura"))


def test_priority_list_roundtrip(tmp_path):
    p = PriorityList(("a", "b", "c"))
    p.save(tmp_path / "p.json")
    assert PriorityList.load(tmp_path / "p.json") == p
    (tmp_path / "q.json").write_text(json.dumps({"ranking": ["c", "a"]}))
    assert PriorityList.load(tmp_path / "q.json").ranking == ("c", "a")
    with pytest.raises(ConfigError):
        PriorityList.load(tmp_path / "missing.json")


def test_placeholder_covers_sweep_universe():
    plist = placeholder_priority()
    for cfg in sweep_configs().values():
        assert len(plist.order_for(cfg)) == cfg.n


def test_random_act_uniform_over_kinds():
    hand = np.array([5, 1, 0, 1])
    rng = np.random.default_rng(0)
    picks = np.bincount([random_act(hand, rng) for _ in range(3000)], minlength=4)
    assert picks[2] == 0
    assert all(abs(c / 3000 - 1 / 3) < 0.04 for c in picks[[0, 1, 3]])


def test_agents_only_play_legal(mfm):
    rng = np.random.default_rng(0)
    agents = [RandomAgent(), PriorityAgent(placeholder_priority(), mfm), FixedAgent(), RandomAgent()]
    record = play_game(mfm, agents, rng)
    assert record.final_state.finished


def test_fixed_agent_lowest_id(mfm):
    obs = observe(new_game(mfm), 0)
    assert FixedAgent().act(obs, obs.legal, None) == obs.legal[0]


def test_game_log_format(mfm, tmp_path):
    path = tmp_path / "log.jsonl"
    with open(path, "w") as fh:
        play_game(mfm, [RandomAgent()] * 4, np.random.default_rng(1), log=fh, game_id=7)
    events = list(read_log(path.read_text().splitlines()))
    assert events[0]["event"] == "game" and events[-1]["event"] == "result"
    picks = [e for e in events if e["event"] == "pick"]
    assert len(picks) == 4 * 27
    first = picks[0]
    assert first["game"] == 7 and first["card"] in first["hand"]
    assert sum(first["hand"].values()) == 9


def test_game_seed_independent():
    seeds = {game_seed(0, g) for g in range(1000)}
    assert len(seeds) == 1000 and all(0 <= s < 2**63 for s in seeds)
    assert game_seed(0, 1) != game_seed(1, 0)
