import io
import json

import numpy as np
import pytest

from draftsim.agents import PriorityAgent, PriorityList, RandomAgent, placeholder_priority
from draftsim.errors import ComparisonError, FittingError, InputError, ReconstructionError
from draftsim.interpret import (
    PreferenceSample,
    RuleParams,
    borda_scores,
    collect_pairwise_dataset,
    fit_rules,
    identified_kinds,
    kendall_tau,
    majority_closure,
    preference_matrix,
    priority_from_logs,
    reconstruct_priority,
    restrict,
    write_rank_table,
    write_rules,
)
from draftsim.runner import play_game

NAMES = [f"k{i}" for i in range(8)]


def synthetic(n=400, seed=0):
    """Kind 0 is chosen exactly when feature 2 exceeds 0.5."""
    rng = np.random.default_rng(seed)
    X = rng.random((n, 4))
    return [PreferenceSample(x, 0 if x[2] > 0.5 else 1, 1 if x[2] > 0.5 else 0, 0) for x in X]


def test_separable_rule_found():
    rules = fit_rules(synthetic(), RuleParams(trees=5, max_depth=2))
    top = [r for r in rules if r.target == 0][0]
    assert top.precision == 1.0 and top.recall == 1.0
    assert top.conjuncts == ((2, ">", pytest.approx(0.5, abs=0.02)),)
    assert "THEN play 0" in top.describe()
    assert top.describe(["a", "b", "c", "d"], ["x", "y"]).startswith("IF c > 0.")


def test_impossible_precision_gives_no_rules():
    assert fit_rules(synthetic(), RuleParams(trees=3, min_precision=1.01)) == []


def test_fit_rules_errors():
    with pytest.raises(FittingError):
        fit_rules([])
    one = [PreferenceSample(np.zeros(2), 0, 1, 0)] * 5
    with pytest.raises(FittingError):
        fit_rules(one)


def test_fit_rules_deterministic():
    a = fit_rules(synthetic(), RuleParams(trees=4))
    b = fit_rules(synthetic(), RuleParams(trees=4))
    assert a == b


def test_write_rules(tmp_path):
    rules = fit_rules(synthetic(), RuleParams(trees=3, max_depth=1))
    write_rules(tmp_path / "r.txt", tmp_path / "r.json", rules, list("abcd"), ["x", "y"])
    data = json.loads((tmp_path / "r.json").read_text())
    assert len(data) == len(rules)
    assert (tmp_path / "r.txt").read_text().count("IF ") == len(rules)


# -- preference matrix and Borda -----------------------------------------------------

def matrix_from(pairs, n=3):
    return preference_matrix([PreferenceSample(np.zeros(1), a, b, 0) for a, b in pairs], n)


def test_matrix_identities():
    m = matrix_from([(0, 1), (0, 1), (1, 0), (2, 0)])
    assert np.array_equal(m.trials, m.trials.T)
    assert np.array_equal(m.wins + m.wins.T, m.trials)
    assert m.wins[0, 1] == 2 and m.wins[1, 0] == 1 and m.trials[0, 2] == 1
    assert np.all(np.diag(m.trials) == 0)


def test_borda_and_transitive_imputation():
    m = matrix_from([(0, 1), (1, 2)])  # 0 vs 2 never tested
    plain = borda_scores(m, transitive=False)
    assert plain.tolist() == [1.0, 0.5, 0.0]
    assert majority_closure(m)[0, 2]
    assert borda_scores(m).tolist() == [1.0, 0.5, 0.0]
    assert reconstruct_priority(m, ["a", "b", "c"]).ranking == ("a", "b", "c")


def test_cycle_stays_tied_and_breaks_by_trials_then_id():
    m = matrix_from([(0, 1), (1, 2), (2, 0), (2, 0)])
    # 2 beats 0 twice, so kind 0 has the most trials
    assert reconstruct_priority(m, ["a", "b", "c"]).ranking == ("a", "c", "b")
    even = matrix_from([(0, 1), (1, 2), (2, 0)])
    assert reconstruct_priority(even, ["a", "b", "c"]).ranking == ("a", "b", "c")
    assert identified_kinds(even, ["a", "b", "c"]) == ["a", "b", "c"]


def test_untested_kinds_last_and_errors():
    m = matrix_from([(2, 1)], n=4)
    assert reconstruct_priority(m, list("abcd")).ranking == ("c", "b", "a", "d")
    with pytest.raises(ReconstructionError):
        reconstruct_priority(matrix_from([], n=3), list("abc"))


def test_identified_kinds_min_trials():
    m = matrix_from([(0, 1), (1, 2), (1, 2), (0, 3)], n=4)
    # d is ordered only against a
    assert identified_kinds(m, list("abcd")) == ["a"]
    assert identified_kinds(m, list("abcd"), min_trials=2) == ["a", "b", "c"]
    assert identified_kinds(m, list("abcd"), min_trials=3) == ["b"]


def test_kendall_fixtures():
    base = PriorityList(tuple(NAMES))
    swapped = list(NAMES)
    swapped[3], swapped[4] = swapped[4], swapped[3]
    assert kendall_tau(base, base) == 1.0
    assert round(kendall_tau(base, PriorityList(tuple(swapped))), 4) == 0.9286
    assert kendall_tau(base, PriorityList(tuple(reversed(NAMES)))) == -1.0
    with pytest.raises(ComparisonError):
        kendall_tau(base, PriorityList(tuple(NAMES[:-1])))
    assert restrict(base, ["k5", "k1"]).ranking == ("k1", "k5")


def test_rank_table(tmp_path):
    write_rank_table(tmp_path / "t.csv", {"a": PriorityList(("x", "y")), "b": PriorityList(("y",))})
    assert (tmp_path / "t.csv").read_text() == "rank,a,b\n1,x,y\n2,y,\n"


def test_priority_agent_round_trip(mfm):
    truth = restrict(placeholder_priority(), mfm.names)
    agent = PriorityAgent(truth, mfm)
    data = collect_pairwise_dataset(agent, mfm, 300, seed=0)
    assert data and all(s.chosen != s.alternative for s in data)
    m = preference_matrix(data, mfm.n)
    keep = identified_kinds(m, mfm.names, min_trials=5)
    assert len(keep) >= 5
    rebuilt = reconstruct_priority(m, mfm.names)
    assert kendall_tau(restrict(rebuilt, keep), restrict(truth, keep)) == 1.0


def test_collect_rounds_filter(mfm):
    data = collect_pairwise_dataset(RandomAgent(), mfm, 20, seed=1, rounds=[1])
    assert data and {s.round for s in data} == {1}


# -- priority from logs ---------------------------------------------------------------

def toy_log(mfm, complete=True):
    lines = [{"event": "game", "game": 0, "config": mfm.to_dict()}]
    for seat, card in enumerate(["squid_nigiri", "salmon_nigiri", "egg_nigiri", "squid_nigiri"]):
        lines.append({"event": "pick", "game": 0, "round": 0, "turn": 0, "seat": seat,
                      "card": card, "hand": {}})
    if complete:
        lines.append({"event": "result", "game": 0, "scores": [3, 2, 1, 3], "winners": [0, 3]})
    return [json.dumps(x) for x in lines]


def test_priority_from_toy_log(mfm):
    res = priority_from_logs(toy_log(mfm))
    assert res.priority.ranking[:3] == ("squid_nigiri", "salmon_nigiri", "egg_nigiri")
    assert res.values["squid_nigiri"].played == 2 and res.values["squid_nigiri"].mean == 3.0
    flagged = [n for n, v in res.values.items() if v.flagged]
    assert len(flagged) == mfm.n - 3 and "tempura" in flagged
    assert set(res.priority.ranking[3:]) == set(flagged)
    assert res.games == 1 and res.unattributed == 0


def test_priority_from_logs_errors(mfm):
    with pytest.raises(InputError):
        priority_from_logs([])
    with pytest.raises(InputError):
        priority_from_logs(toy_log(mfm, complete=False))


def test_log_points_conserve_scores(mfm):
    buf = io.StringIO()
    total = 0
    rng = np.random.default_rng(0)
    for g in range(20):
        rec = play_game(mfm.with_seed(g), [RandomAgent()] * 4, rng, log=buf, game_id=g)
        total += sum(rec.result.scores)
    res = priority_from_logs(buf.getvalue().splitlines())
    assert res.games == 20
    assert sum(v.points for v in res.values.values()) + res.unattributed == total
