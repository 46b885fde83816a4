"""Pairwise-preference datasets, tree-ensemble decision rules and priority lists.

Two-card hands are the natural probe: with exactly two distinct kinds left, the
pick is a direct preference of one card over the other.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from sklearn.tree import DecisionTreeClassifier

from .agents import PriorityList
from .config import GameConfig
from .engine import Board
from .errors import ComparisonError, FittingError, InputError, ReconstructionError
from .runner import game_seed, play_game, read_log
from .scoring import attribute_desserts, attribute_round, scoring_table


class PreferenceSample(NamedTuple):
    features: np.ndarray
    chosen: int
    alternative: int
    round: int


def collect_pairwise_dataset(agent, game_config: GameConfig, n_games: int, seed: int,
                             rounds: Sequence[int] | None = None) -> list[PreferenceSample]:
    """Two-distinct-card decisions from games with ``agent`` in every seat.

    ``rounds`` restricts sampling, e.g. ``[1]`` for the second-to-last of three rounds.
    """
    samples: list[PreferenceSample] = []

    def record(state, seat, obs, action):
        hand = obs.own_hand
        if hand.sum() != 2 or np.count_nonzero(hand) != 2:
            return
        if rounds is not None and state.round not in rounds:
            return
        a, b = (int(k) for k in np.flatnonzero(hand))
        samples.append(PreferenceSample(obs.vector(agent.memory), action,
                                        b if action == a else a, state.round))

    for g in range(n_games):
        play_game(game_config.with_seed(game_seed(seed, g)), [agent] * game_config.players,
                  np.random.default_rng([seed, g, 5]), on_decision=record)
    return samples


# -- decision rules -----------------------------------------------------------------

@dataclass(frozen=True)
class RuleParams:
    trees: int = 30
    max_depth: int = 3
    bootstrap: float = 0.7  # fraction drawn without replacement; the rest is out-of-bag
    min_precision: float = 0.5
    min_recall: float = 0.01
    max_rules_per_kind: int = 5
    seed: int = 0


@dataclass(frozen=True)
class Rule:
    conjuncts: tuple[tuple[int, str, float], ...]  # (feature, "<=" or ">", threshold)
    target: int
    precision: float
    recall: float
    support: int

    @property
    def features(self) -> frozenset[int]:
        return frozenset(f for f, _, _ in self.conjuncts)

    def matches(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        hit = np.ones(len(X), dtype=bool)
        for f, op, t in self.conjuncts:
            hit &= (X[:, f] <= t) if op == "<=" else (X[:, f] > t)
        return hit

    def describe(self, feature_names: Sequence[str] | None = None,
                 kind_names: Sequence[str] | None = None) -> str:
        def fname(f):
            return feature_names[f] if feature_names else f"x[{f}]"
        cond = " AND ".join(f"{fname(f)} {op} {t:.4g}" for f, op, t in self.conjuncts) or "TRUE"
        target = kind_names[self.target] if kind_names else str(self.target)
        return (f"IF {cond} THEN play {target} "
                f"[precision {self.precision:.2f}, recall {self.recall:.2f}]")

    def to_json(self, feature_names=None, kind_names=None) -> dict:
        return {
            "target": kind_names[self.target] if kind_names else self.target,
            "conjuncts": [{"feature": feature_names[f] if feature_names else f, "index": f,
                           "op": op, "threshold": t} for f, op, t in self.conjuncts],
            "precision": self.precision, "recall": self.recall, "support": self.support,
        }


def _leaf_paths(tree) -> list[tuple[tuple[int, str, float], ...]]:
    """Conjunct lists of every leaf whose majority class is positive."""
    t = tree.tree_
    out = []
    stack = [(0, ())]
    while stack:
        node, path = stack.pop()
        left, right = t.children_left[node], t.children_right[node]
        if left == right:
            counts = t.value[node][0]
            if len(counts) > 1 and counts[1] > counts[0]:
                out.append(path)
            continue
        f, thr = int(t.feature[node]), float(t.threshold[node])
        stack.append((right, path + ((f, ">", thr),)))
        stack.append((left, path + ((f, "<=", thr),)))
    return out


def _simplify(conjuncts) -> tuple[tuple[int, str, float], ...]:
    """Keep only the tightest bound per (feature, direction)."""
    tight: dict[tuple[int, str], float] = {}
    for f, op, t in conjuncts:
        key = (f, op)
        if key not in tight:
            tight[key] = t
        else:
            tight[key] = min(tight[key], t) if op == "<=" else max(tight[key], t)
    return tuple(sorted((f, op, t) for (f, op), t in tight.items()))


def fit_rules(dataset: Sequence[PreferenceSample], params: RuleParams = RuleParams()) -> list[Rule]:
    """Per chosen kind, bag one-vs-rest trees and keep precise, distinct leaf rules.

    Precision and recall are measured on each tree's out-of-bag samples.
    """
    if not dataset:
        raise FittingError("empty dataset")
    X = np.stack([s.features for s in dataset])
    chosen = np.array([s.chosen for s in dataset])
    kinds = sorted(set(chosen.tolist()))
    if len(kinds) < 2:
        raise FittingError("need at least two distinct chosen kinds")
    n = len(X)
    n_bag = max(1, min(n - 1, int(round(params.bootstrap * n))))
    rules: list[Rule] = []
    for kind in kinds:
        y = (chosen == kind).astype(int)
        rng = np.random.default_rng([params.seed, kind])
        candidates: list[Rule] = []
        for t in range(params.trees):
            bag = rng.choice(n, size=n_bag, replace=False)
            oob = np.setdiff1d(np.arange(n), bag)
            if len(set(y[bag].tolist())) < 2 or oob.size == 0:
                continue
            tree = DecisionTreeClassifier(max_depth=params.max_depth,
                                          random_state=int(rng.integers(2**31)))
            tree.fit(X[bag], y[bag])
            for path in _leaf_paths(tree):
                conj = _simplify(path)
                probe = Rule(conj, kind, 0.0, 0.0, 0)
                hit = probe.matches(X[oob])
                positives = int(y[oob].sum())
                if not hit.any() or positives == 0:
                    continue
                tp = int((hit & (y[oob] == 1)).sum())
                candidates.append(Rule(conj, kind, tp / int(hit.sum()), tp / positives,
                                       int(hit.sum())))
        kept = [r for r in candidates
                if r.precision >= params.min_precision and r.recall >= params.min_recall]
        best: dict[frozenset, Rule] = {}
        for r in kept:
            cur = best.get(r.features)
            if cur is None or (r.precision, r.recall) > (cur.precision, cur.recall):
                best[r.features] = r
        ranked = sorted(best.values(), key=lambda r: (-r.precision, -r.recall, r.conjuncts))
        rules.extend(ranked[: params.max_rules_per_kind])
    return rules


# -- preferences and priority lists ---------------------------------------------------

@dataclass
class PreferenceMatrix:
    wins: np.ndarray  # wins[a, b]: times a was chosen over b
    trials: np.ndarray  # symmetric

    @property
    def n(self) -> int:
        return len(self.wins)


def preference_matrix(dataset: Iterable[PreferenceSample], n: int) -> PreferenceMatrix:
    wins = np.zeros((n, n), dtype=np.int64)
    for s in dataset:
        wins[s.chosen, s.alternative] += 1
    return PreferenceMatrix(wins, wins + wins.T)


def majority_closure(matrix: PreferenceMatrix) -> np.ndarray:
    """reach[a, b]: a chain of strict pairwise majorities leads from a to b."""
    reach = matrix.wins > matrix.wins.T
    for k in range(matrix.n):
        reach = reach | (reach[:, k:k + 1] & reach[k:k + 1, :])
    return reach


def borda_scores(matrix: PreferenceMatrix, transitive: bool = True) -> np.ndarray:
    """Mean win fraction over compared opponents; NaN for kinds never tested.

    With ``transitive``, an untested pair counts as a full win for a when strict
    majorities chain from a to b but not back.  Two-card hands rarely pit the top
    kinds against each other, so without this the scores of an exact priority
    agent can tie or invert.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = matrix.wins / matrix.trials
    compared = matrix.trials > 0
    if transitive:
        reach = majority_closure(matrix)
        implied = ~compared & reach & ~reach.T
        frac = np.where(implied, 1.0, frac)
        frac = np.where(implied.T, 0.0, frac)
        compared = compared | implied | implied.T
    tested = matrix.trials.sum(axis=1) > 0
    scores = np.full(matrix.n, np.nan)
    for k in np.flatnonzero(tested):
        scores[k] = frac[k, compared[k]].mean()
    return scores


def reconstruct_priority(matrix: PreferenceMatrix, names: Sequence[str],
                         transitive: bool = True) -> PriorityList:
    """Borda ranking; ties go to the kind with more trials, then the lower id.

    Kinds that never appeared in a two-card choice are appended last, by id.
    """
    if not matrix.trials.any():
        raise ReconstructionError("no pairwise preferences recorded")
    scores = borda_scores(matrix, transitive)
    totals = matrix.trials.sum(axis=1)
    tested = [k for k in range(matrix.n) if not np.isnan(scores[k])]
    untested = [k for k in range(matrix.n) if np.isnan(scores[k])]
    tested.sort(key=lambda k: (-scores[k], -totals[k], k))
    return PriorityList(tuple(names[k] for k in tested + untested))


def tested_kinds(matrix: PreferenceMatrix, names: Sequence[str]) -> list[str]:
    return [names[k] for k in range(matrix.n) if matrix.trials[k].any()]


def identified_kinds(matrix: PreferenceMatrix, names: Sequence[str],
                     min_trials: int = 1) -> list[str]:
    """Kinds with ``min_trials`` two-card appearances whose order against every
    other such kind follows from the data (directly or by a majority chain)."""
    totals = matrix.trials.sum(axis=1)
    kept = totals >= max(1, min_trials)
    sub = PreferenceMatrix(matrix.wins * np.outer(kept, kept), matrix.trials * np.outer(kept, kept))
    reach = majority_closure(sub)
    tested = np.flatnonzero(kept)
    return [names[k] for k in tested
            if all(reach[k, j] or reach[j, k] for j in tested if j != k)]


def kendall_tau(a: PriorityList, b: PriorityList) -> float:
    if sorted(a.ranking) != sorted(b.ranking):
        raise ComparisonError("priority lists rank different cards")
    n = len(a.ranking)
    if n < 2:
        return 1.0
    pos = {name: i for i, name in enumerate(b.ranking)}
    discordant = sum(1 for x, y in combinations(a.ranking, 2) if pos[x] > pos[y])
    return 1.0 - 2.0 * discordant / (n * (n - 1) / 2)


def restrict(plist: PriorityList, keep: Iterable[str]) -> PriorityList:
    keep = set(keep)
    return PriorityList(tuple(k for k in plist.ranking if k in keep))


def write_rank_table(path, lists: dict[str, PriorityList]) -> None:
    """CSV with one row per rank and one column per priority list."""
    width = max(len(p.ranking) for p in lists.values())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", *lists])
        for i in range(width):
            w.writerow([i + 1, *(p.ranking[i] if i < len(p.ranking) else "" for p in lists.values())])


def write_rules(path_txt, path_json, rules: Sequence[Rule], feature_names, kind_names) -> None:
    with open(path_txt, "w") as fh:
        for r in rules:
            fh.write(r.describe(feature_names, kind_names) + "\n")
    with open(path_json, "w") as fh:
        json.dump([r.to_json(feature_names, kind_names) for r in rules], fh, indent=1)
        fh.write("\n")


# -- priority lists from game logs ------------------------------------------------

@dataclass
class CardValue:
    name: str
    played: int
    points: Fraction
    mean: float
    flagged: bool = False  # never played


@dataclass
class LogPriority:
    priority: PriorityList
    values: dict[str, CardValue] = field(default_factory=dict)
    unattributed: Fraction = Fraction(0)
    games: int = 0


def _game_points(config: GameConfig, picks: list[dict]) -> tuple[dict[int, list[Fraction]], Fraction]:
    """Attributed points per kind id for one logged game."""
    table = scoring_table(config.catalog)
    rule_types = [p["type"] for p in table.params]
    players = config.players
    by_round: dict[int, list[dict]] = defaultdict(list)
    for p in picks:
        by_round[p["round"]].append(p)
    credit: dict[int, list[Fraction]] = defaultdict(list)
    lost = Fraction(0)
    dessert_plays: list[list[int]] = [[] for _ in range(players)]
    for r in sorted(by_round):
        boards = [Board.empty(config.n) for _ in range(players)]
        turns: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for p in by_round[r]:
            turns[p["turn"]].append((p["seat"], config.kind_id(p["card"])))
        for t in sorted(turns):
            plays = sorted(turns[t])
            misos = [s for s, k in plays if rule_types[k] == "miso"]
            for s, k in plays:
                boards[s] = boards[s].play(t, k, rule_types, len(misos) > 1 and s in misos)
                if config.catalog[k].category == "dessert":
                    dessert_plays[s].append(k)
        per_play, unattributed = attribute_round(boards, config.catalog)
        lost += sum(unattributed)
        for s, board in enumerate(boards):
            for (_, k), pts in zip(board.play_order, per_play[s]):
                if config.catalog[k].category != "dessert":
                    credit[k].append(pts)
    per_play, unattributed = attribute_desserts(dessert_plays, config.catalog)
    lost += sum(unattributed)
    for s, plays in enumerate(dessert_plays):
        for k, pts in zip(plays, per_play[s]):
            credit[k].append(pts)
    return credit, lost


def priority_from_logs(lines: Iterable[str]) -> LogPriority:
    """Rank card kinds by mean attributed points per copy played."""
    games: dict[int, dict] = {}
    order: list[int] = []
    for event in read_log(lines):
        g = event.get("game")
        if event.get("event") == "game":
            games[g] = {"config": GameConfig.from_dict(event["config"]), "picks": [], "done": False}
            order.append(g)
        elif event.get("event") == "pick" and g in games:
            games[g]["picks"].append(event)
        elif event.get("event") == "result" and g in games:
            games[g]["done"] = True
    complete = [g for g in order if games[g]["done"]]
    if not complete:
        raise InputError("logs contain no completed games")

    names: list[str] = []
    totals: dict[str, Fraction] = defaultdict(Fraction)
    played: dict[str, int] = defaultdict(int)
    lost = Fraction(0)
    for g in complete:
        config = games[g]["config"]
        for name in config.names:
            if name not in names:
                names.append(name)
        credit, unattributed = _game_points(config, games[g]["picks"])
        lost += unattributed
        for k, pts in credit.items():
            totals[config.names[k]] += sum(pts)
            played[config.names[k]] += len(pts)
    values = {}
    for name in names:
        count = played[name]
        values[name] = CardValue(name, count, totals[name],
                                 float(totals[name] / count) if count else 0.0, flagged=count == 0)
    ranked = sorted((v for v in values.values() if not v.flagged),
                    key=lambda v: (-v.mean, names.index(v.name)))
    ranked += [values[n] for n in names if values[n].flagged]
    return LogPriority(PriorityList(tuple(v.name for v in ranked)), values, lost, len(complete))
