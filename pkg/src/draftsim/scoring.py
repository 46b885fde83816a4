"""Board scoring and per-card point attribution.

Two independent routes over the same rules: ``round_scores`` computes integer
totals per seat; ``attribute_round`` splits each seat's points across the
individual plays that earned them (used to build priority lists from logs).
Their sums agree except for points no card can carry (e.g. a Temaki penalty
for a player holding zero Temaki), which attribution reports separately.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Protocol, Sequence

import numpy as np

from .config import CATEGORIES, CardKind


class BoardLike(Protocol):
    counts: np.ndarray
    play_order: tuple[tuple[int, int], ...]
    wasabi_pairings: tuple[tuple[int, int], ...]
    miso_voided: frozenset[int]


class ScoringTable(NamedTuple):
    by_type: dict[str, tuple[int, ...]]
    params: tuple[dict, ...]
    category_index: np.ndarray  # kind id -> index into CATEGORIES
    icons: np.ndarray


@lru_cache(maxsize=64)
def scoring_table(catalog: tuple[CardKind, ...]) -> ScoringTable:
    by_type: dict[str, list[int]] = {}
    for k in catalog:
        by_type.setdefault(k.rule_type, []).append(k.id)
    return ScoringTable(
        {t: tuple(ids) for t, ids in by_type.items()},
        tuple(k.params for k in catalog),
        np.array([CATEGORIES.index(k.category) for k in catalog], dtype=np.int64),
        np.array([k.icons for k in catalog], dtype=np.int64),
    )


def _split(points: int, k: int) -> int:
    # tied players share an award, rounding toward zero
    return int(points / k)


def _majority_awards(values: Sequence[int], first: int, second: int | None, tie: str) -> list[int]:
    """Most/second-most awards among players with a positive value (Maki style)."""
    awards = [0] * len(values)
    positive = sorted({v for v in values if v > 0}, reverse=True)
    if not positive:
        return awards
    top = [i for i, v in enumerate(values) if v == positive[0]]
    for i in top:
        awards[i] = _split(first, len(top)) if tie == "split" else first
    if len(top) == 1 and second and len(positive) > 1:
        runners = [i for i, v in enumerate(values) if v == positive[1]]
        for i in runners:
            awards[i] = _split(second, len(runners)) if tie == "split" else second
    return awards


def _most_fewest(values: Sequence[int], most: int, fewest: int, tie: str) -> list[int]:
    """Most/fewest awards over all players (Temaki, Pudding); none if everyone ties."""
    awards = [0] * len(values)
    hi, lo = max(values), min(values)
    if hi == lo:
        return awards
    top = [i for i, v in enumerate(values) if v == hi]
    for i in top:
        awards[i] += _split(most, len(top)) if tie == "split" else most
    if len(values) > 2:
        bottom = [i for i, v in enumerate(values) if v == lo]
        for i in bottom:
            awards[i] += _split(fewest, len(bottom)) if tie == "split" else fewest
    return awards


def _first_params(table: ScoringTable, rule_type: str) -> dict:
    return table.params[table.by_type[rule_type][0]]


def _board_arrays(boards: Sequence[BoardLike], n: int) -> np.ndarray:
    return np.array([b.counts for b in boards], dtype=np.int64).reshape(len(boards), n)


def _category_counts(counts: np.ndarray, table: ScoringTable) -> np.ndarray:
    out = np.zeros((counts.shape[0], len(CATEGORIES)), dtype=np.int64)
    for c in range(len(CATEGORIES)):
        out[:, c] = counts[:, table.category_index == c].sum(axis=1)
    return out


def round_scores(boards: Sequence[BoardLike], catalog: tuple[CardKind, ...]) -> list[int]:
    """Points each seat earns from its board at the end of a round (desserts excluded)."""
    table = scoring_table(catalog)
    counts = _board_arrays(boards, len(catalog))
    players = len(boards)
    scores = [0] * players
    kinds = table.by_type
    params = table.params

    for k in kinds.get("nigiri", ()):
        for s in range(players):
            scores[s] += params[k]["points"] * int(counts[s, k])
    if "wasabi" in kinds:
        for s, board in enumerate(boards):
            for w, nig in board.wasabi_pairings:
                mult = params[board.play_order[w][1]]["multiplier"]
                scores[s] += (mult - 1) * params[board.play_order[nig][1]]["points"]
    for k in kinds.get("set", ()):
        size, pts = params[k]["size"], params[k]["points"]
        for s in range(players):
            scores[s] += pts * (int(counts[s, k]) // size)
    for k in kinds.get("miso", ()):
        for s, board in enumerate(boards):
            live = sum(1 for i, (_, kind) in enumerate(board.play_order)
                       if kind == k and i not in board.miso_voided)
            scores[s] += params[k]["points"] * live
    for k in kinds.get("count", ()):
        t = params[k]["table"]
        for s in range(players):
            scores[s] += t[min(int(counts[s, k]), len(t) - 1)]
    if "maki" in kinds:
        p = _first_params(table, "maki")
        icons = (counts * table.icons).sum(axis=1).tolist()
        for s, a in enumerate(_majority_awards(icons, p["first"], p["second"], p.get("tie", "split"))):
            scores[s] += a
    if "temaki" in kinds:
        p = _first_params(table, "temaki")
        held = counts[:, list(kinds["temaki"])].sum(axis=1).tolist()
        for s, a in enumerate(_most_fewest(held, p["most"], p["fewest"], p.get("tie", "full"))):
            scores[s] += a
    if "tea" in kinds or "soy" in kinds:
        cats = _category_counts(counts, table)
        for k in kinds.get("tea", ()):
            largest = cats.max(axis=1)
            for s in range(players):
                scores[s] += params[k]["per_card"] * int(largest[s]) * int(counts[s, k])
        distinct = (cats > 0).sum(axis=1)
        best = int(distinct.max())
        for k in kinds.get("soy", ()):
            for s in range(players):
                if distinct[s] == best:
                    scores[s] += params[k]["points"] * int(counts[s, k])
    return scores


def score_board(seat: int, boards: Sequence[BoardLike], catalog: tuple[CardKind, ...]) -> int:
    """Round points for one seat; needs every board for the cross-player cards."""
    return round_scores(boards, catalog)[seat]


def dessert_scores(desserts: np.ndarray, catalog: tuple[CardKind, ...]) -> list[int]:
    """End-of-game dessert points from per-seat dessert counts (players x n)."""
    table = scoring_table(catalog)
    desserts = np.asarray(desserts, dtype=np.int64)
    players = desserts.shape[0]
    scores = [0] * players
    for k in table.by_type.get("dessert_set", ()):
        p = table.params[k]
        for s in range(players):
            scores[s] += p["points"] * (int(desserts[s, k]) // p["size"])
    if "dessert_majority" in table.by_type:
        ids = list(table.by_type["dessert_majority"])
        p = table.params[ids[0]]
        held = desserts[:, ids].sum(axis=1).tolist()
        for s, a in enumerate(_most_fewest(held, p["most"], p["fewest"], p.get("tie", "split"))):
            scores[s] += a
    return scores


def attribute_round(boards: Sequence[BoardLike], catalog: tuple[CardKind, ...]
                    ) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Split each seat's round points over its plays.

    Returns ``(per_play, unattributed)`` where ``per_play[s][i]`` is the credit
    for play ``i`` of seat ``s``.  Set cards share their set's value equally,
    Maki awards split by icon count, a Wasabi-boosted nigiri gives the Wasabi
    one share of the boosted value (1:2 for a x3 Wasabi).
    """
    table = scoring_table(catalog)
    params = table.params
    counts = _board_arrays(boards, len(catalog))
    players = len(boards)
    per_play = [[Fraction(0)] * len(b.play_order) for b in boards]
    unattributed = [Fraction(0)] * players

    def share(s: int, plays: list[int], total: int | Fraction) -> None:
        if not plays:
            unattributed[s] += total
            return
        for i in plays:
            per_play[s][i] += Fraction(total) / len(plays)

    maki_award = temaki_award = None
    if "maki" in table.by_type:
        p = _first_params(table, "maki")
        icons = (counts * table.icons).sum(axis=1).tolist()
        maki_award = _majority_awards(icons, p["first"], p["second"], p.get("tie", "split"))
    if "temaki" in table.by_type:
        p = _first_params(table, "temaki")
        held = counts[:, list(table.by_type["temaki"])].sum(axis=1).tolist()
        temaki_award = _most_fewest(held, p["most"], p["fewest"], p.get("tie", "full"))
    cats = _category_counts(counts, table)
    distinct = (cats > 0).sum(axis=1)

    for s, board in enumerate(boards):
        plays_of: dict[int, list[int]] = {}
        for i, (_, k) in enumerate(board.play_order):
            plays_of.setdefault(k, []).append(i)
        boosted = {nig: w for w, nig in board.wasabi_pairings}
        maki_plays: list[int] = []
        temaki_plays: list[int] = []
        for i, (_, k) in enumerate(board.play_order):
            rule = params[k]["type"]
            if rule == "nigiri":
                value = params[k]["points"]
                if i in boosted:
                    w = boosted[i]
                    mult = params[board.play_order[w][1]]["multiplier"]
                    total = value * mult
                    per_play[s][i] += Fraction(total * (mult - 1), mult)
                    per_play[s][w] += Fraction(total, mult)
                else:
                    per_play[s][i] += value
            elif rule == "miso":
                if i not in board.miso_voided:
                    per_play[s][i] += params[k]["points"]
            elif rule == "tea":
                per_play[s][i] += params[k]["per_card"] * int(cats[s].max())
            elif rule == "soy":
                if distinct[s] == distinct.max():
                    per_play[s][i] += params[k]["points"]
            elif rule == "maki":
                maki_plays.append(i)
            elif rule == "temaki":
                temaki_plays.append(i)
        for k, plays in plays_of.items():
            rule = params[k]["type"]
            if rule == "set":
                size = params[k]["size"]
                complete = (len(plays) // size) * size
                for i in plays[:complete]:
                    per_play[s][i] += Fraction(params[k]["points"], size)
            elif rule == "count":
                t = params[k]["table"]
                share(s, plays, t[min(len(plays), len(t) - 1)])
        if maki_award is not None and maki_award[s]:
            weights = [table.icons[board.play_order[i][1]] for i in maki_plays]
            if sum(weights) == 0:
                unattributed[s] += maki_award[s]
            else:
                for i, wgt in zip(maki_plays, weights):
                    per_play[s][i] += Fraction(maki_award[s] * int(wgt), int(sum(weights)))
        if temaki_award is not None and temaki_award[s]:
            share(s, temaki_plays, temaki_award[s])
    return per_play, unattributed


def attribute_desserts(dessert_plays: Sequence[Sequence[int]], catalog: tuple[CardKind, ...]
                       ) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Split end-of-game dessert points over each seat's dessert plays (in play order)."""
    table = scoring_table(catalog)
    players = len(dessert_plays)
    held = np.zeros((players, len(catalog)), dtype=np.int64)
    for s, plays in enumerate(dessert_plays):
        for k in plays:
            held[s, k] += 1
    per_play = [[Fraction(0)] * len(p) for p in dessert_plays]
    unattributed = [Fraction(0)] * players
    for k in table.by_type.get("dessert_set", ()):
        p = table.params[k]
        for s, plays in enumerate(dessert_plays):
            idx = [i for i, kind in enumerate(plays) if kind == k]
            complete = (len(idx) // p["size"]) * p["size"]
            for i in idx[:complete]:
                per_play[s][i] += Fraction(p["points"], p["size"])
    if "dessert_majority" in table.by_type:
        ids = list(table.by_type["dessert_majority"])
        p = table.params[ids[0]]
        totals = held[:, ids].sum(axis=1).tolist()
        for s, award in enumerate(_most_fewest(totals, p["most"], p["fewest"], p.get("tie", "split"))):
            if not award:
                continue
            idx = [i for i, kind in enumerate(dessert_plays[s]) if kind in ids]
            if idx:
                for i in idx:
                    per_play[s][i] += Fraction(award, len(idx))
            else:
                unattributed[s] += award
    return per_play, unattributed
