import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from draftsim.config import build_catalog, family_order, load_card_specs, make_game_config
from draftsim.engine import Board, new_game

DATA = Path(__file__).parent / "data"


def load_fixtures() -> dict:
    return json.loads((DATA / "board_fixtures.json").read_text())


def all_kinds_catalog():
    specs = load_card_specs()
    return build_catalog(family_order(specs), specs)


def boards_from_names(catalog, plays_per_seat):
    ids = {k.name: k.id for k in catalog}
    boards = []
    for plays in plays_per_seat:
        kinds = [ids[p.rstrip("*")] for p in plays]
        voided = [i for i, p in enumerate(plays) if p.endswith("*")]
        boards.append(Board.from_plays(len(catalog), catalog, kinds, voided))
    return boards


def held_matrix(catalog, held):
    ids = {k.name: k.id for k in catalog}
    m = np.zeros((len(held), len(catalog)), dtype=np.int64)
    for s, d in enumerate(held):
        for name, c in d.items():
            m[s, ids[name]] = c
    return m


def finished_state(config, scores, desserts):
    """A finished game with the given running scores and kept desserts."""
    state = new_game(config)
    return replace(state, hands=np.zeros_like(state.hands), scores=tuple(scores),
                   desserts=desserts, finished=True)


@pytest.fixture(scope="session")
def fixtures():
    return load_fixtures()


@pytest.fixture(scope="session")
def catalog():
    return all_kinds_catalog()


@pytest.fixture(scope="session")
def mfm():
    return make_game_config("my_first_meal")


# -- acceptance reporting -------------------------------------------------------------

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture()
def acceptance(request):
    """``acceptance(n, ok, detail)`` records one criterion line for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(n, ok, detail):
        lines[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(lines[n])
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
