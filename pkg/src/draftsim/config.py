"""Card kinds, menus, decks and game configurations.

All constants (scoring rules, deck copies, menus) live in the JSON files under
``draftsim/data``; a game config file may override any of them.  See
``docs/config_schema.md`` for the file format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import ConfigError

CATEGORIES = ("nigiri", "roll", "appetizer", "special", "dessert")
DEFAULT_HAND_SIZE = {2: 10, 3: 10, 4: 9, 5: 9, 6: 8, 7: 8, 8: 7}


def freeze_rule(rule: Mapping[str, Any]) -> tuple:
    return tuple(sorted((k, tuple(v) if isinstance(v, list) else v) for k, v in rule.items()))


def _read_data(name: str) -> dict:
    return json.loads(resources.files("draftsim.data").joinpath(name).read_text())


@dataclass(frozen=True)
class CardKind:
    id: int
    name: str
    family: str
    category: str
    icons: int = 0
    rule: tuple = ()  # frozen (key, value) pairs; see freeze_rule

    def __post_init__(self):
        if isinstance(self.rule, Mapping):
            object.__setattr__(self, "rule", freeze_rule(self.rule))
        if self.category not in CATEGORIES:
            raise ConfigError(f"{self.name}: unknown category {self.category!r}")
        if self.icons < 0 or (self.icons > 0 and self.category != "roll"):
            raise ConfigError(f"{self.name}: icons only allowed on roll cards")

    @property
    def rule_type(self) -> str:
        return self.params["type"]

    @property
    def params(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.rule}

    def to_dict(self) -> dict:
        return {"name": self.name, "family": self.family, "category": self.category,
                "icons": self.icons, "rule": self.params}


@dataclass(frozen=True)
class Menu:
    """The set of unique cards (families) in play; a "game configuration"."""

    name: str
    items: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.items)) != len(self.items):
            raise ConfigError(f"menu {self.name!r} has duplicate items")

    @property
    def n(self) -> int:
        return len(self.items)

    def __contains__(self, family: str) -> bool:
        return family in self.items


@dataclass(frozen=True)
class DeckSpec:
    copies: tuple[int, ...]  # indexed by catalog id; 0 for kinds not on the menu
    dessert_schedule: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.copies) or any(c < 0 for c in self.dessert_schedule):
            raise ConfigError("deck counts must be non-negative")


def load_card_specs(path: str | Path | None = None) -> list[dict]:
    data = json.loads(Path(path).read_text()) if path else _read_data("cards.json")
    return list(data["kinds"])


def load_menus() -> dict[str, list[str]]:
    return dict(_read_data("menus.json")["menus"])


def default_dessert_schedule() -> tuple[int, ...]:
    return tuple(_read_data("menus.json")["dessert_schedule"])


def family_order(specs: Sequence[Mapping]) -> list[str]:
    seen: list[str] = []
    for spec in specs:
        if spec["family"] not in seen:
            seen.append(spec["family"])
    return seen


def make_menu(menu: str | Sequence[str], name: str | None = None,
              specs: Sequence[Mapping] | None = None) -> Menu:
    """Build a Menu from a registered menu name or an explicit family list."""
    specs = specs if specs is not None else load_card_specs()
    known = family_order(specs)
    if isinstance(menu, str):
        menus = load_menus()
        if menu not in menus:
            raise ConfigError(f"unknown menu {menu!r}; known: {sorted(menus)}")
        name, items = name or menu, menus[menu]
    else:
        items = list(menu)
        name = name or "+".join(items)
    unknown = [f for f in items if f not in known]
    if unknown:
        raise ConfigError(f"menu {name!r}: unknown cards {unknown}")
    return Menu(name, tuple(sorted(items, key=known.index)))


def check_menu_structure(menu: Menu, specs: Sequence[Mapping]) -> None:
    """Exactly one roll family and one dessert family, as on the commercial menus."""
    category = {s["family"]: s["category"] for s in specs}
    for cat in ("roll", "dessert"):
        found = [f for f in menu.items if category[f] == cat]
        if len(found) != 1:
            raise ConfigError(f"menu {menu.name!r} needs exactly one {cat} card, has {found}")


def build_catalog(families: Iterable[str], specs: Sequence[Mapping] | None = None,
                  scoring: Mapping[str, Mapping] | None = None) -> tuple[CardKind, ...]:
    """Card kinds for ``families`` in global card order, ids 0..n-1."""
    specs = specs if specs is not None else load_card_specs()
    wanted = set(families)
    missing = wanted - {s["family"] for s in specs}
    if missing:
        raise ConfigError(f"unknown cards {sorted(missing)}")
    scoring = scoring or {}
    kinds = []
    for spec in specs:
        if spec["family"] not in wanted:
            continue
        rule = scoring.get(spec["name"], scoring.get(spec["family"], spec["rule"]))
        kinds.append(CardKind(len(kinds), spec["name"], spec["family"], spec["category"],
                              int(spec.get("icons", 0)), dict(rule)))
    return tuple(kinds)


@dataclass(frozen=True)
class GameConfig:
    catalog: tuple[CardKind, ...]
    menu: Menu
    deck: DeckSpec
    players: int = 4
    hand_size: int = 9
    rounds: int = 3
    pass_direction: str = "left"
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.players <= 8:
            raise ConfigError(f"players must be in [2, 8], got {self.players}")
        if self.hand_size < 1 or self.rounds < 1:
            raise ConfigError("hand_size and rounds must be positive")
        if self.pass_direction not in ("left", "right"):
            raise ConfigError(f"pass_direction must be left or right, got {self.pass_direction!r}")
        if [k.id for k in self.catalog] != list(range(len(self.catalog))):
            raise ConfigError("catalog ids must be contiguous 0..n-1")
        if len(self.deck.copies) != len(self.catalog):
            raise ConfigError("deck copies must cover the catalog")
        families = {k.family for k in self.catalog}
        if not set(self.menu.items) <= families:
            raise ConfigError(f"menu cards {sorted(set(self.menu.items) - families)} not in catalog")
        for k in self.catalog:
            if k.family not in self.menu and self.deck.copies[k.id]:
                raise ConfigError(f"{k.name} has copies but is not on the menu")
        if len(self.deck.dessert_schedule) < self.rounds:
            raise ConfigError("dessert_schedule needs one entry per round")
        needed = self.players * self.hand_size
        if self.cards_in_round_one() < needed:
            raise ConfigError(f"deck too small: {self.cards_in_round_one()} cards per round, "
                              f"{needed} needed for {self.players} x {self.hand_size}")

    @property
    def n(self) -> int:
        return len(self.catalog)

    @cached_property
    def dessert_ids(self) -> tuple[int, ...]:
        return tuple(k.id for k in self.catalog if k.category == "dessert")

    @cached_property
    def in_play(self) -> tuple[int, ...]:
        return tuple(k.id for k in self.catalog if k.family in self.menu)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(k.name for k in self.catalog)

    def non_dessert_copies(self) -> int:
        return sum(c for k, c in zip(self.catalog, self.deck.copies) if k.category != "dessert")

    def cards_in_round_one(self) -> int:
        supply = sum(self.deck.copies[i] for i in self.dessert_ids)
        return self.non_dessert_copies() + min(supply, self.deck.dessert_schedule[0])

    def kind_id(self, name: str) -> int:
        for k in self.catalog:
            if k.name == name:
                return k.id
        raise ConfigError(f"no card kind {name!r} in this game")

    def with_seed(self, seed: int) -> "GameConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return {
            "menu_name": self.menu.name,
            "menu": list(self.menu.items),
            "catalog": [k.to_dict() for k in self.catalog],
            "copies": {k.name: c for k, c in zip(self.catalog, self.deck.copies)},
            "dessert_schedule": list(self.deck.dessert_schedule),
            "players": self.players,
            "hand_size": self.hand_size,
            "rounds": self.rounds,
            "pass_direction": self.pass_direction,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GameConfig":
        """Inverse of :meth:`to_dict` (self-contained: carries its own catalog)."""
        catalog = tuple(CardKind(i, c["name"], c["family"], c["category"], c.get("icons", 0),
                                 dict(c["rule"])) for i, c in enumerate(d["catalog"]))
        copies = tuple(int(d["copies"].get(k.name, 0)) for k in catalog)
        return cls(catalog=catalog, menu=Menu(d["menu_name"], tuple(d["menu"])),
                   deck=DeckSpec(copies, tuple(d["dessert_schedule"])),
                   players=d["players"], hand_size=d["hand_size"], rounds=d["rounds"],
                   pass_direction=d.get("pass_direction", "left"), seed=d.get("seed", 0))


def make_game_config(menu: str | Sequence[str] | Menu = "my_first_meal", *, players: int = 4,
                     hand_size: int | None = None, rounds: int = 3, seed: int = 0,
                     universe: Iterable[str] | None = None,
                     copies: Mapping[str, int] | None = None,
                     dessert_schedule: Sequence[int] | None = None,
                     scoring: Mapping[str, Mapping] | None = None,
                     pass_direction: str = "left",
                     standard_menu: bool = True,
                     cards_file: str | Path | None = None) -> GameConfig:
    """Assemble a GameConfig from data-file defaults plus overrides.

    ``universe`` lists extra families (or menu names) whose kinds join the
    feature/action index space without being dealt; the generalization sweep
    uses it so every configuration shares one layout.
    """
    specs = load_card_specs(cards_file)
    if not isinstance(menu, Menu):
        menu = make_menu(menu, specs=specs)
    if standard_menu:
        check_menu_structure(menu, specs)
    families = set(menu.items)
    menus = load_menus()
    for item in universe or ():
        families.update(menus[item] if item in menus else [item])
    catalog = build_catalog(families, specs, scoring)
    copies = dict(copies or {})
    default_copies = {s["name"]: int(s["copies"]) for s in specs}
    counts = tuple(int(copies.get(k.name, default_copies[k.name])) if k.family in menu else 0
                   for k in catalog)
    schedule = tuple(dessert_schedule) if dessert_schedule is not None else default_dessert_schedule()
    if hand_size is None:
        if players not in DEFAULT_HAND_SIZE:
            raise ConfigError(f"players must be in [2, 8], got {players}")
        hand_size = DEFAULT_HAND_SIZE[players]
    return GameConfig(catalog=catalog, menu=menu, deck=DeckSpec(counts, schedule),
                      players=players, hand_size=hand_size, rounds=rounds,
                      pass_direction=pass_direction, seed=seed)


GAME_CONFIG_KEYS = {"menu", "players", "hand_size", "rounds", "seed", "universe", "copies",
                    "dessert_schedule", "scoring", "pass_direction", "standard_menu", "cards_file"}


def game_config_from_json(d: Mapping) -> GameConfig:
    if "catalog" in d:
        return GameConfig.from_dict(d)
    unknown = set(d) - GAME_CONFIG_KEYS - {"name"}
    if unknown:
        raise ConfigError(f"unknown game config fields {sorted(unknown)}")
    return make_game_config(**{k: v for k, v in d.items() if k in GAME_CONFIG_KEYS})


def load_game_config(path: str | Path) -> GameConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return game_config_from_json(data.get("game", data))


def config_path(a: Menu, b: Menu, specs: Sequence[Mapping] | None = None) -> list[Menu]:
    """Menus from ``a`` to ``b``, one card swap per step.

    The lowest card (global order) of a-b is replaced by the lowest card of b-a
    first, so paths are deterministic.
    """
    if a.n != b.n:
        raise ConfigError(f"menus differ in size: {a.n} vs {b.n}")
    order = family_order(specs if specs is not None else load_card_specs())
    remove = sorted(set(a.items) - set(b.items), key=order.index)
    add = sorted(set(b.items) - set(a.items), key=order.index)
    path = [a]
    current = list(a.items)
    for step, (old, new) in enumerate(zip(remove, add), start=1):
        current = sorted([f for f in current if f != old] + [new], key=order.index)
        name = b.name if step == len(remove) else f"{a.name}~{b.name}@{step}"
        path.append(Menu(name, tuple(current)))
    return path


def sweep_configs(start: str = "my_first_meal", end: str = "cutthroat_combo",
                  **overrides) -> dict[str, GameConfig]:
    """Game configs along the one-swap path from ``start`` to ``end``, keyed by menu name.

    All share the union of the path's cards as their index space, so one
    feature layout serves every config.
    """
    specs = load_card_specs(overrides.get("cards_file"))
    path = config_path(make_menu(start, specs=specs), make_menu(end, specs=specs), specs)
    universe = sorted({f for m in path for f in m.items})
    return {m.name: make_game_config(m, universe=universe, **overrides) for m in path}
