"""``draftsim`` command line: training, evaluation, sweeps, memory analysis, rules, play.

Every experiment parameter lives in a JSON file (``--config``) with optional
sections ``game``, ``train``, ``eval``, ``sweep``, ``ablation``,
``meminfluence`` and ``interpret``; flags override individual fields.  Each
command writes ``manifest.json`` into its output directory holding the
effective configuration, its hash, the code version, the seeds and the sha256
of every file written.  Nothing in the outputs depends on wall-clock time.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .agents import PriorityAgent, PriorityList, RandomAgent, placeholder_priority
from .config import GameConfig, game_config_from_json, sweep_configs
from .dqn import Checkpoint, DQNAgent, TrainConfig, self_play_train
from .engine import finalize, new_game, step
from .errors import ConfigError, DraftError, InputError
from .interpret import (
    RuleParams,
    collect_pairwise_dataset,
    fit_rules,
    identified_kinds,
    kendall_tau,
    preference_matrix,
    priority_from_logs,
    reconstruct_priority,
    restrict,
    write_rank_table,
    write_rules,
)
from .metrics import evaluate_win_rate, generalization_sweep, mem_influence, welch_t_test
from .observation import FeatureLayout, observe, sleuth_state

log = logging.getLogger("draftsim")

COMMANDS = ("train", "eval", "sweep", "meminfluence", "ablate-memory", "interpret", "stats", "play")
CSV_VERSION = 1


@dataclass
class ExperimentSpec:
    command: str
    config: Path | None
    checkpoint: Path | None
    out: Path
    seeds: list[int] = field(default_factory=lambda: [0])
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.workers < 1:
            raise ConfigError("--workers must be >= 1")


# -- configuration ------------------------------------------------------------------

def load_experiment(path: Path | None) -> dict:
    if path is None:
        return {}
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def game_from(exp: dict) -> GameConfig:
    return game_config_from_json(exp.get("game", {}))


def train_from(exp: dict, args) -> TrainConfig:
    d = dict(exp.get("train", {}))
    if getattr(args, "games", None) is not None and args.command == "train":
        d["games_per_epoch"] = args.games
    if getattr(args, "epochs", None) is not None:
        d["epochs"] = args.epochs
    if getattr(args, "memory", None) is not None:
        d["memory_enabled"] = args.memory == "on"
    if "hidden" in d:
        d["hidden"] = tuple(d["hidden"])
    try:
        return TrainConfig.from_dict(d)
    except TypeError as exc:
        raise ConfigError(f"train section: {exc}") from exc


def section(exp: dict, name: str, defaults: dict) -> dict:
    d = dict(defaults)
    given = exp.get(name, {})
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"{name} section: unknown fields {sorted(unknown)}")
    d.update(given)
    return d


def opponents_for(name: str) -> Callable[[GameConfig], list]:
    """``random``, ``human`` (bundled placeholder list) or a priority-list JSON path."""
    if name == "random":
        return lambda cfg: [RandomAgent()] * (cfg.players - 1)
    plist = placeholder_priority() if name == "human" else PriorityList.load(name)
    return lambda cfg: [PriorityAgent(plist, cfg, "human")] * (cfg.players - 1)


def safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


# -- manifest ------------------------------------------------------------------------

def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def code_version() -> str:
    digest = hashlib.sha256()
    root = resources.files("draftsim")
    for path in sorted(Path(str(root)).rglob("*")):
        if path.suffix in (".py", ".json") and "__pycache__" not in path.parts:
            digest.update(path.relative_to(Path(str(root))).as_posix().encode())
            digest.update(path.read_bytes())
    return f"{__version__}+{digest.hexdigest()[:16]}"


def file_hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def rerun_argv(argv: Sequence[str]) -> list[str]:
    """Command line without ``--out``, so a manifest can be replayed into any directory."""
    kept, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            kept.append(a)
    return kept


def write_manifest(out: Path, command: str, config: dict, seeds: Sequence[int],
                   argv: Sequence[str] = ()) -> Path:
    files = {p.relative_to(out).as_posix(): file_hash(p)
             for p in sorted(out.rglob("*")) if p.is_file() and p.name != "manifest.json"}
    manifest = {
        "command": command,
        "argv": list(argv),
        "config": config,
        "config_hash": hashlib.sha256(canonical(config).encode()).hexdigest(),
        "code_version": code_version(),
        "seeds": list(seeds),
        "csv_version": CSV_VERSION,
        "outputs": files,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    return path


def _clean(d: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def fmt(x: float) -> str:
    return f"{x:.6f}"


# -- training ------------------------------------------------------------------------

CURVE_COLUMNS = ["epoch", "games", "updates", "mean_loss", "epsilon", "mean_score", "mean_reward"]


def train_run(job: tuple[dict, dict, str]) -> str:
    """Train one model and write its checkpoints; returns the final checkpoint path."""
    train_d, game_d, out = job
    tc = TrainConfig.from_dict({**train_d, "hidden": tuple(train_d["hidden"])})
    gc = GameConfig.from_dict(game_d)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    layout = FeatureLayout.for_config(gc, tc.memory_enabled)
    rows = []

    def on_epoch(epoch, net, stats):
        ckpt = Checkpoint(net, layout, tc, gc, epoch, _clean(asdict(stats)))
        ckpt.save(out_dir / f"epoch_{epoch:02d}.json")
        rows.append([stats.epoch, stats.games, stats.updates, fmt(stats.mean_loss), fmt(stats.epsilon),
                     fmt(stats.mean_score), fmt(stats.mean_reward)])
        log.info("%s epoch %d mean score %.2f", out_dir, epoch, stats.mean_score)

    self_play_train(tc, gc, on_epoch=on_epoch)
    final = out_dir / "final.json"
    final.write_bytes((out_dir / f"epoch_{tc.epochs - 1:02d}.json").read_bytes())
    write_csv(out_dir / "curve.csv", CURVE_COLUMNS, rows)
    return str(final)


def run_jobs(jobs: list, workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(train_run, jobs))
    return [train_run(j) for j in jobs]


def train_jobs(tc: TrainConfig, configs: dict[str, GameConfig], seeds: Sequence[int], out: Path,
               nested: bool) -> list:
    jobs = []
    for name, gc in configs.items():
        base = out / safe_name(name) if nested else out
        for s in seeds:
            d = TrainConfig.from_dict({**tc.to_dict(), "hidden": tc.hidden, "seed": s}).to_dict()
            jobs.append((d, gc.to_dict(), str(base / f"seed_{s}")))
    return jobs


def cmd_train(spec: ExperimentSpec, exp: dict, args) -> dict:
    tc = train_from(exp, args)
    if args.sweep_path:
        sw = section(exp, "sweep", SWEEP_DEFAULTS)
        configs = sweep_configs(sw["start"], sw["end"])
    else:
        gc = game_from(exp)
        configs = {gc.menu.name: gc}
    run_jobs(train_jobs(tc, configs, spec.seeds, spec.out, bool(args.sweep_path)), spec.workers)
    return {"train": tc.to_dict(), "games": {k: v.to_dict() for k, v in configs.items()},
            "sweep_path": bool(args.sweep_path)}


# -- evaluation ----------------------------------------------------------------------

EVAL_DEFAULTS = {"games": 1000, "opponent": "random", "seed": 12345}
EVAL_COLUMNS = ["game", "seat", "score", "win_credit", "reward"]


def cmd_eval(spec: ExperimentSpec, exp: dict, args) -> dict:
    ev = section(exp, "eval", EVAL_DEFAULTS)
    if args.games is not None:
        ev["games"] = args.games
    if args.opponent is not None:
        ev["opponent"] = args.opponent
    if args.seed is not None:
        ev["seed"] = args.seed
    ckpt = Checkpoint.load(require(spec.checkpoint, "--checkpoint"))
    gc = game_from(exp) if "game" in exp else ckpt.game_config
    agent = DQNAgent(ckpt.net, ckpt.memory)
    with open(spec.out / "eval_games.jsonl", "w") as fh:
        res = evaluate_win_rate(agent, opponents_for(ev["opponent"])(gc), gc, ev["games"], ev["seed"],
                                log=fh)
    write_csv(spec.out / "eval_games.csv", EVAL_COLUMNS,
              [[g, g % gc.players, s, fmt(c), r] for g, (s, c, r)
               in enumerate(zip(res.scores, res.credits, res.rewards))])
    summary = {"win_rate": res.win_rate, "ci_low": res.ci_low, "ci_high": res.ci_high,
               "n_games": res.n_games, "mean_score": float(np.mean(res.scores)),
               "mean_reward": res.mean_reward}
    dump(spec.out / "eval_summary.json", summary)
    print(f"win rate {res.win_rate:.4f}  95% CI [{res.ci_low:.4f}, {res.ci_high:.4f}]  "
          f"over {res.n_games} games vs {ev['opponent']}")
    return {"eval": ev, "checkpoint_sha256": file_hash(spec.checkpoint), "game": gc.to_dict()}


def require(value, flag: str):
    if value is None:
        raise ConfigError(f"{flag} is required for this command")
    return value


def dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


# -- generalization sweep ----------------------------------------------------------

SWEEP_DEFAULTS = {"start": "my_first_meal", "end": "cutthroat_combo", "opponent": "human",
                  "games_per_batch": 100, "batches": 2, "eval_seed": 1000}


def cmd_sweep(spec: ExperimentSpec, exp: dict, args) -> dict:
    sw = section(exp, "sweep", SWEEP_DEFAULTS)
    if args.games is not None:
        sw["games_per_batch"] = args.games
    if args.batches is not None:
        sw["batches"] = args.batches
    configs = sweep_configs(sw["start"], sw["end"])
    root = require(args.checkpoints, "--checkpoints")
    wanted = {name: [root / safe_name(name) / f"seed_{s}" / "final.json" for s in spec.seeds]
              for name in configs}
    missing = [str(p) for paths in wanted.values() for p in paths if not p.exists()]
    if missing:
        raise InputError("missing checkpoints:\n  " + "\n  ".join(missing))
    models = {}
    for name, paths in wanted.items():
        ckpts = [Checkpoint.load(p) for p in paths]
        models[name] = [(c.net, c.layout) for c in ckpts]
    batch_seeds = [sw["eval_seed"] + b for b in range(sw["batches"])]
    result = generalization_sweep(models, {k: v.menu for k, v in configs.items()}, configs,
                                  opponents_for(sw["opponent"]), sw["games_per_batch"], batch_seeds)
    result.write_csv(spec.out / "sweep_cells.csv")
    result.write_grouped_csv(spec.out / "sweep_by_envsim.csv")
    for row in result.grouped():
        print(f"envsim {row['envsim']} (swaps {row['swaps']}): mean win rate "
              f"{row['mean_win_rate']:.4f} over {row['cells']} cells")
    return {"sweep": sw, "checkpoints": {k: [file_hash(p) for p in v] for k, v in wanted.items()}}


# -- memory influence ----------------------------------------------------------------

MEMINF_DEFAULTS = {"n_states": 100, "n_pert": 10, "temperature": 1.0, "seed": 0}


def cmd_meminfluence(spec: ExperimentSpec, exp: dict, args) -> dict:
    mi = section(exp, "meminfluence", MEMINF_DEFAULTS)
    if args.temperature is not None:
        mi["temperature"] = args.temperature
    if args.seed is not None:
        mi["seed"] = args.seed
    ckpt = Checkpoint.load(require(spec.checkpoint, "--checkpoint"))
    gc = ckpt.game_config
    rep = mem_influence(ckpt.net, gc, mi["n_states"], mi["n_pert"], mi["seed"], mi["temperature"])
    names = gc.names
    write_csv(spec.out / "meminfluence_states.csv", ["state", "round", "turn", "mean_kl"],
              [[i, o.round, o.turn, f"{kl:.12e}"] for i, (o, kl)
               in enumerate(zip(rep.observations, rep.state_kls))])
    write_csv(spec.out / "meminfluence_perturbations.csv", ["state", "removed", "added", "kl"],
              [[r.state, names[r.removed], names[r.added], f"{r.kl:.12e}"] for r in rep.perturbations])
    summary = {"mean_kl": rep.mean_kl, "n_states": rep.n_states, "n_pert": rep.n_pert,
               "max_state": rep.max_state, "max_kl": rep.max_kl,
               "top_action": names[rep.top_action], "perturbed_action": names[rep.perturbed_action],
               "runner_up": names[rep.runner_up], "probability_shift": rep.probability_shift}
    dump(spec.out / "meminfluence.json", summary)
    print(f"MemInfluence {rep.mean_kl:.4e} ({rep.n_states} states x {rep.n_pert} perturbations); "
          f"largest shift {rep.probability_shift:.4f} at state {rep.max_state}")
    return {"meminfluence": mi, "checkpoint_sha256": file_hash(spec.checkpoint)}


# -- memory ablation -------------------------------------------------------------------

ABLATION_DEFAULTS = {"games": 500, "opponent": "human", "eval_seed": 2000}
REWARD_COLUMNS = ["cohort", "model_seed", "game", "score", "win_credit", "reward"]


def cmd_ablate(spec: ExperimentSpec, exp: dict, args) -> dict:
    ab = section(exp, "ablation", ABLATION_DEFAULTS)
    if args.games is not None:
        ab["games"] = args.games
    gc = game_from(exp)
    tc = train_from(exp, args)
    if args.checkpoints is not None:
        root = args.checkpoints
    else:
        root = spec.out / "models"
        jobs = []
        for cohort, mem in (("memory_on", True), ("memory_off", False)):
            cfg = TrainConfig.from_dict({**tc.to_dict(), "hidden": tc.hidden, "memory_enabled": mem})
            jobs += train_jobs(cfg, {cohort: gc}, spec.seeds, root, nested=True)
        run_jobs(jobs, spec.workers)
    opponents = opponents_for(ab["opponent"])
    rewards = {"memory_on": [], "memory_off": []}
    rows = []
    hashes = {}
    for cohort in rewards:
        for s in spec.seeds:
            path = root / cohort / f"seed_{s}" / "final.json"
            if not path.exists():
                raise InputError(f"missing checkpoint {path}")
            hashes[f"{cohort}/seed_{s}"] = file_hash(path)
            ckpt = Checkpoint.load(path)
            if ckpt.memory != (cohort == "memory_on"):
                raise ConfigError(f"{path}: memory flag does not match cohort {cohort}")
            res = evaluate_win_rate(DQNAgent(ckpt.net, ckpt.memory), opponents(gc), gc, ab["games"],
                                    ab["eval_seed"])
            rewards[cohort] += res.rewards
            rows += [[cohort, s, g, sc, fmt(c), r] for g, (sc, c, r)
                     in enumerate(zip(res.scores, res.credits, res.rewards))]
    write_csv(spec.out / "rewards.csv", REWARD_COLUMNS, rows)
    report = welch_t_test(rewards["memory_on"], rewards["memory_off"])
    dump(spec.out / "ttest.json", report.to_dict())
    print(f"memory on {report.mean_a:.3f} vs off {report.mean_b:.3f}: diff {report.mean_diff:.3f}, "
          f"t = {report.t_statistic:.3f}, df = {report.degrees_of_freedom:.1f}, p = {report.p_value:.3e}")
    return {"ablation": ab, "train": tc.to_dict(), "game": gc.to_dict(), "checkpoints": hashes}


# -- interpretability ----------------------------------------------------------------

INTERPRET_DEFAULTS = {"games": 500, "seed": 0, "rounds": None, "min_trials": 1,
                      "rules": asdict(RuleParams())}


def cmd_interpret(spec: ExperimentSpec, exp: dict, args) -> dict:
    it = section(exp, "interpret", INTERPRET_DEFAULTS)
    if args.games is not None:
        it["games"] = args.games
    if args.seed is not None:
        it["seed"] = args.seed
    params = RuleParams(**it["rules"])
    lists: dict[str, PriorityList] = {}
    info: dict = {"interpret": it}
    if args.logs:
        lines = []
        for p in args.logs:
            if not p.exists():
                raise InputError(f"log file not found: {p}")
            lines += p.read_text().splitlines()
        lp = priority_from_logs(lines)
        lists["from_logs"] = lp.priority
        write_csv(spec.out / "card_values.csv", ["card", "played", "points", "mean_points", "never_played"],
                  [[v.name, v.played, str(v.points), fmt(v.mean), int(v.flagged)]
                   for v in (lp.values[k] for k in lp.priority.ranking)])
        info["logs"] = {str(p): file_hash(p) for p in args.logs}
    if spec.checkpoint is not None:
        ckpt = Checkpoint.load(spec.checkpoint)
        gc = ckpt.game_config
        agent = DQNAgent(ckpt.net, ckpt.memory)
        data = collect_pairwise_dataset(agent, gc, it["games"], it["seed"], it["rounds"])
        matrix = preference_matrix(data, gc.n)
        rec = reconstruct_priority(matrix, gc.names)
        lists["dqn"] = rec
        names = FeatureLayout.for_config(gc, ckpt.memory).feature_names()
        rules = fit_rules(data, params)
        write_rules(spec.out / "rules.txt", spec.out / "rules.json", rules, names, gc.names)
        write_csv(spec.out / "preferences.csv", ["chosen", "alternative", "wins", "trials"],
                  [[gc.names[a], gc.names[b], int(matrix.wins[a, b]), int(matrix.trials[a, b])]
                   for a in range(gc.n) for b in range(gc.n) if matrix.trials[a, b]])
        known = identified_kinds(matrix, gc.names, it["min_trials"])
        human = restrict(placeholder_priority(), gc.names)
        lists["human"] = human
        if len(known) >= 2:
            tau = kendall_tau(restrict(rec, known), restrict(human, known))
            info["kendall_tau_vs_human"] = tau
            print(f"Kendall tau vs human-like list over {len(known)} identified kinds: {tau:.4f}")
        info["checkpoint_sha256"] = file_hash(spec.checkpoint)
        info["samples"] = len(data)
        print(f"{len(data)} two-card decisions, {len(rules)} rules")
    if not lists:
        raise ConfigError("interpret needs --checkpoint and/or --logs")
    for name, plist in lists.items():
        dump(spec.out / f"priority_{name}.json", {"ranking": list(plist.ranking)})
    write_rank_table(spec.out / "rank_table.csv", lists)
    return info


# -- statistics ----------------------------------------------------------------------

def read_values(path: Path, column: str) -> list[float]:
    if not path.exists():
        raise InputError(f"file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise InputError(f"{path}: no column {column!r}")
        return [float(row[column]) for row in reader]


def cmd_stats(spec: ExperimentSpec, exp: dict, args) -> dict:
    a = read_values(args.a, args.column)
    b = read_values(args.b, args.column)
    report = welch_t_test(a, b)
    dump(spec.out / "ttest.json", report.to_dict())
    print(json.dumps(report.to_dict(), indent=1))
    return {"a": file_hash(args.a), "b": file_hash(args.b), "column": args.column}


# -- interactive play ----------------------------------------------------------------

def _ask(prompt: str, legal: Sequence[int], names: Sequence[str], stdin, stdout) -> int | None:
    while True:
        stdout.write(prompt)
        stdout.flush()
        line = stdin.readline()
        if not line:
            return None
        try:
            choice = int(line.strip())
        except ValueError:
            choice = -1
        if 0 <= choice < len(legal):
            return legal[choice]
        stdout.write(f"  pick a number between 0 and {len(legal) - 1}\n")


def play_session(gc: GameConfig, agent, human_seat: int, show_memory: bool, seed: int,
                 stdin=sys.stdin, stdout=sys.stdout) -> int:
    """Human at ``human_seat`` against copies of ``agent``.  End of input aborts cleanly."""
    names = gc.names
    state = new_game(gc.with_seed(seed))
    rng = np.random.default_rng([seed, 9])
    out = stdout.write
    while not state.finished:
        out(f"\n== round {state.round + 1}, turn {state.turn + 1} ==\n")
        for s in range(gc.players):
            board = state.boards[s].counts + state.desserts[s]
            shown = ", ".join(f"{names[k]} x{board[k]}" for k in np.flatnonzero(board)) or "-"
            out(f"  seat {s}{' (you)' if s == human_seat else ''}: {shown}   score {state.scores[s]}\n")
        if show_memory:
            for o in range(1, gc.players):
                target = (human_seat + o) % gc.players
                hand = sleuth_state(state, human_seat, target)
                shown = "unknown" if hand is None else (
                    ", ".join(f"{names[k]} x{hand[k]}" for k in np.flatnonzero(hand)) or "empty")
                out(f"  memory of seat {target}'s hand: {shown}\n")
        hand = state.hands[human_seat]
        legal = [int(k) for k in np.flatnonzero(hand)]
        for i, k in enumerate(legal):
            out(f"  [{i}] {names[k]} x{hand[k]}\n")
        choice = _ask("your pick: ", legal, names, stdin, stdout)
        if choice is None:
            out("\naborted\n")
            return 0
        actions = []
        for s in range(gc.players):
            if s == human_seat:
                actions.append(choice)
            else:
                obs = observe(state, s, agent.memory)
                actions.append(agent.act(obs, obs.legal, rng))
        state = step(state, actions)
    result = finalize(state)
    out("\nfinal scores\n")
    for s, sc in enumerate(result.scores):
        out(f"  seat {s}{' (you)' if s == human_seat else ''}: {sc}\n")
    out("winner: " + ", ".join(f"seat {w}" for w in result.winners) + "\n")
    return 0


def cmd_play(spec: ExperimentSpec, exp: dict, args) -> dict:
    if spec.checkpoint is not None:
        ckpt = Checkpoint.load(spec.checkpoint)
        gc, agent = ckpt.game_config, DQNAgent(ckpt.net, ckpt.memory)
    else:
        gc, agent = game_from(exp), RandomAgent()
    seed = spec.seeds[0]
    code = play_session(gc, agent, args.seat, args.show_memory, seed)
    return {"exit": code}


# -- entry point ---------------------------------------------------------------------

HANDLERS = {"train": cmd_train, "eval": cmd_eval, "sweep": cmd_sweep,
            "meminfluence": cmd_meminfluence, "ablate-memory": cmd_ablate,
            "interpret": cmd_interpret, "stats": cmd_stats, "play": cmd_play}


def parse_seeds(text: str) -> list[int]:
    """``"0,1,2"`` or a range ``"0-4"``."""
    try:
        if re.fullmatch(r"\d+-\d+", text):
            lo, hi = map(int, text.split("-"))
            return list(range(lo, hi + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="draftsim", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="experiment JSON")
        p.add_argument("--out", type=Path, default=Path("runs") / name)
        p.add_argument("--seed", type=int)
        p.add_argument("--seeds", type=parse_seeds, help="e.g. 0,1,2 or 0-4")
        p.add_argument("--workers", type=int, default=1)
        return p

    p = add("train", "self-play DQN training")
    p.add_argument("--games", type=int, help="games per epoch")
    p.add_argument("--epochs", type=int)
    p.add_argument("--memory", choices=("on", "off"))
    p.add_argument("--sweep-path", action="store_true",
                   help="train every configuration of the generalization path")

    p = add("eval", "win rate of a checkpoint")
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--games", type=int)
    p.add_argument("--opponent", help="random, human or a priority-list JSON")

    p = add("sweep", "cross-evaluate sweep checkpoints")
    p.add_argument("--checkpoints", type=Path, help="directory written by train --sweep-path")
    p.add_argument("--games", type=int, help="games per batch")
    p.add_argument("--batches", type=int)

    p = add("meminfluence", "sensitivity of a policy to its memory block")
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--temperature", type=float)

    p = add("ablate-memory", "train/evaluate memory-on vs memory-off cohorts")
    p.add_argument("--checkpoints", type=Path, help="existing memory_on/ and memory_off/ cohorts")
    p.add_argument("--games", type=int, help="evaluation games per model")
    p.add_argument("--epochs", type=int)

    p = add("interpret", "rules and priority lists from a checkpoint and/or game logs")
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--logs", type=Path, nargs="*")
    p.add_argument("--games", type=int)

    p = add("stats", "Welch t-test between two CSV columns")
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)
    p.add_argument("--column", default="reward")

    p = add("play", "play against a checkpoint in the terminal")
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--seat", type=int, default=0)
    p.add_argument("--show-memory", action="store_true")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        seeds = args.seeds if args.seeds is not None else [args.seed if args.seed is not None else 0]
        spec = ExperimentSpec(args.command, args.config, getattr(args, "checkpoint", None),
                              args.out, seeds, args.workers)
        exp = load_experiment(spec.config)
        if args.command == "play":
            return cmd_play(spec, exp, args)["exit"]
        spec.out.mkdir(parents=True, exist_ok=True)
        info = HANDLERS[args.command](spec, exp, args)
        write_manifest(spec.out, args.command, {"experiment": exp, "resolved": info}, spec.seeds,
                       rerun_argv(argv))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DraftError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
