"""Regenerate data/priority_placeholder.json, the stand-in "human-like" priority list.

No human game records are bundled, so the list is the mean-points-per-card
ranking of random play over every configuration on the generalization path.
"""

import argparse
import io
import json
from pathlib import Path

import numpy as np

from draftsim.agents import RandomAgent
from draftsim.config import sweep_configs
from draftsim.interpret import priority_from_logs
from draftsim.runner import game_seed, play_game

OUT = Path(__file__).resolve().parents[1] / "src" / "draftsim" / "data" / "priority_placeholder.json"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--games", type=int, default=1000, help="games per configuration")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()

    buf = io.StringIO()
    gid = 0
    for i, cfg in enumerate(sweep_configs().values()):
        agents = [RandomAgent()] * cfg.players
        for g in range(args.games):
            play_game(cfg.with_seed(game_seed(args.seed, gid)), agents,
                      np.random.default_rng([args.seed, i, g]), log=buf, game_id=gid)
            gid += 1
    result = priority_from_logs(buf.getvalue().splitlines())
    payload = {
        "ranking": list(result.priority.ranking),
        "mean_points": {k: round(v.mean, 6) for k, v in result.values.items()},
        "source": f"random self-play, {args.games} games per sweep config, seed {args.seed}",
    }
    args.out.write_text(json.dumps(payload, indent=1) + "\n")
    for name in result.priority.ranking:
        print(f"{name:22s} {result.values[name].mean:7.3f}")


if __name__ == "__main__":
    main()
