"""Versioned JSON checkpoint container.

Layout (format ``draftsim.checkpoint``, version 1)::

    {
      "format": "draftsim.checkpoint", "version": 1,
      "layer_sizes": [input_dim, 128, 128, 128, 128, n],
      "activation": "relu", "output": "linear",
      "weights": [{"shape": [in, out], "data": "<base64 little-endian float64, row-major>"}, ...],
      "biases":  [{"shape": [out], "data": "..."}, ...],
      "feature_layout": {...}, "train_config": {...}, "game_config": {...},
      "epoch": k, "stats": {...}
    }

Layer ``i`` computes ``h @ W_i + b_i``; hidden layers apply ReLU.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import GameConfig
from ..errors import ConfigError
from ..observation import FeatureLayout
from .network import QNetwork
from .train import TrainConfig

FORMAT = "draftsim.checkpoint"
VERSION = 1


def _pack(a: np.ndarray) -> dict:
    data = np.ascontiguousarray(a, dtype="<f8").tobytes()
    return {"shape": list(a.shape), "data": base64.b64encode(data).decode("ascii")}


def _unpack(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(d["shape"]).astype(np.float64)


@dataclass
class Checkpoint:
    net: QNetwork
    layout: FeatureLayout
    train_config: TrainConfig
    game_config: GameConfig
    epoch: int
    stats: dict = field(default_factory=dict)

    @property
    def memory(self) -> bool:
        return self.layout.memory

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "layer_sizes": self.net.layer_sizes,
            "activation": "relu",
            "output": "linear",
            "weights": [_pack(w) for w in self.net.weights],
            "biases": [_pack(b) for b in self.net.biases],
            "feature_layout": self.layout.to_json(),
            "train_config": self.train_config.to_dict(),
            "game_config": self.game_config.to_dict(),
            "epoch": self.epoch,
            "stats": self.stats,
        }

    def save(self, path: str | Path) -> str:
        """Write the checkpoint; returns the sha256 of the written bytes."""
        text = json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"
        Path(path).write_text(text)
        return hashlib.sha256(text.encode()).hexdigest()

    @classmethod
    def from_json(cls, d: dict) -> "Checkpoint":
        if d.get("format") != FORMAT:
            raise ConfigError(f"not a draftsim checkpoint (format={d.get('format')!r})")
        if d.get("version") != VERSION:
            raise ConfigError(f"unsupported checkpoint version {d.get('version')}")
        net = QNetwork([_unpack(w) for w in d["weights"]], [_unpack(b) for b in d["biases"]])
        if net.layer_sizes != d["layer_sizes"]:
            raise ConfigError("checkpoint layer_sizes disagree with stored weights")
        return cls(net, FeatureLayout.from_json(d["feature_layout"]),
                   TrainConfig.from_dict(d["train_config"]),
                   GameConfig.from_dict(d["game_config"]), d["epoch"], d.get("stats", {}))

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"checkpoint not found: {path}")
        return cls.from_json(json.loads(path.read_text()))
