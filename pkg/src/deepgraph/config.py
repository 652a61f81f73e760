"""Run configuration: a JSON file of nested sections, with defaults for anything omitted.

Unknown sections or keys raise :class:`ConfigError`.
"""
from __future__ import annotations

import copy
import json
from pathlib import Path

from .errors import ConfigError
from .neuralnet import Architecture, TrainConfig

MODELS = ("deepgraph", "gd-linear", "gd-mlp", "gd-cnn", "features-linear")

DEFAULTS = {
    "seed": 0,
    "out": None,
    "source": {"edge_file": None, "label_file": None},
    "generator": {"kind": "ba", "n_nodes": 9000, "edges_per_node": 2, "p": 0.001, "k": 4, "beta": 0.1},
    "split": {
        "time_unit": "fraction",
        "graph_times": [0.60, 0.62, 0.64],
        "growth_times": [0.70, 0.72, 0.74],
        "fractions": [0.8, 0.05, 0.15],
    },
    "instances": {"k_hop": 1, "target": "degree", "downsample_zero": 0.5},
    "descriptor": {"z1": 0.1, "zN": 25.0, "n_steps": 64, "n_bins": 64, "method": "ql",
                   "n_jobs": 1, "write_csv": False, "heatmaps": 0},
    "model": {"filter_sizes": [2, 4, 6], "conv_filters": [32, 16], "dense_sizes": [256, 256],
              "dropout": 0.5, "cnn_filter_size": 4},
    "train": {"learning_rate": 0.005, "l2": 1e-5, "batch_size": 64, "max_epochs": 500,
              "patience": 20, "paper_init": False},
    "models": ["deepgraph", "gd-linear", "gd-mlp", "gd-cnn", "features-linear"],
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where!r} must be a table")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def _validate(cfg: dict) -> None:
    try:
        int(cfg["seed"])
        if int(cfg["seed"]) < 0:
            raise ConfigError("seed must be non-negative")
        if cfg["split"]["time_unit"] not in ("fraction", "absolute"):
            raise ConfigError("split.time_unit must be 'fraction' or 'absolute'")
        if cfg["instances"]["target"] not in ("degree", "size"):
            raise ConfigError("instances.target must be 'degree' or 'size'")
        if cfg["descriptor"]["method"] not in ("ql", "lapack"):
            raise ConfigError("descriptor.method must be 'ql' or 'lapack'")
        for m in cfg["models"]:
            if m not in MODELS:
                raise ConfigError(f"unknown model {m!r}")
        architecture(cfg, "deepgraph")
        train_config(cfg)
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then the JSON file at ``path``, then ``overrides`` (same nesting)."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be an object")
        cfg = _merge(cfg, user)
    if overrides:
        cfg = _merge(cfg, overrides)
    _validate(cfg)
    return cfg


def architecture(cfg: dict, model: str) -> Architecture:
    """Network shape for the neural variants: ``deepgraph``, ``gd-mlp`` and ``gd-cnn``."""
    d, m = cfg["descriptor"], cfg["model"]
    common = dict(n_bins=int(d["n_bins"]), n_steps=int(d["n_steps"]),
                  conv_filters=tuple(m["conv_filters"]), dense_sizes=tuple(m["dense_sizes"]),
                  dropout=float(m["dropout"]))
    if model == "deepgraph":
        return Architecture(columns=("bins", "time"), filter_sizes=tuple(m["filter_sizes"]), **common)
    if model == "gd-mlp":
        return Architecture(columns=(), filter_sizes=(), **common)
    if model == "gd-cnn":
        return Architecture(columns=("bins",), filter_sizes=(int(m["cnn_filter_size"]),), **common)
    raise ConfigError(f"{model!r} is not a neural model")


def train_config(cfg: dict, seed: int | None = None) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(learning_rate=float(t["learning_rate"]), l2=float(t["l2"]),
                       batch_size=int(t["batch_size"]), max_epochs=int(t["max_epochs"]),
                       patience=int(t["patience"]), seed=0 if seed is None else int(seed),
                       paper_init=bool(t["paper_init"]))


def dump_config(cfg: dict) -> str:
    return json.dumps(cfg, indent=2, sort_keys=True) + "\n"
