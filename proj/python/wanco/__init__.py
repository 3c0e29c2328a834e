"""Augmented-Lagrangian adversarial training of neural networks."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import _core
from ._core import (
    ConfigError,
    NonFiniteError,
    gl_sharp_interface_radius,
    obstacle_psor,
    set_worker_count,
)

__all__ = [
    "ConfigError",
    "NonFiniteError",
    "Run",
    "eval_grid",
    "expand_config",
    "gl_sharp_interface_radius",
    "grid_points",
    "obstacle_psi",
    "obstacle_psor",
    "preset",
    "preset_names",
    "quadrature",
    "set_worker_count",
    "train",
]


def _dump(config: Mapping[str, Any] | str) -> str:
    if isinstance(config, str):
        return json.dumps({"preset": config})
    return json.dumps(config)


def preset_names() -> list[str]:
    return list(_core.preset_names())


def preset(name: str) -> dict:
    """Full configuration tree of a named preset."""
    return json.loads(_core.preset_config(name))


def expand_config(config: Mapping[str, Any] | str) -> dict:
    """Validated configuration with the preset applied."""
    return json.loads(_core.validate_config(_dump(config)))


def _parse_history(text: str) -> dict[str, np.ndarray]:
    lines = text.splitlines()
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    header, body = rows[0], rows[1:]
    table = np.array(body, dtype=float).reshape(len(body), len(header))
    return {name: table[:, i] for i, name in enumerate(header)}


@dataclass
class Run:
    config: dict
    params: np.ndarray
    history: dict[str, np.ndarray]
    final: dict
    final_betas: list[float]
    history_csv: str = field(repr=False)

    def eval(self, points: np.ndarray) -> dict[str, np.ndarray]:
        return eval_grid(self.config, self.params, points)


def train(config: Mapping[str, Any] | str, out: str | Path | None = None, seed: int | None = None) -> Run:
    """Trains a configuration (a preset name or a config mapping).

    With `out`, history.csv, params.bin and summary.txt are also written there.
    """
    r = _core.train(_dump(config), None if out is None else Path(out), seed)
    return Run(
        config=json.loads(r["config"]),
        params=r["params"],
        history=_parse_history(r["history_csv"]),
        final=r["final"],
        final_betas=list(r["final_betas"]),
        history_csv=r["history_csv"],
    )


def eval_grid(config: Mapping[str, Any], params: np.ndarray, points: np.ndarray) -> dict[str, np.ndarray]:
    """Field values at `points` (shape (n, d)), keyed by column name."""
    names, values = _core.eval_grid(json.dumps(config), np.asarray(params, dtype=float), np.asarray(points, dtype=float))
    return {name: values[:, i] for i, name in enumerate(names)}


def grid_points(lo, hi, nodes) -> np.ndarray:
    """Uniform tensor grid including endpoints, first axis slowest; shape (n, d)."""
    return _core.grid_points(list(lo), list(hi), list(nodes))


def obstacle_psi(name: str, x) -> np.ndarray:
    return _core.obstacle_psi(name, np.asarray(x, dtype=float))


def quadrature(values: np.ndarray, nodes, lo, hi) -> float:
    """Composite Simpson over a tensor grid; `values` row-major with the first axis slowest."""
    return _core.quadrature(np.asarray(values, dtype=float).ravel(), list(nodes), list(lo), list(hi))
