"""Self-organizing map with cosine-similarity matching.

The network is a 1-D line of neurons.  For each presented input the best
matching unit (highest cosine similarity, ties to the lowest index) and every
neuron within the current neighborhood radius move toward the input:

    W <- W + alpha * (X - W)

with a learning rate and a rectangular neighborhood radius that both decay
linearly over epochs.  Training is a pure function of (inputs, config): the
weight initialization and the per-epoch presentation order come from the
package's portable xoshiro256** generator seeded by ``config.seed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyInput, InvalidConfig, LengthMismatch
from .rng import Xoshiro256
from . import jsonio


@dataclass(frozen=True)
class SomConfig:
    """Training hyperparameters for one network.

    ``radius0=None`` means the default initial radius ``neuron_count // 4``.
    """

    neuron_count: int
    epochs: int = 50
    alpha0: float = 0.5
    radius0: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.neuron_count < 1:
            raise InvalidConfig("neuron_count must be >= 1")
        if self.epochs < 1:
            raise InvalidConfig("epochs must be >= 1")
        if not 0.0 < self.alpha0 <= 1.0:
            raise InvalidConfig("alpha0 must be in (0, 1]")
        if self.radius0 is not None and self.radius0 < 0:
            raise InvalidConfig("radius0 must be >= 0")
        if self.seed < 0:
            raise InvalidConfig("seed must be a non-negative integer")

    @property
    def effective_radius0(self) -> float:
        return float(self.neuron_count // 4) if self.radius0 is None else float(self.radius0)

    def to_json_dict(self) -> dict:
        return {
            "neuron_count": self.neuron_count,
            "epochs": self.epochs,
            "alpha0": self.alpha0,
            "radius0": self.radius0,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, data) -> "SomConfig":
        return cls(
            neuron_count=int(data["neuron_count"]),
            epochs=int(data["epochs"]),
            alpha0=float(data["alpha0"]),
            radius0=None if data["radius0"] is None else float(data["radius0"]),
            seed=int(data["seed"]),
        )


@dataclass(frozen=True)
class SomNetwork:
    """A trained Kohonen layer: one weight row per neuron."""

    weights: np.ndarray
    config: SomConfig

    @property
    def neuron_count(self) -> int:
        return self.weights.shape[0]

    @property
    def p(self) -> int:
        return self.weights.shape[1]


def cosine_similarity(x: Sequence[float], w: Sequence[float]) -> float:
    """Cosine of the angle between two nonnegative vectors, in [0, 1].

    Defined as 0 when either vector is all-zero (such a vector has no
    direction, so it never wins a best-match comparison).
    """
    xa = np.asarray(x, dtype=np.float64)
    wa = np.asarray(w, dtype=np.float64)
    if xa.shape != wa.shape:
        raise LengthMismatch(f"vector lengths differ: {xa.shape} vs {wa.shape}")
    denom = float(np.linalg.norm(xa)) * float(np.linalg.norm(wa))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xa, wa)) / denom


def _similarities(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Cosine similarity of x against every weight row (0 for zero norms)."""
    row_norms = np.linalg.norm(weights, axis=1)
    x_norm = np.linalg.norm(x)
    denom = row_norms * x_norm
    dots = weights @ x
    out = np.zeros(weights.shape[0], dtype=np.float64)
    nonzero = denom > 0.0
    out[nonzero] = dots[nonzero] / denom[nonzero]
    return out


def find_bmu(net: SomNetwork, x: Sequence[float]) -> int:
    """Index of the most similar neuron; ties break to the lowest index."""
    xa = np.asarray(x, dtype=np.float64)
    if xa.shape[0] != net.p:
        raise LengthMismatch(f"input length {xa.shape[0]} != {net.p}")
    return int(np.argmax(_similarities(net.weights, xa)))


def initial_weights(cfg: SomConfig, p: int, rng: Xoshiro256 | None = None) -> np.ndarray:
    """Seeded uniform(0.01, 1.0) weights, drawn row-major; never all-zero."""
    if rng is None:
        rng = Xoshiro256(cfg.seed)
    weights = np.empty((cfg.neuron_count, p), dtype=np.float64)
    for i in range(cfg.neuron_count):
        for j in range(p):
            weights[i, j] = rng.uniform(0.01, 1.0)
    return weights


def update_neighborhood(
    weights: np.ndarray, bmu: int, x: np.ndarray, alpha: float, radius: int
) -> None:
    """Move the BMU and neurons within line distance ``radius`` toward x."""
    lo = max(0, bmu - radius)
    hi = min(weights.shape[0] - 1, bmu + radius)
    weights[lo : hi + 1] += alpha * (x - weights[lo : hi + 1])


def _as_input_matrix(inputs: Sequence[np.ndarray]) -> np.ndarray:
    if len(inputs) == 0:
        raise EmptyInput("training needs at least one input vector")
    p = len(inputs[0])
    for vec in inputs:
        if len(vec) != p:
            raise LengthMismatch("input vectors have differing lengths")
    return np.asarray(inputs, dtype=np.float64)


def train(inputs: Sequence[np.ndarray], cfg: SomConfig) -> SomNetwork:
    """Train a network; the result is fully determined by (inputs, cfg).

    Epoch ``e`` (0-based) uses ``alpha = alpha0 * (1 - e / epochs)`` and a
    rectangular radius ``round(radius0 * (1 - e / epochs))`` (half-up), and
    presents the inputs in a freshly shuffled order.
    """
    matrix = _as_input_matrix(inputs)
    rng = Xoshiro256(cfg.seed)
    weights = initial_weights(cfg, matrix.shape[1], rng)
    radius0 = cfg.effective_radius0
    for epoch in range(cfg.epochs):
        decay = 1.0 - epoch / cfg.epochs
        alpha = cfg.alpha0 * decay
        radius = int(math.floor(radius0 * decay + 0.5))
        order = list(range(matrix.shape[0]))
        rng.shuffle(order)
        for i in order:
            x = matrix[i]
            bmu = int(np.argmax(_similarities(weights, x)))
            update_neighborhood(weights, bmu, x, alpha, radius)
    weights.setflags(write=False)
    return SomNetwork(weights, cfg)


def assign(net: SomNetwork, inputs: Sequence[np.ndarray]) -> list[int]:
    """BMU index for each input; identical inputs get identical labels."""
    return [find_bmu(net, x) for x in inputs]


def mean_similarity(net: SomNetwork, inputs: Sequence[np.ndarray]) -> float:
    """Mean cosine similarity between inputs and their BMU rows."""
    if len(inputs) == 0:
        raise EmptyInput("mean_similarity needs at least one input")
    sims = [cosine_similarity(x, net.weights[find_bmu(net, x)]) for x in inputs]
    return sum(sims) / len(sims)


def som_to_json_dict(net: SomNetwork) -> dict:
    return {
        "config": net.config.to_json_dict(),
        "weights": [[float(v) for v in row] for row in net.weights],
    }


def som_from_json_dict(data) -> SomNetwork:
    weights = np.asarray(data["weights"], dtype=np.float64)
    weights.setflags(write=False)
    return SomNetwork(weights, SomConfig.from_json_dict(data["config"]))


def save_som(net: SomNetwork, path: str | Path) -> None:
    jsonio.write_json(path, som_to_json_dict(net))


def load_som(path: str | Path) -> SomNetwork:
    return som_from_json_dict(jsonio.read_json(path))
