"""Context-free baseline: flatten the cube and cluster plain users.

Collapsing the situation axis (averaging duplicate user/item ratings across
situations) yields an ordinary user x item matrix.  The baseline then runs
the exact same SOM clustering and weighted-mean scoring as phase 3 of the
pipeline, so any quality gap is attributable to context modelling alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import ContextSchema, RatingCube, load_schema, save_schema, vector_from_ratings
from .errors import EmptyCube, UnknownUser
from .pipeline import (
    UserClusterModel,
    aggregate,
    cluster_virtual_users,
    predict_scores,
    rank_items,
)
from .som import SomConfig, assign, som_from_json_dict, som_to_json_dict
from . import jsonio

DEFAULT_BASELINE_NEURONS = 19


class FlatSpace:
    """User x item matrix with the same row protocol as VirtualUserSpace."""

    def __init__(
        self,
        users: Sequence[str],
        items: Sequence[str],
        matrix: Mapping[str, Mapping[str, float]],
    ):
        self.users = tuple(users)
        self.items = tuple(items)
        self.matrix = {u: dict(matrix[u]) for u in self.users}
        self._item_index = {item: i for i, item in enumerate(self.items)}
        self._dense: np.ndarray | None = None

    @property
    def keys(self) -> tuple[str, ...]:
        return self.users

    @property
    def item_index(self) -> Mapping[str, int]:
        return self._item_index

    def ratings_of(self, key: str) -> Mapping[str, float]:
        try:
            return self.matrix[key]
        except KeyError:
            raise UnknownUser(f"unknown user {key!r}") from None

    def vector(self, key: str) -> np.ndarray:
        return vector_from_ratings(
            self.ratings_of(key), self._item_index, len(self.items)
        )

    def dense_matrix(self) -> np.ndarray:
        if self._dense is None:
            self._dense = np.asarray(
                [self.vector(u) for u in self.users], dtype=np.float64
            )
            self._dense.setflags(write=False)
        return self._dense

    def to_json_dict(self) -> dict:
        return {
            "items": list(self.items),
            "rows": [
                {"user": user, "ratings": self.matrix[user]} for user in self.users
            ],
        }

    @classmethod
    def from_json_dict(cls, data) -> "FlatSpace":
        users = [row["user"] for row in data["rows"]]
        matrix = {
            row["user"]: {item: float(v) for item, v in row["ratings"].items()}
            for row in data["rows"]
        }
        return cls(users, tuple(data["items"]), matrix)


def flatten_cube(cube: RatingCube) -> FlatSpace:
    """Average away the situation axis, keeping users with >= 1 rating."""
    users = [u for u in sorted(cube.users) if cube.user_ratings(u)]
    if not users:
        raise EmptyCube("cube has no ratings to flatten")
    matrix: dict[str, dict[str, float]] = {}
    for user in users:
        per_item: dict[str, list[int]] = {}
        for flat in sorted(cube.user_ratings(user)):
            for item, rating in sorted(cube.user_ratings(user)[flat].items()):
                per_item.setdefault(item, []).append(rating)
        matrix[user] = {item: aggregate(vals) for item, vals in per_item.items()}
    return FlatSpace(users, cube.items, matrix)


@dataclass
class BaselineModel:
    """Flat user-clustering recommender sharing the pipeline's scorer."""

    schema: ContextSchema
    space: FlatSpace
    cfg: SomConfig
    user_model: UserClusterModel

    def recommend(self, user: str, n: int) -> list[tuple[str, float]]:
        if user not in self.space.matrix:
            raise UnknownUser(f"unknown user {user!r}")
        return rank_items(predict_scores(self.user_model, self.space, user), n)

    def recommend_key(self, key: str, n: int) -> list[str]:
        return [item for item, _ in self.recommend(key, n)]

    def eval_user_pool(self) -> list[str]:
        return list(self.space.users)

    def eval_units(
        self, user: str, test: RatingCube, threshold: int
    ) -> list[tuple[str, set[str]]]:
        """One unit per user: relevant items pooled over all situations."""
        relevant = {
            item
            for item_ratings in test.user_ratings(user).values()
            for item, rating in item_ratings.items()
            if rating >= threshold
        }
        return [(user, relevant)] if relevant else []


def fit_baseline(cube: RatingCube, cfg: SomConfig | None = None) -> BaselineModel:
    if cfg is None:
        cfg = SomConfig(DEFAULT_BASELINE_NEURONS)
    space = flatten_cube(cube)
    user_model = cluster_virtual_users(space, cfg)
    return BaselineModel(cube.schema, space, cfg, user_model)


def baseline_recommend(
    flat: FlatSpace, cfg: SomConfig, user: str, n: int
) -> list[tuple[str, float]]:
    """Fit on the flat space and recommend in one call."""
    user_model = cluster_virtual_users(flat, cfg)
    if user not in flat.matrix:
        raise UnknownUser(f"unknown user {user!r}")
    return rank_items(predict_scores(user_model, flat, user), n)


def save_baseline(model: BaselineModel, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_schema(model.schema, directory / "schema.json")
    jsonio.write_json(directory / "flat_space.json", model.space.to_json_dict())
    jsonio.write_json(directory / "user_som.json", som_to_json_dict(model.user_model.som))


def load_baseline(directory: str | Path) -> BaselineModel:
    directory = Path(directory)
    schema = load_schema(directory / "schema.json")
    space = FlatSpace.from_json_dict(jsonio.read_json(directory / "flat_space.json"))
    net = som_from_json_dict(jsonio.read_json(directory / "user_som.json"))
    membership = dict(zip(space.keys, assign(net, list(space.dense_matrix()))))
    return BaselineModel(schema, space, net.config, UserClusterModel(net, membership))
