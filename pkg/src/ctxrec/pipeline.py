"""The three-phase context-aware recommendation pipeline.

Phase 1 clusters each user's context situations by usage pattern with a
per-user SOM (labels compacted to 1..m).  Phase 2 collapses the rating cube
into a 2-D virtual-user space: each (user, label) pair becomes one virtual
user whose item ratings are the averages of the originals inside that
cluster.  Phase 3 clusters the virtual users with one more SOM and predicts
scores with a similarity-weighted within-cluster mean, falling back to the
neuron prototype when no clustered peer has rated an item.

The same phase-3 machinery is reused verbatim by the flat baseline, so the
two systems differ only in how the 2-D space is built.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import (
    ContextSchema,
    ContextSituation,
    RatingCube,
    load_schema,
    save_schema,
    vector_from_ratings,
)
from .errors import (
    EmptyList,
    EmptySpace,
    InvalidConfig,
    MissingClustering,
    NoRatings,
    NoVirtualUsers,
    UnknownUser,
    UnknownVirtualUser,
)
from .rng import derive_seed
from .som import SomConfig, SomNetwork, assign, cosine_similarity, train
from .som import som_from_json_dict, som_to_json_dict
from . import jsonio

DEFAULT_PHASE1_NEURONS = 6
DEFAULT_PHASE3_NEURONS = 21

VirtualUserId = tuple[str, int]


def aggregate(values: Sequence[float]) -> float:
    """Arithmetic mean of rating values (the built-in aggregator)."""
    if len(values) == 0:
        raise EmptyList("cannot aggregate zero ratings")
    return sum(float(v) for v in values) / len(values)


@dataclass(frozen=True)
class ContextClustering:
    """Phase-1 result for one user: situation flat index -> label in 1..m."""

    user_id: str
    labels: Mapping[int, int]
    m: int

    def __post_init__(self):
        used = set(self.labels.values())
        if self.labels and used != set(range(1, self.m + 1)):
            raise InvalidConfig(
                f"labels for user {self.user_id!r} are not compacted to 1..{self.m}"
            )


def cluster_user_contexts(
    cube: RatingCube, user: str, cfg: SomConfig | None = None
) -> ContextClustering:
    """Cluster one user's rated situations by usage pattern.

    The SOM seed is derived from ``cfg.seed`` and the user id, so per-user
    networks are independent of the order users are processed in.
    """
    if cfg is None:
        cfg = SomConfig(DEFAULT_PHASE1_NEURONS)
    pairs = cube.usage_pattern_vectors(user)  # raises UnknownUser
    if not pairs:
        raise NoRatings(f"user {user!r} has no ratings")
    vectors = [vec for _, vec in pairs]
    per_user_cfg = replace(cfg, seed=derive_seed(cfg.seed, "phase1", user))
    net = train(vectors, per_user_cfg)
    raw = assign(net, vectors)
    occupied = sorted(set(raw))
    label_of = {neuron: i + 1 for i, neuron in enumerate(occupied)}
    labels = {
        situation.flat_index: label_of[neuron]
        for (situation, _), neuron in zip(pairs, raw)
    }
    return ContextClustering(user, labels, len(occupied))


class VirtualUserSpace:
    """The collapsed 2-D space: virtual users (user, label) x items."""

    def __init__(
        self,
        virtual_users: Sequence[VirtualUserId],
        items: Sequence[str],
        matrix: Mapping[VirtualUserId, Mapping[str, float]],
    ):
        self.virtual_users = tuple(virtual_users)
        self.items = tuple(items)
        self.matrix = {vu: dict(matrix[vu]) for vu in self.virtual_users}
        self._item_index = {item: i for i, item in enumerate(self.items)}
        self._dense: np.ndarray | None = None

    @property
    def keys(self) -> tuple[VirtualUserId, ...]:
        return self.virtual_users

    @property
    def item_index(self) -> Mapping[str, int]:
        return self._item_index

    def ratings_of(self, key: VirtualUserId) -> Mapping[str, float]:
        try:
            return self.matrix[key]
        except KeyError:
            raise UnknownVirtualUser(f"unknown virtual user {key!r}") from None

    def vector(self, key: VirtualUserId) -> np.ndarray:
        return vector_from_ratings(
            self.ratings_of(key), self._item_index, len(self.items)
        )

    def dense_matrix(self) -> np.ndarray:
        """Row per virtual user in key order; cached."""
        if self._dense is None:
            self._dense = np.asarray(
                [self.vector(vu) for vu in self.virtual_users], dtype=np.float64
            )
            self._dense.setflags(write=False)
        return self._dense

    def of_user(self, user: str) -> list[VirtualUserId]:
        return [vu for vu in self.virtual_users if vu[0] == user]

    def to_json_dict(self) -> dict:
        return {
            "items": list(self.items),
            "rows": [
                {"user": user, "label": label, "ratings": self.matrix[(user, label)]}
                for user, label in self.virtual_users
            ],
        }

    @classmethod
    def from_json_dict(cls, data) -> "VirtualUserSpace":
        keys = [(row["user"], int(row["label"])) for row in data["rows"]]
        matrix = {
            (row["user"], int(row["label"])): {
                item: float(v) for item, v in row["ratings"].items()
            }
            for row in data["rows"]
        }
        return cls(keys, tuple(data["items"]), matrix)


def build_virtual_space(
    cube: RatingCube, clusterings: Mapping[str, ContextClustering]
) -> VirtualUserSpace:
    """Phase 2: average each user's ratings per (item, cluster label).

    Every user with ratings must appear in ``clusterings``; every rating
    contributes to exactly one virtual-user cell.
    """
    keys: list[VirtualUserId] = []
    matrix: dict[VirtualUserId, dict[str, float]] = {}
    for user in sorted(set(u for u in cube.users if cube.user_ratings(u))):
        clustering = clusterings.get(user)
        if clustering is None:
            raise MissingClustering(f"no clustering for user {user!r}")
        per_label: dict[int, dict[str, list[int]]] = {}
        for flat in sorted(cube.user_ratings(user)):
            label = clustering.labels[flat]
            bucket = per_label.setdefault(label, {})
            for item in sorted(cube.user_ratings(user)[flat]):
                bucket.setdefault(item, []).append(cube.user_ratings(user)[flat][item])
        for label in sorted(per_label):
            key = (user, label)
            keys.append(key)
            matrix[key] = {
                item: aggregate(values) for item, values in per_label[label].items()
            }
    return VirtualUserSpace(keys, cube.items, matrix)


@dataclass
class UserClusterModel:
    """Phase-3 SOM over a 2-D space plus the row -> neuron membership."""

    som: SomNetwork
    membership: dict


def cluster_virtual_users(
    space, cfg: SomConfig | None = None
) -> UserClusterModel:
    """Cluster the rows of a 2-D space (virtual users or plain users)."""
    if cfg is None:
        cfg = SomConfig(DEFAULT_PHASE3_NEURONS)
    if not space.keys:
        raise EmptySpace("no rows to cluster")
    inputs = space.dense_matrix()
    net = train(list(inputs), cfg)
    membership = dict(zip(space.keys, assign(net, list(inputs))))
    return UserClusterModel(net, membership)


def weighted_mean(sims: Sequence[float], values: Sequence[float]) -> float:
    """Similarity-weighted mean: sum(s*v) / sum(s)."""
    num = 0.0
    den = 0.0
    for s, v in zip(sims, values):
        num += s * v
        den += s
    if den <= 0.0:
        raise ZeroDivisionError("total similarity weight is zero")
    return num / den


def predict_scores(model: UserClusterModel, space, key) -> dict[str, float]:
    """Predicted score per unrated item for one row of the space.

    Peers are the other rows on the same neuron; each item's score is the
    cosine-similarity-weighted mean of the peers that rated it.  When no
    peer rated the item (or total similarity is zero), the neuron's weight
    component stands in.  Items the row already rated are excluded.
    """
    own = space.ratings_of(key)  # raises for unknown keys
    neuron = model.membership[key]
    prototype = model.som.weights[neuron]
    own_vec = space.vector(key)
    peer_keys = [k for k in space.keys if k != key and model.membership[k] == neuron]
    if peer_keys:
        dense = space.dense_matrix()
        index_of = {k: i for i, k in enumerate(space.keys)}
        peer_rows = dense[[index_of[k] for k in peer_keys]]
        sims = np.asarray(
            [cosine_similarity(own_vec, row) for row in peer_rows], dtype=np.float64
        )
        rated = peer_rows > 0.0
        num = sims @ np.where(rated, peer_rows, 0.0)
        den = sims @ rated
        with np.errstate(invalid="ignore"):
            scored = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), prototype)
    else:
        scored = np.asarray(prototype, dtype=np.float64)
    return {
        item: float(scored[i])
        for i, item in enumerate(space.items)
        if item not in own
    }


def rank_items(scores: Mapping[str, float], n: int) -> list[tuple[str, float]]:
    """Top-n by descending score; ties broken by ascending item id."""
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[: max(n, 0)]


def recommend(
    model: UserClusterModel,
    space: VirtualUserSpace,
    clusterings: Mapping[str, ContextClustering],
    user: str,
    online_context: ContextSituation,
    n: int,
) -> list[tuple[str, float]]:
    """Top-n items for ``user`` in a live context.

    The online situation is routed to the cluster label it received in
    phase 1.  A situation the user never rated in (hence unlabeled) falls
    back to the user's virtual user with the most rated items (ties to the
    smallest label).  Items the chosen virtual user rated in training are
    never returned.
    """
    clustering = clusterings.get(user)
    if clustering is None:
        raise UnknownUser(f"no clustering for user {user!r}")
    label = clustering.labels.get(online_context.flat_index)
    if label is None:
        candidates = space.of_user(user)
        if not candidates:
            raise NoVirtualUsers(f"user {user!r} has no virtual users")
        label = max(candidates, key=lambda vu: (len(space.ratings_of(vu)), -vu[1]))[1]
    return rank_items(predict_scores(model, space, (user, label)), n)


@dataclass
class PipelineModel:
    """A fully trained three-phase recommender."""

    schema: ContextSchema
    phase1_cfg: SomConfig
    phase3_cfg: SomConfig
    clusterings: dict[str, ContextClustering]
    space: VirtualUserSpace
    user_model: UserClusterModel

    def recommend(
        self, user: str, online_context: ContextSituation, n: int
    ) -> list[tuple[str, float]]:
        return recommend(
            self.user_model, self.space, self.clusterings, user, online_context, n
        )

    def recommend_key(self, key: VirtualUserId, n: int) -> list[str]:
        """Ranked item ids for one virtual user (evaluation surface)."""
        return [item for item, _ in rank_items(predict_scores(self.user_model, self.space, key), n)]

    def eval_user_pool(self) -> list[str]:
        return sorted(self.clusterings)

    def eval_units(
        self, user: str, test: RatingCube, threshold: int
    ) -> list[tuple[VirtualUserId, set[str]]]:
        """Evaluation units for one user: (virtual user, relevant test items).

        A test rating counts toward the virtual user whose label its
        situation received in phase 1; test ratings in unlabeled situations
        have no virtual user and are left out.  Units with no items at or
        above the threshold are dropped.  Ordered by ascending label.
        """
        clustering = self.clusterings.get(user)
        if clustering is None:
            raise UnknownUser(f"no clustering for user {user!r}")
        relevant: dict[int, set[str]] = {}
        for flat, item_ratings in test.user_ratings(user).items():
            label = clustering.labels.get(flat)
            if label is None:
                continue
            for item, rating in item_ratings.items():
                if rating >= threshold:
                    relevant.setdefault(label, set()).add(item)
        return [((user, label), relevant[label]) for label in sorted(relevant)]


_worker_cube: RatingCube | None = None
_worker_cfg: SomConfig | None = None


def _phase1_init(cube: RatingCube, cfg: SomConfig) -> None:
    global _worker_cube, _worker_cfg
    _worker_cube = cube
    _worker_cfg = cfg


def _phase1_job(user: str) -> tuple[str, ContextClustering]:
    return user, cluster_user_contexts(_worker_cube, user, _worker_cfg)


def fit_pipeline(
    train_cube: RatingCube,
    phase1_cfg: SomConfig | None = None,
    phase3_cfg: SomConfig | None = None,
    workers: int = 1,
) -> PipelineModel:
    """Run phases 1-3 on a training cube.

    ``workers`` > 1 spreads the per-user phase-1 clustering over processes;
    every user's SOM seed is derived from the user id, so the result is
    identical regardless of worker count or scheduling.
    """
    if phase1_cfg is None:
        phase1_cfg = SomConfig(DEFAULT_PHASE1_NEURONS)
    if phase3_cfg is None:
        phase3_cfg = SomConfig(DEFAULT_PHASE3_NEURONS)
    users = [u for u in sorted(train_cube.users) if train_cube.user_ratings(u)]
    if not users:
        raise EmptySpace("training cube has no ratings")
    if workers > 1 and len(users) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_phase1_init,
            initargs=(train_cube, phase1_cfg),
        ) as pool:
            chunk = max(1, len(users) // (workers * 4))
            clusterings = dict(pool.map(_phase1_job, users, chunksize=chunk))
    else:
        clusterings = {
            user: cluster_user_contexts(train_cube, user, phase1_cfg) for user in users
        }
    space = build_virtual_space(train_cube, clusterings)
    user_model = cluster_virtual_users(space, phase3_cfg)
    return PipelineModel(
        train_cube.schema, phase1_cfg, phase3_cfg, clusterings, space, user_model
    )


def save_pipeline(model: PipelineModel, directory: str | Path) -> None:
    """Persist a pipeline bundle: schema, clusterings, space, user SOM."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_schema(model.schema, directory / "schema.json")
    jsonio.write_json(
        directory / "clusterings.json",
        {
            "phase1_config": model.phase1_cfg.to_json_dict(),
            "users": {
                user: {
                    "m": c.m,
                    "labels": {str(flat): label for flat, label in sorted(c.labels.items())},
                }
                for user, c in sorted(model.clusterings.items())
            },
        },
    )
    jsonio.write_json(directory / "virtual_space.json", model.space.to_json_dict())
    jsonio.write_json(directory / "user_som.json", som_to_json_dict(model.user_model.som))


def load_pipeline(directory: str | Path) -> PipelineModel:
    """Load a pipeline bundle; membership is recomputed from the stored SOM."""
    directory = Path(directory)
    schema = load_schema(directory / "schema.json")
    cdata = jsonio.read_json(directory / "clusterings.json")
    phase1_cfg = SomConfig.from_json_dict(cdata["phase1_config"])
    clusterings = {
        user: ContextClustering(
            user,
            {int(flat): int(label) for flat, label in entry["labels"].items()},
            int(entry["m"]),
        )
        for user, entry in cdata["users"].items()
    }
    space = VirtualUserSpace.from_json_dict(
        jsonio.read_json(directory / "virtual_space.json")
    )
    net = som_from_json_dict(jsonio.read_json(directory / "user_som.json"))
    membership = dict(zip(space.keys, assign(net, list(space.dense_matrix()))))
    return PipelineModel(
        schema,
        phase1_cfg,
        net.config,
        clusterings,
        space,
        UserClusterModel(net, membership),
    )
