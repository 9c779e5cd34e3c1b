"""Context schema and sparse rating-cube data model.

A :class:`ContextSchema` fixes the contextual dimensions and their value
lists; one concrete value tuple is a :class:`ContextSituation`, addressed by
a mixed-radix ``flat_index`` (last dimension varies fastest).  Ratings live
in a :class:`RatingCube`, a sparse map from ``(user, situation, item)`` to an
integer rating.  Both structures are immutable after construction and safe
for concurrent reads.

Inside vectors, 0 always means "unrated"; legal ratings start at 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateCell,
    InvalidConfig,
    MalformedRow,
    RatingOutOfRange,
    UnknownContextValue,
    UnknownUser,
)
from . import jsonio


@dataclass(frozen=True)
class ContextDimension:
    """One contextual dimension: a name plus its ordered value list."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.name:
            raise InvalidConfig("dimension name must be non-empty")
        if not self.values:
            raise InvalidConfig(f"dimension {self.name!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise InvalidConfig(f"dimension {self.name!r} has duplicate values")

    @property
    def cardinality(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ContextSituation:
    """One concrete context: a value index per dimension plus its flat index."""

    values: tuple[int, ...]
    flat_index: int


@dataclass(frozen=True)
class ContextSchema:
    """Ordered contextual dimensions plus the legal rating range."""

    dimensions: tuple[ContextDimension, ...]
    rating_min: int = 1
    rating_max: int = 5

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise InvalidConfig("schema needs at least one dimension")
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise InvalidConfig("dimension names must be unique")
        if self.rating_min < 1:
            raise InvalidConfig("rating_min must be >= 1 (0 encodes 'unrated')")
        if self.rating_max < self.rating_min:
            raise InvalidConfig("rating_max must be >= rating_min")
        object.__setattr__(
            self,
            "_value_index",
            tuple({v: i for i, v in enumerate(d.values)} for d in self.dimensions),
        )

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(d.cardinality for d in self.dimensions)

    @property
    def situation_count(self) -> int:
        count = 1
        for d in self.dimensions:
            count *= d.cardinality
        return count

    def encode(self, indices: Sequence[int]) -> int:
        """Mixed-radix encoding of value indices; last dimension fastest."""
        if len(indices) != len(self.dimensions):
            raise InvalidConfig(
                f"expected {len(self.dimensions)} indices, got {len(indices)}"
            )
        flat = 0
        for idx, dim in zip(indices, self.dimensions):
            if not 0 <= idx < dim.cardinality:
                raise UnknownContextValue(
                    f"index {idx} out of range for dimension {dim.name!r}"
                )
            flat = flat * dim.cardinality + idx
        return flat

    def decode(self, flat_index: int) -> tuple[int, ...]:
        if not 0 <= flat_index < self.situation_count:
            raise InvalidConfig(f"flat index {flat_index} out of range")
        indices = [0] * len(self.dimensions)
        rest = flat_index
        for pos in range(len(self.dimensions) - 1, -1, -1):
            k = self.dimensions[pos].cardinality
            indices[pos] = rest % k
            rest //= k
        return tuple(indices)

    def situation_from_indices(self, indices: Sequence[int]) -> ContextSituation:
        return ContextSituation(tuple(indices), self.encode(indices))

    def situation_from_flat(self, flat_index: int) -> ContextSituation:
        return ContextSituation(self.decode(flat_index), flat_index)

    def situation_from_names(self, names: Sequence[str]) -> ContextSituation:
        """Build a situation from one value name per dimension."""
        if len(names) != len(self.dimensions):
            raise InvalidConfig(
                f"expected {len(self.dimensions)} values, got {len(names)}"
            )
        indices = []
        for name, dim, lookup in zip(names, self.dimensions, self._value_index):
            if name not in lookup:
                raise UnknownContextValue(
                    f"value {name!r} not in dimension {dim.name!r} "
                    f"(expected one of {', '.join(dim.values)})"
                )
            indices.append(lookup[name])
        return self.situation_from_indices(indices)

    def value_names(self, situation: ContextSituation) -> tuple[str, ...]:
        return tuple(
            d.values[i] for d, i in zip(self.dimensions, situation.values)
        )

    def to_json_dict(self) -> dict:
        return {
            "dimensions": [
                {"name": d.name, "values": list(d.values)} for d in self.dimensions
            ],
            "rating_min": self.rating_min,
            "rating_max": self.rating_max,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "ContextSchema":
        dims = tuple(
            ContextDimension(d["name"], tuple(d["values"]))
            for d in data["dimensions"]
        )
        return cls(dims, int(data["rating_min"]), int(data["rating_max"]))


def default_schema() -> ContextSchema:
    """The built-in restaurant schema: 2 x 4 x 6 x 7 = 336 situations."""
    return ContextSchema(
        (
            ContextDimension("day", ("Weekday", "Weekend")),
            ContextDimension("time", ("Morning", "Noon", "Afternoon", "Night")),
            ContextDimension(
                "companion",
                ("Spouse", "Family", "Friends", "Co-workers", "Alone", "Others"),
            ),
            ContextDimension(
                "weather",
                (
                    "Cold/Sunny",
                    "Cold/Rainy",
                    "Moderate/Sunny",
                    "Moderate/Rainy",
                    "Hot/Sunny",
                    "Hot/Rainy",
                    "Others",
                ),
            ),
        )
    )


def enumerate_situations(schema: ContextSchema) -> list[ContextSituation]:
    """All situations of the schema in flat-index order."""
    return [schema.situation_from_flat(i) for i in range(schema.situation_count)]


def save_schema(schema: ContextSchema, path: str | Path) -> None:
    jsonio.write_json(path, schema.to_json_dict())


def load_schema(path: str | Path) -> ContextSchema:
    return ContextSchema.from_json_dict(jsonio.read_json(path))


@dataclass(frozen=True)
class RatingRecord:
    """One rating event: user rated item in a concrete context situation."""

    user_id: str
    item_id: str
    situation: ContextSituation
    rating: int


class RatingCube:
    """Sparse multidimensional ratings: (user, situation, item) -> rating.

    ``users`` and ``items`` fix the id universes (and the vector length
    ``p = len(items)``); cells may cover any subset of them.  Instances are
    immutable; all iteration is in canonical sorted order so downstream
    computations are reproducible.
    """

    def __init__(
        self,
        schema: ContextSchema,
        users: Sequence[str],
        items: Sequence[str],
        cells: Mapping[tuple[str, int, str], int],
    ):
        self.schema = schema
        self.users = tuple(users)
        self.items = tuple(items)
        self._user_set = set(self.users)
        self._item_index = {item: i for i, item in enumerate(self.items)}
        if len(self._user_set) != len(self.users):
            raise InvalidConfig("duplicate user ids")
        if len(self._item_index) != len(self.items):
            raise InvalidConfig("duplicate item ids")
        by_user: dict[str, dict[int, dict[str, int]]] = {}
        for (user, flat, item) in sorted(cells):
            rating = cells[(user, flat, item)]
            if user not in self._user_set:
                raise UnknownUser(f"cell user {user!r} not in user list")
            if item not in self._item_index:
                raise InvalidConfig(f"cell item {item!r} not in item list")
            if not 0 <= flat < schema.situation_count:
                raise InvalidConfig(f"cell situation {flat} out of range")
            if not schema.rating_min <= rating <= schema.rating_max:
                raise RatingOutOfRange(
                    f"rating {rating} outside "
                    f"[{schema.rating_min}, {schema.rating_max}]"
                )
            by_user.setdefault(user, {}).setdefault(flat, {})[item] = rating
        self._by_user = by_user
        self._n_ratings = sum(
            len(items_) for flats in by_user.values() for items_ in flats.values()
        )

    @classmethod
    def from_records(
        cls,
        schema: ContextSchema,
        records: Iterable[RatingRecord],
        users: Sequence[str] | None = None,
        items: Sequence[str] | None = None,
    ) -> "RatingCube":
        """Build a cube; id universes default to the sorted ids seen."""
        cells: dict[tuple[str, int, str], int] = {}
        seen_users, seen_items = set(), set()
        for rec in records:
            key = (rec.user_id, rec.situation.flat_index, rec.item_id)
            if key in cells:
                raise DuplicateCell(
                    f"duplicate rating for user {rec.user_id!r}, "
                    f"item {rec.item_id!r}, situation {rec.situation.flat_index}"
                )
            cells[key] = rec.rating
            seen_users.add(rec.user_id)
            seen_items.add(rec.item_id)
        return cls(
            schema,
            sorted(seen_users) if users is None else users,
            sorted(seen_items) if items is None else items,
            cells,
        )

    @property
    def p(self) -> int:
        """Number of items (pattern-vector length)."""
        return len(self.items)

    @property
    def n_ratings(self) -> int:
        return self._n_ratings

    @property
    def item_index(self) -> Mapping[str, int]:
        return self._item_index

    def records(self) -> Iterator[RatingRecord]:
        """All ratings in canonical (user, situation, item) order."""
        for user in sorted(self._by_user):
            for flat in sorted(self._by_user[user]):
                situation = self.schema.situation_from_flat(flat)
                for item in sorted(self._by_user[user][flat]):
                    yield RatingRecord(
                        user, item, situation, self._by_user[user][flat][item]
                    )

    def cells(self) -> dict[tuple[str, int, str], int]:
        return {
            (r.user_id, r.situation.flat_index, r.item_id): r.rating
            for r in self.records()
        }

    def user_ratings(self, user: str) -> dict[int, dict[str, int]]:
        """Ratings of one user grouped by situation flat index ({} if none)."""
        return self._by_user.get(user, {})

    def has_user(self, user: str) -> bool:
        return user in self._user_set

    def usage_pattern_vectors(
        self, user: str
    ) -> list[tuple[ContextSituation, np.ndarray]]:
        """One length-p vector per situation in which the user rated anything.

        Component ``i`` is the rating of item ``i`` in that situation, 0 when
        unrated.  Situations without ratings are skipped (an all-zero vector
        has no usable cosine direction).
        """
        if user not in self._user_set:
            raise UnknownUser(f"unknown user {user!r}")
        out = []
        for flat in sorted(self._by_user.get(user, {})):
            vec = np.zeros(self.p, dtype=np.float64)
            for item, rating in self._by_user[user][flat].items():
                vec[self._item_index[item]] = float(rating)
            out.append((self.schema.situation_from_flat(flat), vec))
        return out

    def with_cells(
        self, cells: Mapping[tuple[str, int, str], int]
    ) -> "RatingCube":
        """New cube over the same schema and id universes (used by splits)."""
        return RatingCube(self.schema, self.users, self.items, cells)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatingCube):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.users == other.users
            and self.items == other.items
            and self._by_user == other._by_user
        )

    def __repr__(self) -> str:
        return (
            f"RatingCube(users={len(self.users)}, items={len(self.items)}, "
            f"ratings={self.n_ratings})"
        )


def vector_from_ratings(
    ratings: Mapping[str, float], item_index: Mapping[str, int], p: int
) -> np.ndarray:
    """Dense length-p vector from an item->rating map, 0 where unrated."""
    vec = np.zeros(p, dtype=np.float64)
    for item, value in ratings.items():
        vec[item_index[item]] = float(value)
    return vec


def _expected_header(schema: ContextSchema) -> list[str]:
    return ["user_id", "item_id"] + [d.name for d in schema.dimensions] + ["rating"]


def load_ratings(source: str | Path | IO[str], schema: ContextSchema) -> RatingCube:
    """Parse a ratings CSV into a cube.

    The header must be exactly ``user_id,item_id,<dimension names...>,rating``
    (``user_id,item_id,day,time,companion,weather,rating`` for the default
    schema).  User and item id lists are the sorted ids seen in the file.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_ratings(handle, schema)
    reader = csv.reader(source)
    expected = _expected_header(schema)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow("empty ratings file: missing header") from None
    if header != expected:
        raise MalformedRow(
            f"bad header {','.join(header)!r}; expected {','.join(expected)!r}"
        )
    n_dims = len(schema.dimensions)
    records = []
    seen: set[tuple[str, int, str]] = set()
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(expected):
            raise MalformedRow(
                f"line {line_no}: expected {len(expected)} fields, got {len(row)}"
            )
        user_id, item_id = row[0], row[1]
        if not user_id or not item_id:
            raise MalformedRow(f"line {line_no}: empty user or item id")
        try:
            situation = schema.situation_from_names(row[2 : 2 + n_dims])
        except UnknownContextValue as exc:
            raise UnknownContextValue(f"line {line_no}: {exc}") from None
        try:
            rating = int(row[2 + n_dims])
        except ValueError:
            raise MalformedRow(
                f"line {line_no}: rating {row[2 + n_dims]!r} is not an integer"
            ) from None
        if not schema.rating_min <= rating <= schema.rating_max:
            raise RatingOutOfRange(
                f"line {line_no}: rating {rating} outside "
                f"[{schema.rating_min}, {schema.rating_max}]"
            )
        key = (user_id, situation.flat_index, item_id)
        if key in seen:
            raise DuplicateCell(
                f"line {line_no}: duplicate rating for user {user_id!r}, "
                f"item {item_id!r}, situation {situation.flat_index}"
            )
        seen.add(key)
        records.append(RatingRecord(user_id, item_id, situation, rating))
    return RatingCube.from_records(schema, records)


def write_ratings(cube: RatingCube, target: str | Path | IO[str]) -> None:
    """Write a cube as CSV in canonical order (byte-stable for equal cubes)."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as handle:
            write_ratings(cube, handle)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(_expected_header(cube.schema))
    for rec in cube.records():
        writer.writerow(
            [rec.user_id, rec.item_id]
            + list(cube.schema.value_names(rec.situation))
            + [rec.rating]
        )


def ratings_csv_text(cube: RatingCube) -> str:
    buf = io.StringIO()
    write_ratings(cube, buf)
    return buf.getvalue()
