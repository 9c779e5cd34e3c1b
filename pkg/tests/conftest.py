"""Shared fixtures: tiny schemas and hand-built rating cubes."""

import pytest

from ctxrec.core import (
    ContextDimension,
    ContextSchema,
    RatingCube,
    RatingRecord,
    default_schema,
)


def tiny_schema() -> ContextSchema:
    """2x2 schema {a,b} x {x,y}: four situations, flat order ax,ay,bx,by."""
    return ContextSchema(
        (
            ContextDimension("d1", ("a", "b")),
            ContextDimension("d2", ("x", "y")),
        )
    )


def make_cube(schema, rows, users=None, items=None) -> RatingCube:
    """Build a cube from (user, item, value-names, rating) tuples."""
    records = [
        RatingRecord(user, item, schema.situation_from_names(names), rating)
        for user, item, names, rating in rows
    ]
    return RatingCube.from_records(schema, records, users=users, items=items)


@pytest.fixture
def schema2x2():
    return tiny_schema()


@pytest.fixture
def restaurant_schema():
    return default_schema()
