"""Categorical tabular data: schemas, CSV round-trips and seeded resampling."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyDatasetError,
    EmptyHeaderError,
    RaggedRowError,
    SchemaMismatchError,
    UnknownStateError,
)
from .rng import fill_uint64


@dataclass(frozen=True)
class Schema:
    """Per-variable name and ordered state labels.

    State index = position in the state list; this coding is the contract for
    every dataset sharing the schema.
    """

    names: tuple[str, ...]
    states: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.names) != len(self.states):
            raise ValueError("names and states must align")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")
        for name, st in zip(self.names, self.states):
            if len(st) < 1:
                raise ValueError(f"variable {name!r} has no states")
            if len(set(st)) != len(st):
                raise ValueError(f"variable {name!r} has duplicate state labels")

    @classmethod
    def of(cls, variables: Iterable[tuple[str, Sequence[str]]]) -> "Schema":
        pairs = list(variables)
        return cls(tuple(n for n, _ in pairs), tuple(tuple(s) for _, s in pairs))

    @property
    def variable_count(self) -> int:
        return len(self.names)

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    def index(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def cardinality(self, i: int) -> int:
        return len(self.states[i])

    def cardinalities(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.states)

    def state_code(self, i: int, label: str) -> int:
        try:
            return self.states[i].index(label)
        except ValueError:
            raise UnknownStateError(
                f"state {label!r} not declared for variable {self.names[i]!r}"
            ) from None

    def restrict(self, names: Sequence[str]) -> "Schema":
        """Sub-schema over the given variables, in the given order."""
        idx = [self.index(n) for n in names]
        return Schema(tuple(self.names[i] for i in idx), tuple(self.states[i] for i in idx))


class CategoricalDataset:
    """Integer-coded rows under a fixed schema; immutable after construction."""

    __slots__ = ("schema", "rows")

    def __init__(self, schema: Schema, rows: np.ndarray):
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != schema.variable_count:
            if rows.size == 0:
                rows = rows.reshape(0, schema.variable_count)
            else:
                raise ValueError(
                    f"rows shape {rows.shape} does not match {schema.variable_count} variables"
                )
        for i, card in enumerate(schema.cardinalities()):
            col = rows[:, i]
            if col.size and (col.min() < 0 or col.max() >= card):
                raise ValueError(f"codes out of range for variable {schema.names[i]!r}")
        self.schema = schema
        rows = np.ascontiguousarray(rows)
        rows.setflags(write=False)
        self.rows = rows

    @property
    def row_count(self) -> int:
        return self.rows.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.schema.index(name)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CategoricalDataset):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.rows, other.rows)

    def __repr__(self) -> str:
        return f"CategoricalDataset({self.row_count} rows, {self.schema.variable_count} variables)"


def read_csv(text: str, schema_mode: Schema | str = "infer") -> CategoricalDataset:
    """Parse comma-separated values into coded rows.

    ``schema_mode`` is either the string ``"infer"`` (states become the
    lexicographically sorted distinct values per column) or an explicit
    :class:`Schema` whose variables must cover the header; unseen values then
    raise :class:`UnknownStateError`.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise EmptyHeaderError("no header row")
    header = [h.strip() for h in lines[0].split(",")]
    if any(h == "" for h in header):
        raise EmptyHeaderError("empty variable name in header")
    raw_rows = []
    for ln in lines[1:]:
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != len(header):
            raise RaggedRowError(
                f"row has {len(cells)} cells, header has {len(header)}: {ln!r}"
            )
        raw_rows.append(cells)

    if isinstance(schema_mode, Schema):
        try:
            schema = schema_mode.restrict(header)
        except KeyError as exc:
            raise SchemaMismatchError(str(exc)) from None
    elif schema_mode == "infer":
        columns = list(zip(*raw_rows)) if raw_rows else [()] * len(header)
        states = tuple(tuple(sorted(set(col))) for col in columns)
        schema = Schema(tuple(header), states)
    else:
        raise ValueError(f"schema_mode must be 'infer' or a Schema, got {schema_mode!r}")

    rows = np.empty((len(raw_rows), len(header)), dtype=np.int64)
    for r, cells in enumerate(raw_rows):
        for i, cell in enumerate(cells):
            rows[r, i] = schema.state_code(i, cell)
    return CategoricalDataset(schema, rows)


def write_csv(data: CategoricalDataset) -> str:
    """Deterministic CSV text in schema variable order."""
    schema = data.schema
    lines = [",".join(schema.names)]
    states = schema.states
    for row in data.rows:
        lines.append(",".join(states[i][row[i]] for i in range(len(states))))
    return "\n".join(lines) + "\n"


def resample(data: CategoricalDataset, seed: int) -> CategoricalDataset:
    """Rows drawn i.i.d. uniformly with replacement, same size and schema.

    Draw i uses splitmix64 output i modulo the row count, so the resample is
    a pure function of (data, seed).
    """
    n = data.row_count
    if n < 1:
        raise EmptyDatasetError("cannot resample an empty dataset")
    draws = fill_uint64(seed, n) % np.uint64(n)
    return CategoricalDataset(data.schema, data.rows[draws.astype(np.int64)])
