"""Decomposable BIC scoring of DAGs against categorical data.

Natural logarithms throughout.  The per-vertex penalty counts every schema
parent configuration, observed or not, so the penalty agrees with the
model's free-parameter count.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np

from .dataset import CategoricalDataset
from .errors import EmptyDatasetError, SchemaMismatchError
from .graph import Dag
from .model import DiscreteBn

# Above this table size contingency counts fall back to sparse code counting.
_DENSE_LIMIT = 1 << 20


def _entropy_sum(counts: np.ndarray) -> float:
    positive = counts[counts > 0]
    return float(np.sum(positive * np.log(positive)))


def local_log_likelihood(data: CategoricalDataset, target: str, parents: Iterable[str]) -> float:
    """Maximized log-likelihood contribution of one vertex.

    Sum over observed (x, config) cells of N(x,config) * ln(N(x,config) /
    N(config)), with 0 ln 0 = 0.
    """
    schema = data.schema
    try:
        x_col = schema.index(target)
        parent_cols = [schema.index(p) for p in sorted(parents)]
    except KeyError as exc:
        raise SchemaMismatchError(str(exc)) from None
    if target in parents:
        raise ValueError(f"target {target!r} cannot be its own parent")
    rows = data.rows
    if rows.shape[0] == 0:
        return 0.0
    r = schema.cardinality(x_col)
    q = math.prod(schema.cardinality(c) for c in parent_cols)

    code = rows[:, x_col].astype(np.int64)
    stride = r
    for c in reversed(parent_cols):
        code = code + rows[:, c].astype(np.int64) * stride
        stride *= schema.cardinality(c)

    if q * r <= _DENSE_LIMIT:
        joint = np.bincount(code, minlength=q * r).reshape(q, r)
        config_totals = joint.sum(axis=1)
        return _entropy_sum(joint) - _entropy_sum(config_totals)
    codes, counts = np.unique(code, return_counts=True)
    _, inverse = np.unique(codes // r, return_inverse=True)
    config_totals = np.bincount(inverse, weights=counts)
    return _entropy_sum(counts.astype(np.float64)) - _entropy_sum(config_totals)


def local_bic(
    data: CategoricalDataset,
    target: str,
    parents: Iterable[str],
    cache: Optional["ScoreCache"] = None,
) -> float:
    """local_log_likelihood minus 0.5 * (r - 1) * q * ln(rows); higher is better."""
    n = data.row_count
    if n < 1:
        raise EmptyDatasetError("BIC needs at least one row")
    parents = tuple(sorted(parents))
    if cache is not None:
        return cache.get(target, parents)
    schema = data.schema
    try:
        r = schema.cardinality(schema.index(target))
        q = math.prod(schema.cardinality(schema.index(p)) for p in parents)
    except KeyError as exc:
        raise SchemaMismatchError(str(exc)) from None
    penalty = 0.5 * (r - 1) * q * math.log(n)
    return local_log_likelihood(data, target, parents) - penalty


class ScoreCache:
    """Memo table of local BIC terms for one dataset.

    Values are plain recomputations; with the GIL, concurrent readers and
    writers can only ever insert the same value for the same key.
    """

    def __init__(self, data: CategoricalDataset):
        self.data = data
        self._table: dict[tuple[str, tuple[str, ...]], float] = {}

    def __len__(self) -> int:
        return len(self._table)

    def get(self, target: str, parents: tuple[str, ...]) -> float:
        key = (target, parents)
        value = self._table.get(key)
        if value is None:
            value = local_bic(self.data, target, parents, cache=None)
            self._table[key] = value
        return value


def bic(dag: Dag, data: CategoricalDataset, cache: Optional[ScoreCache] = None) -> float:
    """Total BIC of the dag: sum of per-vertex local scores."""
    if cache is not None and cache.data is not data:
        raise ValueError("cache was built for a different dataset")
    total = 0.0
    for name in dag.vertices:
        total += local_bic(data, name, tuple(sorted(dag.parents(name))), cache=cache)
    return total


def out_of_sample_log_likelihood(bn: DiscreteBn, test: CategoricalDataset) -> float:
    """Sum over test rows of ln P(row | bn); -inf if any row has probability 0."""
    schema = bn.schema
    for i, name in enumerate(schema.names):
        try:
            j = test.schema.index(name)
        except KeyError:
            raise SchemaMismatchError(f"test data lacks variable {name!r}") from None
        if test.schema.states[j] != schema.states[i]:
            raise SchemaMismatchError(f"state list mismatch for {name!r}")
    n = test.row_count
    if n == 0:
        return 0.0
    total = 0.0
    for i, name in enumerate(schema.names):
        x_codes = test.column(name)
        cols = {p: test.column(p) for p in bn.parent_order[i]}
        config = bn.parent_config_codes(i, cols, n)
        probs = bn.cpts[i][config, x_codes]
        with np.errstate(divide="ignore"):
            total += float(np.sum(np.log(probs)))
    return total


def out_of_sample_bic(bn: DiscreteBn, test: CategoricalDataset) -> float:
    """Held-out log-likelihood penalized by 0.5 * |params| * ln(test rows)."""
    n = test.row_count
    if n < 1:
        raise EmptyDatasetError("out-of-sample BIC needs at least one row")
    return out_of_sample_log_likelihood(bn, test) - 0.5 * bn.parameter_count() * math.log(n)
