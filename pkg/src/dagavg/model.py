"""Discrete Bayesian networks: CPT storage, sampling and fitting."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .dataset import CategoricalDataset, Schema
from .errors import SchemaMismatchError
from .graph import Dag
from .rng import fill_unit


def _strides(cards: Sequence[int]) -> list[int]:
    """Mixed-radix strides with the LAST position varying fastest."""
    strides = [1] * len(cards)
    for j in range(len(cards) - 2, -1, -1):
        strides[j] = strides[j + 1] * cards[j + 1]
    return strides


class DiscreteBn:
    """A Dag plus one conditional probability table per vertex.

    ``cpts[i]`` has shape ``(q_i, r_i)`` where ``r_i`` is the state count of
    vertex i and ``q_i`` the number of parent configurations; row indices
    follow ``parent_order[i]`` in mixed radix with the last parent fastest.
    """

    __slots__ = ("dag", "schema", "cpts", "parent_order")

    def __init__(
        self,
        dag: Dag,
        schema: Schema,
        cpts: Sequence[np.ndarray],
        parent_order: Sequence[tuple[str, ...]],
        row_tol: float = 1e-6,
    ):
        if schema.names != dag.vertices:
            raise SchemaMismatchError("schema variables must equal the dag's vertex list")
        if len(cpts) != len(dag.vertices) or len(parent_order) != len(dag.vertices):
            raise ValueError("one CPT and one parent order required per vertex")
        cards = schema.cardinalities()
        frozen = []
        for i, name in enumerate(dag.vertices):
            order = tuple(parent_order[i])
            if frozenset(order) != dag.parents(name) or len(set(order)) != len(order):
                raise ValueError(f"parent order for {name!r} must list each parent once")
            q = math.prod(cards[dag.index(p)] for p in order)
            table = np.asarray(cpts[i], dtype=np.float64)
            if table.shape != (q, cards[i]):
                raise ValueError(
                    f"CPT for {name!r} has shape {table.shape}, expected {(q, cards[i])}"
                )
            if np.any(np.abs(table.sum(axis=1) - 1.0) > row_tol):
                raise ValueError(f"CPT rows for {name!r} do not sum to 1")
            table = np.ascontiguousarray(table)
            table.setflags(write=False)
            frozen.append(table)
        self.dag = dag
        self.schema = schema
        self.cpts = tuple(frozen)
        self.parent_order = tuple(tuple(p) for p in parent_order)

    def parameter_count(self) -> int:
        """Free parameters: sum over vertices of (r - 1) * q."""
        total = 0
        for i in range(len(self.dag.vertices)):
            q, r = self.cpts[i].shape
            total += (r - 1) * q
        return total

    def parent_config_codes(
        self, vertex_index: int, columns: dict[str, np.ndarray], n_rows: int
    ) -> np.ndarray:
        """Row indices into the vertex's CPT for each data row."""
        order = self.parent_order[vertex_index]
        if not order:
            return np.zeros(n_rows, dtype=np.int64)
        cards = [self.schema.cardinality(self.dag.index(p)) for p in order]
        strides = _strides(cards)
        code = None
        for p, stride in zip(order, strides):
            term = columns[p].astype(np.int64) * stride
            code = term if code is None else code + term
        return code

    def forward_sample(self, n: int, seed: int) -> CategoricalDataset:
        """Ancestral sampling: n rows, visiting vertices in topological order.

        One unit variate is consumed per (row, vertex) pair, rows outermost,
        and each draw inverts the CPT row's CDF; this makes the sample a pure
        function of (model, n, seed).
        """
        dag = self.dag
        nv = len(dag.vertices)
        topo = [dag.index(v) for v in dag.topological_order()]
        variates = fill_unit(seed, n * nv).reshape(n, nv) if n else np.zeros((0, nv))
        out = np.zeros((n, nv), dtype=np.int64)
        for t, x in enumerate(topo):
            table = self.cpts[x]
            q, r = table.shape
            cdf = np.cumsum(table, axis=1)
            if q == 1:
                states = np.searchsorted(cdf[0], variates[:, t], side="right")
            else:
                cols = {p: out[:, dag.index(p)] for p in self.parent_order[x]}
                config = self.parent_config_codes(x, cols, n)
                states = (cdf[config] <= variates[:, t, None]).sum(axis=1)
            out[:, x] = np.minimum(states, r - 1)
        return CategoricalDataset(self.schema, out)


def fit_mle(dag: Dag, data: CategoricalDataset, pseudo_count: float = 0.0) -> DiscreteBn:
    """Maximum-likelihood CPTs from counts, optionally Laplace-smoothed.

    Entry = (N(x, config) + pseudo_count) / (N(config) + pseudo_count * r).
    With pseudo_count 0, a parent configuration never observed yields the
    uniform row.  Parents are ordered by label, decoupled from any declared
    order the dag may have come from.
    """
    if pseudo_count < 0:
        raise ValueError("pseudo_count must be nonnegative")
    names = dag.vertices
    try:
        cols = {name: data.schema.index(name) for name in names}
    except KeyError as exc:
        raise SchemaMismatchError(f"dag vertex missing from data schema: {exc}") from None
    schema = data.schema.restrict(names)
    cards = schema.cardinalities()
    rows = data.rows
    cpts = []
    parent_order = []
    for i, name in enumerate(names):
        parents = tuple(sorted(dag.parents(name)))
        r = cards[i]
        pcards = [cards[schema.index(p)] for p in parents]
        q = math.prod(pcards)
        counts = np.zeros((q, r), dtype=np.float64)
        if rows.shape[0]:
            code = rows[:, cols[name]].astype(np.int64)
            stride = r
            for p, pc in zip(reversed(parents), reversed(pcards)):
                code = code + rows[:, cols[p]].astype(np.int64) * stride
                stride *= pc
            flat = np.bincount(code, minlength=q * r)
            counts[:] = flat.reshape(q, r)
        totals = counts.sum(axis=1, keepdims=True)
        if pseudo_count > 0:
            table = (counts + pseudo_count) / (totals + pseudo_count * r)
        else:
            table = np.full((q, r), 1.0 / r)
            observed = totals[:, 0] > 0
            table[observed] = counts[observed] / totals[observed]
        cpts.append(table)
        parent_order.append(parents)
    return DiscreteBn(dag, schema, cpts, parent_order)
