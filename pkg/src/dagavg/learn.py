"""Hill-climbing structure search maximizing BIC.

Steepest ascent over add/delete/reverse operators from the empty graph (or
the required-edge graph when prior constraints are given).  Ties between
equally scoring moves resolve by move type (add < delete < reverse) and then
by the lexicographic (source, target) of the touched edge, so a search is a
pure function of (data, options).
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .dataset import CategoricalDataset
from .errors import EmptyDatasetError, InfeasibleConstraintsError
from .graph import Dag, is_acyclic
from .score import ScoreCache, local_bic

# Minimum score gain for a move to count as an improvement.
IMPROVEMENT_EPS = 1e-9

_KIND_RANK = {"add": 0, "delete": 1, "reverse": 2}


@dataclass(frozen=True)
class Move:
    kind: str  # "add" | "delete" | "reverse"
    source: str
    target: str

    def sort_key(self) -> tuple:
        return (_KIND_RANK[self.kind], self.source, self.target)


@dataclass(frozen=True)
class HcOptions:
    """Search constraints: degree bound, edge knowledge, iteration cap."""

    max_in_degree: Optional[int] = None
    forbidden_edges: frozenset = frozenset()
    required_edges: frozenset = frozenset()
    max_iterations: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "forbidden_edges", frozenset(map(tuple, self.forbidden_edges)))
        object.__setattr__(self, "required_edges", frozenset(map(tuple, self.required_edges)))
        if self.max_in_degree is not None and self.max_in_degree < 1:
            raise ValueError("max_in_degree must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.required_edges & self.forbidden_edges:
            raise InfeasibleConstraintsError("an edge is both required and forbidden")
        for s, t in self.required_edges:
            if s == t:
                raise InfeasibleConstraintsError(f"required self-loop on {s!r}")
        endpoints = {v for e in self.required_edges for v in e}
        if not is_acyclic(sorted(endpoints), self.required_edges):
            raise InfeasibleConstraintsError("required edges form a cycle")


class _SearchState:
    """Index-space adjacency plus constraint sets for one search."""

    def __init__(self, labels: tuple[str, ...], options: HcOptions):
        self.labels = labels
        index = {v: i for i, v in enumerate(labels)}
        n = len(labels)

        def resolve(edge):
            s, t = edge
            if s not in index or t not in index:
                raise InfeasibleConstraintsError(
                    f"constraint edge {edge!r} references an unknown variable"
                )
            return (index[s], index[t])

        self.required = frozenset(resolve(e) for e in options.required_edges)
        self.forbidden = frozenset(resolve(e) for e in options.forbidden_edges)
        self.max_in = options.max_in_degree
        self.pset = [set() for _ in range(n)]
        self.cset = [set() for _ in range(n)]
        for u, v in self.required:
            self.pset[v].add(u)
            self.cset[u].add(v)
        if self.max_in is not None and any(len(p) > self.max_in for p in self.pset):
            raise InfeasibleConstraintsError("required edges exceed max_in_degree")

    @classmethod
    def from_dag(cls, dag: Dag, options: HcOptions) -> "_SearchState":
        state = cls(dag.vertices, options)
        for u, v in dag.edges:
            state.pset[v].add(u)
            state.cset[u].add(v)
        return state

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for v in range(len(self.labels)) for u in self.pset[v])

    def descendant_sets(self) -> list[set[int]]:
        n = len(self.labels)
        indegree = [len(self.pset[v]) for v in range(n)]
        stack = [v for v in range(n) if indegree[v] == 0]
        topo = []
        while stack:
            u = stack.pop()
            topo.append(u)
            for c in self.cset[u]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    stack.append(c)
        desc: list[set[int]] = [set() for _ in range(n)]
        for u in reversed(topo):
            d = desc[u]
            for c in self.cset[u]:
                d.add(c)
                d |= desc[c]
        return desc

    def iter_legal(self) -> Iterator[tuple[str, int, int]]:
        """Legal moves in deterministic order: adds, deletes, reversals."""
        n = len(self.labels)
        desc = self.descendant_sets()
        max_in = self.max_in
        for u in range(n):
            du = desc
            for v in range(n):
                if u == v or u in self.pset[v] or (u, v) in self.forbidden:
                    continue
                if max_in is not None and len(self.pset[v]) >= max_in:
                    continue
                if u in desc[v]:
                    continue
                yield ("add", u, v)
        edges = self.edges()
        for u, v in edges:
            if (u, v) not in self.required:
                yield ("delete", u, v)
        for u, v in edges:
            if (u, v) in self.required or (v, u) in self.forbidden:
                continue
            if max_in is not None and len(self.pset[u]) >= max_in:
                continue
            if any(v in desc[c] for c in self.cset[u] if c != v):
                continue
            yield ("reverse", u, v)

    def apply(self, kind: str, u: int, v: int) -> None:
        if kind == "add":
            self.pset[v].add(u)
            self.cset[u].add(v)
        elif kind == "delete":
            self.pset[v].discard(u)
            self.cset[u].discard(v)
        else:
            self.pset[v].discard(u)
            self.cset[u].discard(v)
            self.pset[u].add(v)
            self.cset[v].add(u)

    def to_dag(self) -> Dag:
        labels = self.labels
        return Dag(labels, [(labels[u], labels[v]) for u, v in self.edges()])


def legal_moves(dag: Dag, options: HcOptions | None = None) -> list[Move]:
    """Every legal add/delete/reverse on the dag, in deterministic order."""
    options = options or HcOptions()
    state = _SearchState.from_dag(dag, options)
    labels = dag.vertices
    return [Move(kind, labels[u], labels[v]) for kind, u, v in state.iter_legal()]


def hill_climb(
    data: CategoricalDataset,
    options: HcOptions | None = None,
    *,
    cache: Optional[ScoreCache] = None,
    trace: Optional[list] = None,
) -> Dag:
    """Steepest-ascent search for a high-BIC dag over the schema's variables.

    Each iteration scores every legal move and applies the single best one
    with gain above ``IMPROVEMENT_EPS``; the search stops when no such move
    exists or ``options.max_iterations`` is reached.  The result contains all
    required edges and no forbidden ones.  If ``trace`` is given, one
    ``(Move, total_score)`` pair is appended per applied move.
    """
    if data.row_count < 1:
        raise EmptyDatasetError("hill_climb needs at least one row")
    options = options or HcOptions()
    labels = tuple(sorted(data.schema.names))
    state = _SearchState(labels, options)
    if cache is not None and cache.data is not data:
        raise ValueError("cache was built for a different dataset")
    if cache is None:
        cache = ScoreCache(data)

    n = len(labels)
    ptup = [tuple(sorted(state.pset[v])) for v in range(n)]
    memo: dict[tuple[int, tuple[int, ...]], float] = {}

    def score_of(v: int, parents_idx: tuple[int, ...]) -> float:
        key = (v, parents_idx)
        value = memo.get(key)
        if value is None:
            value = cache.get(labels[v], tuple(labels[p] for p in parents_idx))
            memo[key] = value
        return value

    def with_parent(parents_idx: tuple[int, ...], u: int) -> tuple[int, ...]:
        out = list(parents_idx)
        insort(out, u)
        return tuple(out)

    def without_parent(parents_idx: tuple[int, ...], u: int) -> tuple[int, ...]:
        return tuple(p for p in parents_idx if p != u)

    ls = [score_of(v, ptup[v]) for v in range(n)]
    total = sum(ls)
    iterations = 0
    while options.max_iterations is None or iterations < options.max_iterations:
        best_delta = IMPROVEMENT_EPS
        best = None
        for kind, u, v in state.iter_legal():
            if kind == "add":
                delta = score_of(v, with_parent(ptup[v], u)) - ls[v]
            elif kind == "delete":
                delta = score_of(v, without_parent(ptup[v], u)) - ls[v]
            else:
                delta = (
                    score_of(u, with_parent(ptup[u], v))
                    + score_of(v, without_parent(ptup[v], u))
                    - ls[u]
                    - ls[v]
                )
            if delta > best_delta:
                best_delta = delta
                best = (kind, u, v)
        if best is None:
            break
        kind, u, v = best
        state.apply(kind, u, v)
        if kind == "add":
            ptup[v] = with_parent(ptup[v], u)
            ls[v] = score_of(v, ptup[v])
        elif kind == "delete":
            ptup[v] = without_parent(ptup[v], u)
            ls[v] = score_of(v, ptup[v])
        else:
            ptup[v] = without_parent(ptup[v], u)
            ptup[u] = with_parent(ptup[u], v)
            ls[v] = score_of(v, ptup[v])
            ls[u] = score_of(u, ptup[u])
        total = sum(ls)
        iterations += 1
        if trace is not None:
            trace.append((Move(kind, labels[u], labels[v]), total))
    return state.to_dag()
