"""Labeled directed acyclic graphs, covers and higher-order structures.

A :class:`Dag` stores an immutable, lexicographically sorted vertex list and
a set of (source, target) index pairs.  All cross-module identity is by
vertex label; labels resolve to indices at the boundary.  Because the vertex
list is sorted, index order and label order coincide, which keeps every
deterministic tie-break (topological order, greedy aggregation, search move
ordering) consistent across the package.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import (
    CycleError,
    DuplicateEdgeError,
    SelfLoopError,
    UnknownVertexError,
)
from .rng import Splitmix64

Edge = tuple[int, int]
LabelEdge = tuple[str, str]


class StructureKind(str, Enum):
    PARENTS = "parents"
    CHILDREN = "children"
    INCIDENT = "incident"


def _check_label(label) -> str:
    if not isinstance(label, str) or not label:
        raise ValueError(f"vertex label must be a nonempty string, got {label!r}")
    if any(c in label for c in ", \t\n\r"):
        raise ValueError(f"vertex label contains separator characters: {label!r}")
    return label


class Dag:
    """Immutable directed acyclic graph over a sorted list of vertex labels."""

    __slots__ = ("vertices", "edges", "_index", "_parents", "_children", "_hash")

    def __init__(self, vertices: Iterable[str], edges: Iterable[LabelEdge] = ()):
        labels = sorted(_check_label(v) for v in vertices)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate vertex labels")
        self.vertices: tuple[str, ...] = tuple(labels)
        self._index: dict[str, int] = {v: i for i, v in enumerate(self.vertices)}
        idx_edges = set()
        for s, t in edges:
            si, ti = self._resolve(s), self._resolve(t)
            if si == ti:
                raise SelfLoopError(f"self-loop on {s!r}")
            idx_edges.add((si, ti))
        self.edges: frozenset[Edge] = frozenset(idx_edges)
        self._finish_init()

    @classmethod
    def _from_indices(cls, vertices: tuple[str, ...], idx_edges: frozenset[Edge]) -> "Dag":
        """Fast path for callers that already hold valid sorted labels/indices."""
        dag = object.__new__(cls)
        dag.vertices = vertices
        dag._index = {v: i for i, v in enumerate(vertices)}
        dag.edges = idx_edges
        dag._finish_init()
        return dag

    def _finish_init(self) -> None:
        n = len(self.vertices)
        parents = [[] for _ in range(n)]
        children = [[] for _ in range(n)]
        for s, t in self.edges:
            parents[t].append(s)
            children[s].append(t)
        self._parents = tuple(frozenset(p) for p in parents)
        self._children = tuple(frozenset(c) for c in children)
        self._hash = hash((self.vertices, self.edges))
        if not _is_acyclic_idx(n, self._children):
            raise CycleError("edge set contains a directed cycle")

    def _resolve(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownVertexError(f"unknown vertex {label!r}") from None

    # --- basic queries ----------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def label(self, index: int) -> str:
        return self.vertices[index]

    def index(self, label: str) -> int:
        return self._resolve(label)

    def has_edge(self, source: str, target: str) -> bool:
        return (self._resolve(source), self._resolve(target)) in self.edges

    def edge_labels(self) -> tuple[LabelEdge, ...]:
        """All edges as (source, target) label pairs, sorted."""
        v = self.vertices
        return tuple(sorted((v[s], v[t]) for s, t in self.edges))

    def parents(self, label: str) -> frozenset[str]:
        v = self.vertices
        return frozenset(v[p] for p in self._parents[self._resolve(label)])

    def children(self, label: str) -> frozenset[str]:
        v = self.vertices
        return frozenset(v[c] for c in self._children[self._resolve(label)])

    def parent_indices(self, index: int) -> frozenset[int]:
        return self._parents[index]

    def child_indices(self, index: int) -> frozenset[int]:
        return self._children[index]

    # --- construction -----------------------------------------------------

    def add_edge(self, source: str, target: str) -> "Dag":
        """Return a new Dag with the edge added; self is unmodified."""
        si, ti = self._resolve(source), self._resolve(target)
        if si == ti:
            raise SelfLoopError(f"self-loop on {source!r}")
        if (si, ti) in self.edges:
            raise DuplicateEdgeError(f"edge {source!r} -> {target!r} already present")
        if self._reaches(ti, si):
            raise CycleError(f"edge {source!r} -> {target!r} would close a cycle")
        return Dag._from_indices(self.vertices, self.edges | {(si, ti)})

    def _reaches(self, start: int, goal: int) -> bool:
        if start == goal:
            return True
        seen = {start}
        queue = deque([start])
        while queue:
            w = queue.popleft()
            for c in self._children[w]:
                if c == goal:
                    return True
                if c not in seen:
                    seen.add(c)
                    queue.append(c)
        return False

    # --- orderings and statistics ------------------------------------------

    def topological_order(self) -> list[str]:
        """Vertices with every edge source before its target.

        Ties are broken by label order, so the result is unique and stable.
        """
        n = len(self.vertices)
        indegree = [len(self._parents[i]) for i in range(n)]
        ready = [i for i in range(n) if indegree[i] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for c in sorted(self._children[i]):
                indegree[c] -= 1
                if indegree[c] == 0:
                    heapq.heappush(ready, c)
        return [self.vertices[i] for i in order]

    def summary_stats(self) -> "SummaryStats":
        n = len(self.vertices)
        m = len(self.edges)
        mb_total = 0
        for x in range(n):
            blanket = set(self._parents[x]) | set(self._children[x])
            for c in self._children[x]:
                blanket |= self._parents[c]
            blanket.discard(x)
            mb_total += len(blanket)
        return SummaryStats(
            vertex_count=n,
            edge_count=m,
            avg_degree=(2.0 * m / n) if n else 0.0,
            avg_markov_blanket=(mb_total / n) if n else 0.0,
        )

    # --- covers -------------------------------------------------------------

    def extract_cover(self, kind: StructureKind) -> "Cover":
        """One higher-order structure per vertex; their edges union to self.edges."""
        kind = StructureKind(kind)
        v = self.vertices
        structures = {}
        for x in range(len(v)):
            if kind is StructureKind.PARENTS:
                neighbors = tuple(sorted(v[p] for p in self._parents[x]))
            elif kind is StructureKind.CHILDREN:
                neighbors = tuple(sorted(v[c] for c in self._children[x]))
            else:
                tagged = [("in", v[p]) for p in self._parents[x]]
                tagged += [("out", v[c]) for c in self._children[x]]
                neighbors = tuple(sorted(tagged))
            structures[v[x]] = HigherOrderStructure(kind, v[x], neighbors)
        return Cover(kind, structures)

    # --- text form ------------------------------------------------------------

    def to_edge_list(self) -> str:
        """Edge-list text: vertex header plus one tab-separated edge per line."""
        lines = [f"# vertices: {','.join(self.vertices)}"]
        lines.extend(f"{s}\t{t}" for s, t in self.edge_labels())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> "Dag":
        vertices: list[str] = []
        edges = []
        saw_header = False
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("vertices:"):
                    names = body[len("vertices:"):].strip()
                    vertices = [v.strip() for v in names.split(",") if v.strip()]
                    saw_header = True
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"malformed edge line: {raw!r}")
            edges.append((parts[0], parts[1]))
        if not saw_header:
            raise ValueError("edge-list text lacks a '# vertices:' header")
        return cls(vertices, edges)

    # --- dunder ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Dag({len(self.vertices)} vertices, {len(self.edges)} edges)"


@dataclass(frozen=True)
class SummaryStats:
    vertex_count: int
    edge_count: int
    avg_degree: float
    avg_markov_blanket: float


@dataclass(frozen=True)
class HigherOrderStructure:
    """A center vertex plus the neighbor set of one of its incident-edge groups.

    ``neighbors`` is stored canonically sorted so equal structures compare and
    hash equal: plain labels for parent/child structures, ``(direction,
    label)`` pairs with direction ``"in"``/``"out"`` for incident structures.
    """

    kind: StructureKind
    center: str
    neighbors: tuple

    def __post_init__(self):
        labels = self.neighbor_labels()
        if self.center in labels:
            raise ValueError(f"structure center {self.center!r} appears in its neighbors")
        if tuple(sorted(self.neighbors)) != self.neighbors:
            raise ValueError("neighbors must be canonically sorted")
        if len(set(self.neighbors)) != len(self.neighbors):
            raise ValueError("duplicate neighbors")

    def neighbor_labels(self) -> tuple[str, ...]:
        if self.kind is StructureKind.INCIDENT:
            return tuple(lab for _, lab in self.neighbors)
        return self.neighbors

    def induced_edges(self) -> frozenset[LabelEdge]:
        """The edges this structure stands for, as label pairs."""
        if self.kind is StructureKind.PARENTS:
            return frozenset((nb, self.center) for nb in self.neighbors)
        if self.kind is StructureKind.CHILDREN:
            return frozenset((self.center, nb) for nb in self.neighbors)
        out = set()
        for direction, nb in self.neighbors:
            out.add((nb, self.center) if direction == "in" else (self.center, nb))
        return frozenset(out)

    def sort_key(self) -> tuple:
        return (self.center, self.neighbors)


@dataclass(frozen=True)
class Cover:
    """One structure per vertex of a Dag, indexed by the center label."""

    kind: StructureKind
    structures: Mapping[str, HigherOrderStructure]

    def induced_edge_union(self) -> frozenset[LabelEdge]:
        union = set()
        for structure in self.structures.values():
            union |= structure.induced_edges()
        return frozenset(union)


# --- free functions ----------------------------------------------------------


def is_acyclic(vertices: Sequence[str], edges: Iterable[LabelEdge]) -> bool:
    """True iff the labeled edge set admits a topological order."""
    labels = sorted(set(vertices))
    index = {v: i for i, v in enumerate(labels)}
    children = [set() for _ in labels]
    for s, t in edges:
        si, ti = index[s], index[t]
        if si == ti:
            return False
        children[si].add(ti)
    return _is_acyclic_idx(len(labels), children)


def _is_acyclic_idx(n: int, children: Sequence[Iterable[int]]) -> bool:
    indegree = [0] * n
    for i in range(n):
        for c in children[i]:
            indegree[c] += 1
    ready = [i for i in range(n) if indegree[i] == 0]
    seen = 0
    while ready:
        i = ready.pop()
        seen += 1
        for c in children[i]:
            indegree[c] -= 1
            if indegree[c] == 0:
                ready.append(c)
    return seen == n


class DagBuilder:
    """Grow an acyclic edge set with all-or-nothing batch inserts.

    Maintains a topological order incrementally (Pearce-Kelly style) so each
    insert touches only the affected span of the order.  ``try_add`` either
    commits a whole batch of index-pair edges or leaves the builder unchanged.
    """

    def __init__(self, n: int):
        self._n = n
        self._children: list[set[int]] = [set() for _ in range(n)]
        self._parents: list[set[int]] = [set() for _ in range(n)]
        self._ord = list(range(n))
        self._edges: set[Edge] = set()

    @property
    def edges(self) -> set[Edge]:
        return set(self._edges)

    def try_add(self, batch: Iterable[Edge]) -> bool:
        inserted = []
        for u, v in batch:
            if (u, v) in self._edges:
                continue
            if not self._insert(u, v):
                for eu, ev in inserted:
                    self._edges.discard((eu, ev))
                    self._children[eu].discard(ev)
                    self._parents[ev].discard(eu)
                return False
            inserted.append((u, v))
        return True

    def _insert(self, u: int, v: int) -> bool:
        if u == v:
            return False
        ord_ = self._ord
        if ord_[u] > ord_[v]:
            # Affected region is [ord[v], ord[u]]; discover it before moving.
            upper = ord_[u]
            forward = []
            seen_f = {v}
            stack = [v]
            while stack:
                w = stack.pop()
                forward.append(w)
                for c in self._children[w]:
                    if c == u:
                        return False
                    if c not in seen_f and ord_[c] < upper:
                        seen_f.add(c)
                        stack.append(c)
            lower = ord_[v]
            backward = []
            seen_b = {u}
            stack = [u]
            while stack:
                w = stack.pop()
                backward.append(w)
                for p in self._parents[w]:
                    if p not in seen_b and ord_[p] > lower:
                        seen_b.add(p)
                        stack.append(p)
            backward.sort(key=ord_.__getitem__)
            forward.sort(key=ord_.__getitem__)
            pool = sorted(ord_[w] for w in backward + forward)
            for w, pos in zip(backward + forward, pool):
                ord_[w] = pos
        self._edges.add((u, v))
        self._children[u].add(v)
        self._parents[v].add(u)
        return True


def random_dag(labels: Sequence[str], edge_count: int, seed: int) -> Dag:
    """Deterministic random DAG: random order, random forward edges."""
    labels = sorted(labels)
    n = len(labels)
    limit = n * (n - 1) // 2
    if edge_count > limit:
        raise ValueError(f"at most {limit} edges possible on {n} vertices")
    rng = Splitmix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next_below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    chosen: set[int] = set()
    while len(chosen) < edge_count:
        chosen.add(rng.next_below(limit))
    edges = []
    for flat in chosen:
        # Unrank the flat pair id into positions a < b of the permuted order.
        a = 0
        remaining = flat
        span = n - 1
        while remaining >= span:
            remaining -= span
            span -= 1
            a += 1
        b = a + 1 + remaining
        edges.append((labels[perm[a]], labels[perm[b]]))
    return Dag(labels, edges)
