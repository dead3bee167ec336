"""Directed-graph algebra: ancestral sets, moralization, separation.

All operations are pure functions over immutable graphs.  Node sets are
returned as tuples sorted by declaration order, so repeated runs print
identically.  Separation uses the moral-graph criterion: ``a`` and ``b``
are separated by ``c`` when, in the moralization of the smallest
ancestral subgraph containing ``a | b | c``, every path from ``a`` to
``b`` intersects ``c``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .errors import InputError, ModelError

Node = str


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named nodes.

    ``nodes`` fixes the declaration order used to sort every set-valued
    result.  Edges are (parent, child) pairs; duplicates, self-loops,
    references to undeclared nodes and cycles are rejected.
    """

    nodes: tuple[Node, ...]
    edges: frozenset[tuple[Node, Node]]
    _index: dict = field(init=False, repr=False, compare=False)
    _parents: dict = field(init=False, repr=False, compare=False)
    _children: dict = field(init=False, repr=False, compare=False)

    def __init__(self, nodes: Iterable[Node], edges: Iterable[tuple[Node, Node]]):
        nodes = tuple(nodes)
        if len(set(nodes)) != len(nodes):
            raise ModelError("duplicate node declaration")
        edge_list = [tuple(e) for e in edges]
        edge_set = frozenset(edge_list)
        if len(edge_set) != len(edge_list):
            raise ModelError("duplicate edge")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edge_set)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(nodes)})
        parents = {v: [] for v in nodes}
        children = {v: [] for v in nodes}
        for u, v in sorted(edge_set, key=lambda e: (self._index.get(e[0], -1), self._index.get(e[1], -1))):
            if u not in self._index or v not in self._index:
                raise InputError(f"edge ({u}, {v}) references an undeclared node")
            if u == v:
                raise ModelError(f"self-loop at {u}")
            parents[v].append(u)
            children[u].append(v)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)
        _kahn_order(self)  # raises ModelError on a cycle

    def parents(self, v: Node) -> tuple[Node, ...]:
        self._check(v)
        return tuple(self._parents[v])

    def children(self, v: Node) -> tuple[Node, ...]:
        self._check(v)
        return tuple(self._children[v])

    def sort(self, nodes: Iterable[Node]) -> tuple[Node, ...]:
        """Sort a node set by declaration order."""
        return tuple(sorted(set(nodes), key=self._index.__getitem__))

    def drop(self, gone: Iterable[Node]) -> "Dag":
        """Induced subgraph with ``gone`` removed."""
        gone = set(gone)
        return Dag(
            tuple(v for v in self.nodes if v not in gone),
            [(u, v) for u, v in self.edges if u not in gone and v not in gone],
        )

    def with_parents(self, assignments: dict[Node, Iterable[Node]]) -> "Dag":
        """Copy of the graph with the in-edges of some nodes replaced."""
        edges = [(u, v) for u, v in self.edges if v not in assignments]
        for v, ps in assignments.items():
            edges.extend((p, v) for p in ps)
        return Dag(self.nodes, edges)

    def _check(self, v: Node) -> None:
        if v not in self._index:
            raise InputError(f"unknown node {v!r}")


@dataclass(frozen=True)
class UndirectedGraph:
    """Undirected graph with the same declaration-order conventions."""

    nodes: tuple[Node, ...]
    edges: frozenset[frozenset]
    _adj: dict = field(init=False, repr=False, compare=False)

    def __init__(self, nodes: Iterable[Node], edges: Iterable):
        nodes = tuple(nodes)
        index = {v: i for i, v in enumerate(nodes)}
        adj = {v: set() for v in nodes}
        norm = set()
        for e in edges:
            u, v = tuple(e)
            if u not in index or v not in index:
                raise InputError(f"edge ({u}, {v}) references an undeclared node")
            if u == v:
                raise ModelError(f"self-loop at {u}")
            norm.add(frozenset((u, v)))
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "_adj", {v: tuple(sorted(s, key=index.__getitem__)) for v, s in adj.items()})

    def neighbors(self, v: Node) -> tuple[Node, ...]:
        if v not in self._adj:
            raise InputError(f"unknown node {v!r}")
        return self._adj[v]


def _kahn_order(dag: Dag) -> tuple[Node, ...]:
    indeg = {v: len(dag._parents[v]) for v in dag.nodes}
    ready = [v for v in dag.nodes if indeg[v] == 0]
    order = []
    while ready:
        # Smallest declaration index first keeps the order deterministic.
        v = min(ready, key=dag._index.__getitem__)
        ready.remove(v)
        order.append(v)
        for c in dag._children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if len(order) != len(dag.nodes):
        stuck = [v for v in dag.nodes if indeg[v] > 0]
        raise ModelError(f"cycle detected among {stuck}")
    return tuple(order)


def topological_order(dag: Dag) -> tuple[Node, ...]:
    """Order with every edge pointing forward; ties follow declaration order."""
    return _kahn_order(dag)


def _closure(dag: Dag, seed: Iterable[Node], step) -> tuple[Node, ...]:
    seen = set()
    queue = deque()
    for v in seed:
        dag._check(v)
        if v not in seen:
            seen.add(v)
            queue.append(v)
    while queue:
        for w in step(queue.popleft()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return dag.sort(seen)


def ancestral_closure(dag: Dag, seed: Iterable[Node]) -> tuple[Node, ...]:
    """Smallest superset of ``seed`` closed under taking parents."""
    return _closure(dag, seed, lambda v: dag._parents[v])


def descendants(dag: Dag, seed: Iterable[Node]) -> tuple[Node, ...]:
    """Smallest superset of ``seed`` closed under taking children."""
    return _closure(dag, seed, lambda v: dag._children[v])


def moralize(dag: Dag) -> UndirectedGraph:
    """Marry unlinked co-parents, then drop edge directions."""
    edges = {frozenset(e) for e in dag.edges}
    for v in dag.nodes:
        ps = dag._parents[v]
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                edges.add(frozenset((ps[i], ps[j])))
    return UndirectedGraph(dag.nodes, edges)


def moral_ancestral(dag: Dag, seed: Iterable[Node]) -> UndirectedGraph:
    """Moralization of the smallest ancestral subgraph containing ``seed``."""
    keep = set(ancestral_closure(dag, seed))
    sub = dag.drop(v for v in dag.nodes if v not in keep)
    return moralize(sub)


def _disjoint(*sets) -> None:
    seen = set()
    for s in sets:
        for v in s:
            if v in seen:
                raise InputError(f"sets overlap at {v!r}")
            seen.add(v)


def connecting_path(
    dag: Dag, a: Iterable[Node], b: Iterable[Node], c: Iterable[Node]
) -> tuple[Node, ...] | None:
    """One path from ``a`` to ``b`` avoiding ``c`` in the moral ancestral
    graph of ``a | b | c``, or None when no such path exists.

    Breadth-first, with neighbours visited in declaration order, so the
    returned witness is deterministic.
    """
    a, b, c = set(a), set(b), set(c)
    _disjoint(a, b, c)
    graph = moral_ancestral(dag, a | b | c)
    prev: dict[Node, Node | None] = {v: v for v in a}
    queue = deque(sorted(a, key=dag._index.__getitem__))
    while queue:
        v = queue.popleft()
        if v in b:
            path = [v]
            while prev[path[-1]] != path[-1]:
                path.append(prev[path[-1]])
            return tuple(reversed(path))
        for w in graph.neighbors(v):
            if w in c or w in prev:
                continue
            prev[w] = v
            queue.append(w)
    return None


def separated(dag: Dag, a: Iterable[Node], b: Iterable[Node], c: Iterable[Node]) -> bool:
    """Whether ``c`` separates ``a`` from ``b`` in the moral ancestral graph."""
    return connecting_path(dag, a, b, c) is None
