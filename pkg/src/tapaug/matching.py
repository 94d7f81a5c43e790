"""Maximum cardinality matching in general graphs.

Edmonds' blossom algorithm, BFS variant with blossom contraction through a
``base`` array.  Vertices and adjacency are scanned in increasing id order so
the result is reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .instance import Link, TapInstance, mklink


@dataclass(frozen=True)
class SimpleGraph:
    vertices: tuple[int, ...]
    edges: frozenset[Link]

    @classmethod
    def of(cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> "SimpleGraph":
        vs = tuple(sorted(set(vertices)))
        vset = set(vs)
        es = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if u not in vset or v not in vset:
                raise ValueError(f"edge {u}-{v} has an end outside the vertex set")
            es.add(mklink(u, v))
        return cls(vs, frozenset(es))

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for v in adj:
            adj[v].sort()
        return adj


def is_matching(edges: Iterable[Link]) -> bool:
    seen = set()
    for u, v in edges:
        if u in seen or v in seen or u == v:
            return False
        seen.update((u, v))
    return True


class _Blossom:
    def __init__(self, g: SimpleGraph):
        self.vs = g.vertices
        self.index = {v: i for i, v in enumerate(self.vs)}
        n = len(self.vs)
        self.n = n
        adj = g.adjacency()
        self.adj = [[self.index[w] for w in adj[v]] for v in self.vs]
        self.mate = [-1] * n

    def _lca(self, a: int, b: int, base, parent) -> int:
        used = [False] * self.n
        while True:
            a = base[a]
            used[a] = True
            if self.mate[a] == -1:
                break
            a = parent[self.mate[a]]
        while True:
            b = base[b]
            if used[b]:
                return b
            b = parent[self.mate[b]]

    def _mark_path(self, v, b, child, base, parent, in_blossom):
        while base[v] != b:
            in_blossom[base[v]] = in_blossom[base[self.mate[v]]] = True
            parent[v] = child
            child = self.mate[v]
            v = parent[self.mate[v]]

    def find_path(self, root: int) -> int:
        """BFS for an augmenting path from ``root``; returns its far end or -1."""
        n, mate, adj = self.n, self.mate, self.adj
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or mate[v] == to:
                    continue
                if to == root or (mate[to] != -1 and parent[mate[to]] != -1):
                    cur = self._lca(v, to, base, parent)
                    in_blossom = [False] * n
                    self._mark_path(v, cur, to, base, parent, in_blossom)
                    self._mark_path(to, cur, v, base, parent, in_blossom)
                    for i in range(n):
                        if in_blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if mate[to] == -1:
                        self._parent = parent
                        return to
                    used[mate[to]] = True
                    queue.append(mate[to])
        return -1

    def augment_from(self, root: int) -> bool:
        end = self.find_path(root)
        if end == -1:
            return False
        parent = self._parent
        v = end
        while v != -1:
            pv = parent[v]
            ppv = self.mate[pv]
            self.mate[v] = pv
            self.mate[pv] = v
            v = ppv
        return True

    def pairs(self) -> frozenset[Link]:
        return frozenset(mklink(self.vs[i], self.vs[j])
                         for i, j in enumerate(self.mate) if j > i)


def maximum_matching(g: SimpleGraph) -> frozenset[Link]:
    """A maximum matching of ``g``: greedy start in id order, then augment."""
    b = _Blossom(g)
    for v in range(b.n):
        if b.mate[v] == -1:
            for w in b.adj[v]:
                if b.mate[w] == -1:
                    b.mate[v], b.mate[w] = w, v
                    break
    for v in range(b.n):
        if b.mate[v] == -1:
            b.augment_from(v)
    return b.pairs()


def is_maximum_matching(g: SimpleGraph, matching: Iterable[Link]) -> bool:
    """True iff ``matching`` is a matching of ``g`` with no augmenting path."""
    matching = [mklink(*e) for e in matching]
    if not is_matching(matching) or not set(matching) <= g.edges:
        return False
    b = _Blossom(g)
    for u, v in matching:
        i, j = b.index[u], b.index[v]
        b.mate[i], b.mate[j] = j, i
    return all(b.mate[v] != -1 or b.find_path(v) == -1 for v in range(b.n))


def leaf_link_graph(inst: TapInstance) -> SimpleGraph:
    leaves = inst.leaves
    lset = set(leaves)
    return SimpleGraph.of(leaves, [l for l in inst.links if l[0] in lset and l[1] in lset])
