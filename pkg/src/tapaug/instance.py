"""Tree/link model for the tree augmentation problem.

An instance is a spanning tree rooted at ``root`` plus a set of links.  A link
``(u, v)`` covers every tree-edge on the tree path between ``u`` and ``v``.
Tree-edges are identified by their lower (child) endpoint throughout.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

Link = tuple[int, int]


class InstanceError(ValueError):
    """Raised for malformed or invalid instances."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def mklink(u: int, v: int) -> Link:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Diagnostics:
    ok: bool
    uncovered: tuple[tuple[int, int], ...] = ()
    messages: tuple[str, ...] = ()


@dataclass(frozen=True)
class StemReport:
    stems: tuple[tuple[int, Link], ...]

    def __bool__(self) -> bool:
        return bool(self.stems)

    @property
    def twin_links(self) -> frozenset[Link]:
        return frozenset(l for _, l in self.stems)


@dataclass(frozen=True, eq=False)
class TapInstance:
    """Immutable rooted tree plus a deduplicated link set."""

    node_count: int
    root: int
    tree_edges: tuple[tuple[int, int], ...]
    links: frozenset[Link]
    parent: tuple[int, ...] = field(repr=False)
    depth: tuple[int, ...] = field(repr=False)
    children: tuple[tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def build(cls, node_count: int, root: int, tree_edges: Iterable[tuple[int, int]],
              links: Iterable[tuple[int, int]] = ()) -> "TapInstance":
        tree_edges = tuple((int(u), int(v)) for u, v in tree_edges)
        if node_count < 2:
            raise InstanceError("need at least 2 nodes")
        if not 0 <= root < node_count:
            raise InstanceError(f"root {root} out of range")
        if len(tree_edges) != node_count - 1:
            raise InstanceError(
                f"not a tree: expected {node_count - 1} tree edges, got {len(tree_edges)}")
        adj: list[list[int]] = [[] for _ in range(node_count)]
        for u, v in tree_edges:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise InstanceError(f"tree edge {u}-{v} out of range")
            if u == v:
                raise InstanceError(f"not a tree: self-loop at {u}")
            adj[u].append(v)
            adj[v].append(u)
        parent = [-1] * node_count
        depth = [0] * node_count
        parent[root] = root
        queue = deque([root])
        seen = 1
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if parent[y] == -1:
                    parent[y] = x
                    depth[y] = depth[x] + 1
                    seen += 1
                    queue.append(y)
        if seen != node_count:
            raise InstanceError("not a tree: tree edges contain a cycle or are disconnected")
        children = [[] for _ in range(node_count)]
        for x in range(node_count):
            if x != root:
                children[parent[x]].append(x)
        norm = set()
        for u, v in links:
            u, v = int(u), int(v)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise InstanceError(f"link {u}-{v} out of range")
            if u == v:
                raise InstanceError(f"link {u}-{v} is a loop")
            norm.add(mklink(u, v))
        return cls(node_count, root, tree_edges, frozenset(norm), tuple(parent),
                   tuple(depth), tuple(tuple(sorted(c)) for c in children))

    def with_links(self, links: Iterable[tuple[int, int]]) -> "TapInstance":
        return TapInstance.build(self.node_count, self.root, self.tree_edges, links)

    # -- basic tree queries -------------------------------------------------

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (0 if v == self.root else 1)

    def is_leaf(self, v: int) -> bool:
        return v != self.root and not self.children[v]

    @property
    def leaves(self) -> list[int]:
        return [v for v in range(self.node_count) if self.is_leaf(v)]

    @property
    def nonleaves(self) -> list[int]:
        return [v for v in range(self.node_count) if not self.is_leaf(v)]

    def lca(self, u: int, v: int) -> int:
        parent, depth = self.parent, self.depth
        while depth[u] > depth[v]:
            u = parent[u]
        while depth[v] > depth[u]:
            v = parent[v]
        while u != v:
            u, v = parent[u], parent[v]
        return u

    def is_ancestor(self, a: int, v: int) -> bool:
        """True if ``a`` lies on the path from ``v`` to the root (inclusive)."""
        parent, depth = self.parent, self.depth
        while depth[v] > depth[a]:
            v = parent[v]
        return v == a

    def tree_path(self, u: int, v: int) -> list[int]:
        """Nodes of the tree path from ``u`` to ``v``, both included."""
        w = self.lca(u, v)
        left, right = [], []
        while u != w:
            left.append(u)
            u = self.parent[u]
        while v != w:
            right.append(v)
            v = self.parent[v]
        return left + [w] + right[::-1]

    def path_edges(self, u: int, v: int) -> list[int]:
        """Tree-edges (by child endpoint) on the path between ``u`` and ``v``."""
        w = self.lca(u, v)
        out = []
        for x in (u, v):
            while x != w:
                out.append(x)
                x = self.parent[x]
        return out

    def edge_of(self, child: int) -> tuple[int, int]:
        return (self.parent[child], child)

    @property
    def edge_children(self) -> list[int]:
        return [v for v in range(self.node_count) if v != self.root]

    def incident(self, w: int) -> list[Link]:
        return sorted(l for l in self.links if w in l)

    def covering(self, child: int) -> list[Link]:
        return sorted(l for l in self.links if child in self.path_edges(*l))


# -- on-disk format ---------------------------------------------------------

def parse_instance(text: str | bytes, check: bool = True) -> TapInstance:
    """Parse the line-oriented ``tap 1`` format.

    With ``check`` (the default) the instance must also be feasible, i.e.
    every tree-edge covered by some link.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header = False
    nodes = root = None
    tree: list[tuple[int, int]] = []
    links: list[tuple[int, int]] = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if not header:
                if tok != ["tap", "1"]:
                    raise InstanceError("expected header 'tap 1'", lineno)
                header = True
            elif tok[0] == "nodes" and len(tok) == 2 and nodes is None:
                nodes = int(tok[1])
            elif tok[0] == "root" and len(tok) == 2 and nodes is not None and root is None:
                root = int(tok[1])
            elif tok[0] == "tree" and len(tok) == 3 and root is not None and not links:
                tree.append((int(tok[1]), int(tok[2])))
            elif tok[0] == "link" and len(tok) == 3 and root is not None:
                if len(tree) != nodes - 1:
                    raise InstanceError("link before all tree lines", lineno)
                links.append((int(tok[1]), int(tok[2])))
            else:
                raise InstanceError(f"unexpected line {line!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(f"bad integer in {line!r}", lineno) from None
    if not header or nodes is None or root is None:
        raise InstanceError("incomplete instance: need header, nodes and root")
    inst = TapInstance.build(nodes, root, tree, links)
    if check:
        diag = validate(inst)
        if not diag.ok:
            raise InstanceError("; ".join(diag.messages))
    return inst


def serialize(inst: TapInstance) -> str:
    out = ["tap 1", f"nodes {inst.node_count}", f"root {inst.root}"]
    out += [f"tree {u} {v}" for u, v in inst.tree_edges]
    out += [f"link {u} {v}" for u, v in sorted(inst.links)]
    return "\n".join(out) + "\n"


def validate(inst: TapInstance) -> Diagnostics:
    covered = set()
    for u, v in inst.links:
        covered.update(inst.path_edges(u, v))
    uncovered = tuple(sorted(mklink(*inst.edge_of(c)) for c in inst.edge_children
                             if c not in covered))
    msgs = tuple(f"tree edge {u}-{v} is not covered by any link" for u, v in uncovered)
    return Diagnostics(not uncovered, uncovered, msgs)


# -- shadows, stems, overlaps -----------------------------------------------

def shadow_links(inst: TapInstance, links: Iterable[Link]) -> set[Link]:
    out = set()
    for u, v in links:
        out.update(mklink(a, b) for a, b in combinations(inst.tree_path(u, v), 2))
    return out


def shadow_close(inst: TapInstance) -> TapInstance:
    """Add every sublink of every link.  Idempotent; never introduces a stem."""
    closed = shadow_links(inst, inst.links)
    if len(closed) == len(inst.links):
        return inst
    before = find_stems(inst)
    out = inst.with_links(closed)
    if not before:
        assert not find_stems(out), "shadow closure introduced a stem"
    return out


def is_shadow_closed(inst: TapInstance) -> bool:
    links = inst.links
    for u, v in links:
        for a, b in combinations(inst.tree_path(u, v), 2):
            if mklink(a, b) not in links:
                return False
    return True


def is_overlapping_pair(inst: TapInstance, l1: Link, l2: Link) -> bool:
    p1, p2 = inst.tree_path(*l1), inst.tree_path(*l2)
    if not set(inst.path_edges(*l1)) & set(inst.path_edges(*l2)):
        return False
    s1, s2 = set(p1), set(p2)
    return any(x in s2 for x in l1) or any(x in s1 for x in l2)


def find_stems(inst: TapInstance) -> StemReport:
    """Every link between two degree-1 nodes whose path has exactly one
    internal node of degree 3 and all other internal nodes of degree 2."""
    found = []
    for u, v in sorted(inst.links):
        if inst.degree(u) != 1 or inst.degree(v) != 1:
            continue
        inner = inst.tree_path(u, v)[1:-1]
        degs = [inst.degree(w) for w in inner]
        if degs.count(3) == 1 and degs.count(2) == len(degs) - 1:
            found.append((inner[degs.index(3)], (u, v)))
    return StemReport(tuple(found))


def is_cover(inst: TapInstance, links: Iterable[Link]) -> bool:
    covered = set()
    for u, v in links:
        covered.update(inst.path_edges(u, v))
    return len(covered) == inst.node_count - 1


def maximal_links(inst: TapInstance) -> list[Link]:
    """Links that are not a proper shadow of another link.

    Relies on shadow closure: a proper shadow always has a one-edge extension.
    """
    links = inst.links
    nbrs = [list(inst.children[v]) + ([inst.parent[v]] if v != inst.root else [])
            for v in range(inst.node_count)]
    out = []
    for u, v in sorted(links):
        path = inst.tree_path(u, v)
        before_u, before_v = path[1], path[-2]
        extendable = any(mklink(u, w) in links for w in nbrs[v] if w != before_v) or \
            any(mklink(w, v) in links for w in nbrs[u] if w != before_u)
        if not extendable:
            out.append((u, v))
    return out
