"""The current tree T/F under repeated contraction of link paths.

Node ids of the current tree ("cnodes") start as the original node ids;
every contraction creates a fresh compound id ``>= origin.node_count``.
Each live link image keeps the set of original links that realize it.
"""

from __future__ import annotations

from typing import Callable, Iterable

from .instance import Link, TapInstance, mklink


class ContractionError(RuntimeError):
    pass


class ContractedTree:
    def __init__(self, inst: TapInstance):
        self.origin = inst
        n = inst.node_count
        self.membership = list(range(n))
        self.members: dict[int, tuple[int, ...]] = {v: (v,) for v in range(n)}
        self.top: dict[int, int] = {v: v for v in range(n)}
        self.realizers: dict[Link, set[Link]] = {l: {l} for l in inst.links}
        self.adj: dict[int, set[int]] = {v: set() for v in range(n)}
        for u, v in inst.links:
            self.adj[u].add(v)
            self.adj[v].add(u)
        self.next_id = n
        self._rebuild()

    # -- structure -----------------------------------------------------------

    def _rebuild(self) -> None:
        inst = self.origin
        self.root = self.membership[inst.root]
        parent: dict[int, int] = {}
        children: dict[int, list[int]] = {c: [] for c in self.members}
        for c, t in self.top.items():
            if c == self.root:
                parent[c] = c
            else:
                p = self.membership[inst.parent[t]]
                parent[c] = p
                children[p].append(c)
        for lst in children.values():
            lst.sort()
        self.parent = parent
        self.children = children
        depth = {self.root: 0}
        tin, tout, post = {}, {}, []
        clock = 0
        stack = [(self.root, 0)]
        while stack:
            x, i = stack.pop()
            if i == 0:
                tin[x] = clock
                clock += 1
            kids = children[x]
            if i < len(kids):
                stack.append((x, i + 1))
                y = kids[i]
                depth[y] = depth[x] + 1
                stack.append((y, 0))
            else:
                tout[x] = clock
                post.append(x)
        self.depth, self.tin, self.tout, self.postorder = depth, tin, tout, post

    @property
    def nodes(self) -> list[int]:
        return sorted(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def is_compound(self, c: int) -> bool:
        return len(self.members[c]) >= 2

    def is_leaf(self, c: int) -> bool:
        return c != self.root and not self.children[c]

    def leaves(self) -> list[int]:
        return [c for c in self.nodes if self.is_leaf(c)]

    def is_ancestor(self, a: int, v: int) -> bool:
        return self.tin[a] <= self.tin[v] < self.tout[a]

    def lca(self, a: int, b: int) -> int:
        while not self.is_ancestor(a, b):
            a = self.parent[a]
        return a

    def path(self, a: int, b: int) -> list[int]:
        w = self.lca(a, b)
        left, right = [], []
        while a != w:
            left.append(a)
            a = self.parent[a]
        while b != w:
            right.append(b)
            b = self.parent[b]
        return left + [w] + right[::-1]

    def path_edges(self, a: int, b: int) -> list[int]:
        """T'-edges on the path, identified by their child cnode."""
        w = self.lca(a, b)
        out = []
        for x in (a, b):
            while x != w:
                out.append(x)
                x = self.parent[x]
        return out

    def subtree_and_leaves(self, v: int) -> tuple[list[int], list[int]]:
        nodes = [c for c in self.postorder if self.is_ancestor(v, c)]
        return sorted(nodes), sorted(c for c in nodes if self.is_leaf(c))

    def in_subtree(self, v: int, c: int) -> bool:
        return self.is_ancestor(v, c)

    # -- links ---------------------------------------------------------------

    def image(self, link: Link) -> Link | None:
        a, b = self.membership[link[0]], self.membership[link[1]]
        return None if a == b else mklink(a, b)

    @property
    def images(self) -> list[Link]:
        return sorted(self.realizers)

    def has_image(self, a: int, b: int) -> bool:
        return mklink(a, b) in self.realizers

    def neighbors(self, c: int) -> list[int]:
        return sorted(self.adj[c])

    def realizer(self, img: Link) -> Link:
        return min(self.realizers[mklink(*img)])

    def up(self, w: int, link_pred: Callable[[Link], bool] | None = None) -> int | None:
        """Highest proper ancestor of ``w`` joined to ``w`` by an image."""
        best = None
        for q in self.adj[w]:
            if q != w and self.is_ancestor(q, w):
                if link_pred is not None and not link_pred(mklink(w, q)):
                    continue
                if best is None or self.depth[q] < self.depth[best]:
                    best = q
        return best

    # -- contraction ---------------------------------------------------------

    def path_union(self, image_links: Iterable[Link]) -> set[int]:
        nodes: set[int] = set()
        for a, b in image_links:
            nodes.update(self.path(a, b))
        return nodes

    def contract(self, image_links: Iterable[Link]) -> int:
        image_links = [mklink(*l) for l in image_links]
        for l in image_links:
            if l not in self.realizers:
                raise ContractionError(f"{l} is not a live link image")
        merged = self.path_union(image_links)
        if not merged:
            raise ContractionError("nothing to contract")
        tops = [c for c in merged if c == self.root or self.parent[c] not in merged]
        if len(tops) != 1:
            raise ContractionError(f"path union is disconnected: {sorted(merged)}")
        new = self.next_id
        self.next_id += 1
        mem = tuple(sorted(x for c in merged for x in self.members[c]))
        self.top[new] = self.top[tops[0]]
        self.members[new] = mem
        for x in mem:
            self.membership[x] = new
        self.adj[new] = set()
        for c in sorted(merged):
            for y in self.adj.pop(c):
                key = mklink(c, y)
                reals = self.realizers.pop(key, None)
                if reals is None or y in merged:
                    if y not in merged:
                        self.adj[y].discard(c)
                    continue
                self.adj[y].discard(c)
                self.adj[y].add(new)
                self.adj[new].add(y)
                self.realizers.setdefault(mklink(new, y), set()).update(reals)
            del self.members[c]
            del self.top[c]
        self._rebuild()
        return new

    # -- export --------------------------------------------------------------

    def to_dot(self, title: str = "T") -> str:
        lines = [f'graph "{title}" {{']
        for c in self.nodes:
            if self.is_compound(c):
                label = "{" + ",".join(map(str, self.members[c])) + "}"
                lines.append(f'  n{c} [shape=box, label="{c}: {label}"];')
            else:
                lines.append(f'  n{c} [shape=circle, label="{c}"];')
        for c in self.nodes:
            if c != self.root:
                lines.append(f"  n{self.parent[c]} -- n{c} [style=solid];")
        for a, b in self.images:
            lines.append(f"  n{a} -- n{b} [style=dashed, constraint=false];")
        lines.append("}")
        return "\n".join(lines) + "\n"
