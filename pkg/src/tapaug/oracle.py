"""Exact minimum cover by branch and bound over maximal links."""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Link, TapInstance, maximal_links


class BudgetExceeded(RuntimeError):
    """The node budget ran out before optimality was proven."""

    def __init__(self, explored: int, best: int | None):
        super().__init__(f"oracle budget exceeded after {explored} nodes (best so far: {best})")
        self.explored = explored
        self.best = best


@dataclass(frozen=True)
class OptResult:
    opt_size: int
    cover: tuple[Link, ...]
    nodes_explored: int


def opt_cover(inst: TapInstance, limit: int = 1_000_000) -> OptResult:
    """Minimum-size cover.  Raises :class:`BudgetExceeded` rather than guess.

    Any cover lifts to one made of maximal links of the same size (the
    instance is shadow-closed), so only maximal links are branched on.
    """
    links = maximal_links(inst)
    edges = sorted(inst.edge_children, key=lambda c: (-inst.depth[c], c))
    eidx = {c: i for i, c in enumerate(edges)}
    lmask = []
    for l in links:
        m = 0
        for c in inst.path_edges(*l):
            m |= 1 << eidx[c]
        lmask.append(m)
    covering = [[j for j, m in enumerate(lmask) if m >> i & 1] for i in range(len(edges))]
    cover_of_edge = [0] * len(edges)
    for i, js in enumerate(covering):
        for j in js:
            cover_of_edge[i] |= 1 << j
    for i, js in enumerate(covering):
        if not js:
            raise ValueError(f"tree edge {inst.edge_of(edges[i])} cannot be covered")
    full = (1 << len(edges)) - 1

    best_size = len(links) + 1
    best: tuple[Link, ...] | None = None
    explored = 0

    def lower_bound(uncovered: int) -> int:
        # greedy set of uncovered edges, no two covered by a common link
        used = 0
        count = 0
        m = uncovered
        while m:
            low = m & -m
            i = low.bit_length() - 1
            m ^= low
            if not cover_of_edge[i] & used:
                used |= cover_of_edge[i]
                count += 1
        return count

    def search(uncovered: int, chosen: list[int]) -> None:
        nonlocal best_size, best, explored
        explored += 1
        if explored > limit:
            raise BudgetExceeded(explored, best_size if best is not None else None)
        if not uncovered:
            cand = tuple(sorted(links[j] for j in chosen))
            if len(cand) < best_size:
                best_size, best = len(cand), cand
            return
        if len(chosen) + max(1, lower_bound(uncovered)) >= best_size:
            return
        low = uncovered & -uncovered
        i = low.bit_length() - 1
        opts = sorted(covering[i], key=lambda j: (-bin(lmask[j] & uncovered).count("1"), links[j]))
        for j in opts:
            chosen.append(j)
            search(uncovered & ~lmask[j], chosen)
            chosen.pop()

    search(full, [])
    assert best is not None
    return OptResult(best_size, best, explored)
