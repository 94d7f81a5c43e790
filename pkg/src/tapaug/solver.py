"""Combinatorial 3/2-approximation for stemless tree augmentation.

The main loop alternates between exhausting *simple contractions* (single
links paid for by two whole credits) and contracting a good semiclosed tree
located through the auxiliary matching ``M_new`` that neutralises every
maximal deficient 3-leaf tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .contraction import ContractedTree
from .instance import Link, TapInstance, find_stems, is_cover, maximal_links, mklink, validate
from .matching import is_matching, is_maximum_matching, leaf_link_graph, maximum_matching
from itertools import combinations


class SolveError(ValueError):
    """The instance is outside the solver's preconditions."""


class AlgorithmAssertion(AssertionError):
    """A runtime invariant of the algorithm failed (an implementation bug)."""


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise AlgorithmAssertion(msg)


@dataclass(frozen=True)
class MatchingState:
    M_original: frozenset[Link]
    U_original: frozenset[int]

    @classmethod
    def for_instance(cls, inst: TapInstance, forced: Iterable[Link] | None = None) -> "MatchingState":
        g = leaf_link_graph(inst)
        if forced is None:
            m = maximum_matching(g)
        else:
            m = frozenset(mklink(*e) for e in forced)
            if not is_maximum_matching(g, m):
                raise SolveError("forced matching is not a maximum matching of the leaf links")
        covered = {x for e in m for x in e}
        return cls(frozenset(m), frozenset(v for v in g.vertices if v not in covered))

    def images(self, ct: ContractedTree) -> set[Link]:
        out = set()
        for l in self.M_original:
            img = ct.image(l)
            if img is not None:
                out.add(img)
        return out


@dataclass(frozen=True)
class Deficient3Tree:
    v: int
    a: int
    b1: int
    b2: int
    branch: tuple  # ("deg4", u) or ("deg3", u, q)
    witness: Link

    @property
    def ceiling(self) -> int:
        return self.b2


@dataclass(frozen=True)
class IterationEvent:
    kind: str  # "simple-A" | "simple-B" | "semiclosed"
    images: tuple[Link, ...]
    links: tuple[Link, ...]
    v: int | None = None
    gamma_size: int = 0
    deficient_roots: tuple[int, ...] = ()
    compound: int = -1

    @property
    def used_m_new(self) -> bool:
        return bool(self.deficient_roots)

    def line(self) -> str:
        if self.kind == "semiclosed":
            s = f"SEMICLOSED {self.v} {self.gamma_size}"
            if self.deficient_roots:
                s += " DEFICIENT-HANDLED " + " ".join(map(str, self.deficient_roots))
            return s
        (u, w), = self.images
        return f"{self.kind.upper()} {u} {w}"


@dataclass
class SolveResult:
    F: list[Link]
    trace: list[IterationEvent]
    matching: MatchingState
    stats: dict = field(default_factory=dict)

    def trace_text(self) -> str:
        return "".join(e.line() + "\n" for e in self.trace)


# -- simple contractions -----------------------------------------------------

def _owns_credit(ct: ContractedTree, ms: MatchingState, c: int) -> bool:
    return ct.is_compound(c) or c in ms.U_original


def find_simple_contraction(ct: ContractedTree, ms: MatchingState) -> tuple[str, Link] | None:
    credited = [c for c in ct.leaves() if _owns_credit(ct, ms, c)]
    cset = set(credited)
    best = None
    for c in credited:
        for q in ct.adj[c]:
            if q in cset:
                img = mklink(c, q)
                if best is None or img < best:
                    best = img
    if best is not None:
        return ("simple-A", best)
    for img in sorted(ms.images(ct)):
        if any(ct.is_compound(x) for x in ct.path(*img)):
            return ("simple-B", img)
    return None


def check_exhaustion_invariants(ct: ContractedTree, ms: MatchingState) -> None:
    mimg = ms.images(ct)
    for a, b in mimg:
        _check(ct.is_leaf(a) and ct.is_leaf(b), f"M-link image {a}-{b} is not leaf-to-leaf")
        _check(not any(ct.is_compound(x) for x in ct.path(a, b)),
               f"M-link image {a}-{b} has a compound node on its path")
    covered = {x for e in mimg for x in e}
    exposed = {c for c in ct.leaves() if c not in covered}
    for c in exposed:
        for q in ct.adj[c]:
            _check(q not in exposed, f"link between M-exposed leaves {c}-{q}")


def exhaust_simple_contractions(ct: ContractedTree, ms: MatchingState, sink=None,
                                observer=None) -> int:
    count = 0
    while len(ct) > 1:
        found = find_simple_contraction(ct, ms)
        if found is None:
            break
        kind, img = found
        real = ct.realizer(img)
        if observer is not None:
            observer.on_contract(ct, ms, kind, [img], None)
        new = ct.contract([img])
        if sink is not None:
            sink.append(IterationEvent(kind, (img,), (real,), compound=new))
        count += 1
    if len(ct) > 1:
        check_exhaustion_invariants(ct, ms)
    return count


# -- semiclosed trees --------------------------------------------------------

def _partners(matching: Iterable[Link]) -> dict[int, int]:
    out = {}
    for a, b in matching:
        out[a] = b
        out[b] = a
    return out


class SubtreeIndex:
    """Per-state helper: which rooted subtrees are semiclosed w.r.t. a matching.

    For each leaf ``w`` the threshold is the depth of the highest node that a
    relevant link at ``w`` reaches (the partner for matched leaves, every link
    for exposed ones).  ``T'_v`` is semiclosed iff no leaf below ``v`` has a
    threshold above ``v``.
    """

    def __init__(self, ct: ContractedTree, matching: Iterable[Link]):
        self.ct = ct
        self.matching = set(matching)
        self.partner = _partners(self.matching)
        depth = ct.depth
        thr: dict[int, int] = {}
        for w in ct.leaves():
            if w in self.partner:
                thr[w] = depth[ct.lca(w, self.partner[w])]
            else:
                t = depth[w]
                for q in ct.adj[w]:
                    t = min(t, depth[ct.lca(w, q)])
                thr[w] = t
        self.thr = thr
        minthr: dict[int, int] = {}
        small: dict[int, list[int] | None] = {}
        for c in ct.postorder:
            kids = ct.children[c]
            if not kids:
                minthr[c] = thr.get(c, depth[c])
                small[c] = [c] if c != ct.root else []
            else:
                minthr[c] = min(minthr[k] for k in kids)
                acc: list[int] | None = []
                for k in kids:
                    if small[k] is None or len(acc) + len(small[k]) > 3:
                        acc = None
                        break
                    acc += small[k]
                small[c] = acc
        self.minthr = minthr
        self.small_leaves = small

    def semiclosed(self, v: int) -> bool:
        return v == self.ct.root or self.minthr[v] >= self.ct.depth[v]


def matching_exposed_leaves(ct: ContractedTree, matching: Iterable[Link], nodes: Iterable[int]) -> list[int]:
    covered = {x for e in matching for x in e}
    return sorted(c for c in nodes if ct.is_leaf(c) and c not in covered)


def is_semiclosed(ct: ContractedTree, matching: Iterable[Link], v: int) -> bool:
    """Direct check of both semiclosed conditions for ``T'_v``."""
    matching = list(matching)
    nodes, _ = ct.subtree_and_leaves(v)
    inside = set(nodes)
    for a, b in matching:
        if (a in inside) != (b in inside):
            return False
    for w in matching_exposed_leaves(ct, matching, nodes):
        if any(q not in inside for q in ct.adj[w]):
            return False
    return True


def find_min_semiclosed(ct: ContractedTree, matching: Iterable[Link],
                        index: SubtreeIndex | None = None) -> int:
    index = index or SubtreeIndex(ct, matching)
    for c in ct.postorder:
        if index.semiclosed(c):
            return c
    raise AlgorithmAssertion("root is always semiclosed")


def gamma(ct: ContractedTree, matching: Iterable[Link], v: int) -> set[Link]:
    matching = list(matching)
    nodes, _ = ct.subtree_and_leaves(v)
    inside = set(nodes)
    out = {mklink(a, b) for a, b in matching if a in inside and b in inside}
    for w in matching_exposed_leaves(ct, matching, nodes):
        u = ct.up(w)
        _check(u is not None and u in inside,
               f"exposed leaf {w} has no ancestor link inside T'_{v}")
        out.add(mklink(w, u))
    return out


def covers_subtree(ct: ContractedTree, images: Iterable[Link], v: int) -> bool:
    covered = set()
    for a, b in images:
        covered.update(ct.path_edges(a, b))
    nodes, _ = ct.subtree_and_leaves(v)
    return all(c in covered for c in nodes if c != v)


# -- deficient 3-leaf trees --------------------------------------------------

def _outside_neighbor(ct: ContractedTree, b: int, v: int) -> int | None:
    outs = [q for q in ct.adj[b] if not ct.is_ancestor(v, q)]
    if not outs:
        return None
    return min(outs, key=lambda q: (ct.depth[q] if ct.is_ancestor(q, b) else ct.depth[ct.lca(q, b)], q))


def detect_deficient_3leaf(ct: ContractedTree, matching: Iterable[Link], v: int,
                           index: SubtreeIndex | None = None) -> Deficient3Tree | None:
    """The deficient 3-leaf tree rooted at ``v`` w.r.t. ``matching`` (the image of M), if any."""
    if v == ct.root:
        return None
    index = index or SubtreeIndex(ct, matching)
    leaves = index.small_leaves[v]
    if leaves is None or len(leaves) != 3 or not index.semiclosed(v):
        return None
    partner = index.partner
    inner = [(x, y) for x, y in combinations(leaves, 2) if partner.get(x) == y]
    if len(inner) != 1:
        return None
    m_link = inner[0]
    a = next(x for x in leaves if x not in m_link)
    if a in partner:
        return None
    x, y, z = leaves
    lxy, lxz, lyz = ct.lca(x, y), ct.lca(x, z), ct.lca(y, z)
    if lxy == lxz == lyz:
        branch = ("deg4", lxy)
        labelings = [m_link, m_link[::-1]]
    else:
        pairs = {(x, y): lxy, (x, z): lxz, (y, z): lyz}
        (p1, p2), q = max(pairs.items(), key=lambda kv: ct.depth[kv[1]])
        lone = next(t for t in leaves if t not in (p1, p2))
        u = ct.lca(lone, q)
        branch = ("deg3", u, q)
        if lone not in m_link:
            return None
        labelings = [(lone, partner[lone])]
    valid = []
    for b1, b2 in labelings:
        if not ct.has_image(a, b1):
            continue
        w = _outside_neighbor(ct, b2, v)
        if w is None:
            continue
        valid.append((b1, b2, w))
    if not valid:
        return None
    if len(valid) == 2:
        def ceiling_key(t):
            up_b2 = ct.up(t[1])
            return (ct.depth[up_b2], t[1])
        valid.sort(key=ceiling_key)
    b1, b2, w = valid[0]
    return Deficient3Tree(v, a, b1, b2, branch, mklink(b2, w))


def maximal_deficient_trees(ct: ContractedTree, matching: Iterable[Link],
                            index: SubtreeIndex | None = None) -> list[Deficient3Tree]:
    index = index or SubtreeIndex(ct, matching)
    found: dict[int, Deficient3Tree] = {}
    for c in ct.postorder:
        small = index.small_leaves[c]
        if small is not None and len(small) == 3:
            d = detect_deficient_3leaf(ct, matching, c, index)
            if d is not None:
                found[c] = d
    out = []
    for c, d in found.items():
        x = c
        shadowed = False
        while x != ct.root:
            x = ct.parent[x]
            if x in found:
                shadowed = True
                break
        if not shadowed:
            out.append(d)
    out.sort(key=lambda d: d.v)
    for d1, d2 in combinations(out, 2):
        _check(not ct.is_ancestor(d1.v, d2.v) and not ct.is_ancestor(d2.v, d1.v),
               f"maximal deficient trees at {d1.v} and {d2.v} intersect")
    return out


def build_m_new(ct: ContractedTree, matching: Iterable[Link],
                trees: list[Deficient3Tree]) -> set[Link]:
    m_new = {mklink(*e) for e in matching}
    for d in trees:
        m_new.discard(mklink(d.b1, d.b2))
        m_new.add(mklink(d.a, d.b1))
    _check(is_matching(m_new), "M_new is not a matching")
    _check(all(ct.is_leaf(x) for e in m_new for x in e), "M_new is not leaf-to-leaf")
    _check(all(ct.has_image(*e) for e in m_new), "M_new uses a missing link")
    return m_new


@dataclass(frozen=True)
class GoodSemiclosed:
    v: int
    cover: frozenset[Link]
    m_new: frozenset[Link]
    deficient: tuple[Deficient3Tree, ...]


def find_good_semiclosed(ct: ContractedTree, ms: MatchingState) -> GoodSemiclosed:
    mimg = ms.images(ct)
    index_m = SubtreeIndex(ct, mimg)
    trees = maximal_deficient_trees(ct, mimg, index_m)
    m_new = build_m_new(ct, mimg, trees)
    index_new = SubtreeIndex(ct, m_new) if trees else index_m
    v = find_min_semiclosed(ct, m_new, index_new)
    cover = gamma(ct, m_new, v)
    _check(covers_subtree(ct, cover, v), f"Gamma(M_new, T'_{v}) does not cover the subtree")
    _check(index_m.semiclosed(v), f"T'_{v} is not semiclosed w.r.t. M")
    _check(len(cover) == len(gamma(ct, mimg, v)),
           f"|Gamma(M_new, T'_{v})| != |Gamma(M, T'_{v})|")
    _check(detect_deficient_3leaf(ct, mimg, v, index_m) is None,
           f"T'_{v} chosen by M_new is a deficient 3-leaf tree")
    return GoodSemiclosed(v, frozenset(cover), frozenset(m_new), tuple(trees))


# -- main loop ---------------------------------------------------------------

def check_preconditions(inst: TapInstance) -> None:
    diag = validate(inst)
    if not diag.ok:
        raise SolveError("infeasible instance: " + "; ".join(diag.messages))
    links = inst.links
    for u, v in maximal_links(inst):
        path = inst.tree_path(u, v)
        for a, b in combinations(path, 2):
            if mklink(a, b) not in links:
                raise SolveError(f"instance is not shadow-closed: {a}-{b} missing under {u}-{v}")
    stems = find_stems(inst)
    if stems:
        listing = ", ".join(f"stem {s} twin {l[0]}-{l[1]}" for s, l in stems.stems)
        raise SolveError(f"instance is not stemless: {listing}")


def solve(inst: TapInstance, forced_matching: Iterable[Link] | None = None,
          observer=None, check: bool = True) -> SolveResult:
    if check:
        check_preconditions(inst)
    ms = MatchingState.for_instance(inst, forced_matching)
    ct = ContractedTree(inst)
    trace: list[IterationEvent] = []
    simple = semis = 0
    while len(ct) > 1:
        size_before = len(ct)
        simple += exhaust_simple_contractions(ct, ms, trace, observer)
        if len(ct) == 1:
            break
        if observer is not None:
            observer.on_stable(ct, ms)
        good = find_good_semiclosed(ct, ms)
        cover = sorted(good.cover)
        reals = tuple(ct.realizer(img) for img in cover)
        if observer is not None:
            observer.on_contract(ct, ms, "semiclosed", cover, good.v)
        new = ct.contract(cover)
        trace.append(IterationEvent("semiclosed", tuple(cover), reals, good.v, len(cover),
                                    tuple(d.v for d in good.deficient), new))
        semis += 1
        _check(len(ct) < size_before, "node count did not decrease")
    F = [l for e in trace for l in e.links]
    _check(len(set(F)) == len(F), "a link was added twice")
    _check(is_cover(inst, F), "output does not cover the tree")
    stats = {"iterations": len(trace), "simple": simple, "semiclosed": semis, "size": len(F),
             "deficient_handled": sum(len(e.deficient_roots) for e in trace)}
    return SolveResult(F, trace, ms, stats)
