"""Exact-arithmetic checks of the LP relaxation and the credit analysis.

Everything here works on :class:`fractions.Fraction`; nothing is floating
point.  The main entry point is :func:`audit_solve`, which replays the solver
with a credit ledger and checks that every contraction is paid for.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .contraction import ContractedTree
from .instance import InstanceError, Link, TapInstance, is_cover, is_overlapping_pair, mklink
from .solver import (AlgorithmAssertion, MatchingState, SubtreeIndex, detect_deficient_3leaf,
                     gamma, matching_exposed_leaves, solve)

ZERO = Fraction(0)
HALF = Fraction(1, 2)
THREE_HALVES = Fraction(3, 2)


class FractionalAssignment(dict):
    """Link -> Fraction; absent links read as 0."""

    def __missing__(self, key):
        return ZERO

    @classmethod
    def indicator(cls, links: Iterable[tuple[int, int]]) -> "FractionalAssignment":
        return cls({mklink(*l): Fraction(1) for l in links})

    @property
    def support(self) -> list[Link]:
        return sorted(l for l, v in self.items() if v != 0)

    @property
    def ones(self) -> list[Link]:
        return sorted(l for l, v in self.items() if v == 1)

    def total(self, links: Iterable[Link] | None = None) -> Fraction:
        if links is None:
            return sum(self.values(), ZERO)
        return sum((self[l] for l in links), ZERO)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.values())


def parse_assignment(text: str, inst: TapInstance | None = None) -> FractionalAssignment:
    """Read ``x <u> <v> <p>/<q>`` lines.  With ``inst`` given, keys must be links of it."""
    x = FractionalAssignment()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] != "x":
            raise InstanceError(f"expected 'x <u> <v> <p>/<q>', got {raw.strip()!r}", lineno)
        try:
            u, v = int(parts[1]), int(parts[2])
            val = Fraction(parts[3])
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"bad assignment line {raw.strip()!r}: {exc}", lineno) from None
        if not 0 <= val <= 1:
            raise InstanceError(f"value {val} outside [0,1]", lineno)
        l = mklink(u, v)
        if inst is not None and l not in inst.links:
            raise InstanceError(f"{u}-{v} is not a link of the instance", lineno)
        if l in x:
            raise InstanceError(f"duplicate value for {u}-{v}", lineno)
        x[l] = val
    return x


def format_assignment(x: dict[Link, Fraction]) -> str:
    return "".join(f"x {u} {v} {x[(u, v)]}\n" for u, v in sorted(x) if x[(u, v)] != 0)


# -- LP0 ---------------------------------------------------------------------

@dataclass
class Lp0Report:
    covering: list[tuple[tuple[int, int], Fraction]] = field(default_factory=list)
    overlapping: list[tuple[Link, Link, Fraction]] = field(default_factory=list)
    bounds: list[tuple[Link, Fraction]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.covering or self.overlapping or self.bounds)

    def lines(self) -> list[str]:
        out = [f"uncovered edge {a}-{b}: slack {s}" for (a, b), s in self.covering]
        out += [f"overlapping pair {a[0]}-{a[1]} / {b[0]}-{b[1]}: excess {e}"
                for a, b, e in self.overlapping]
        out += [f"link {l[0]}-{l[1]} value {v} outside [0,1]" for l, v in self.bounds]
        return out


def check_lp0(inst: TapInstance, x: dict[Link, Fraction]) -> Lp0Report:
    rep = Lp0Report()
    x = FractionalAssignment(x)
    for l, v in sorted(x.items()):
        if not 0 <= v <= 1 or l not in inst.links:
            rep.bounds.append((l, v))
    load = {c: ZERO for c in inst.edge_children}
    for l in x.support:
        if l in inst.links:
            for c in inst.path_edges(*l):
                load[c] += x[l]
    for c in inst.edge_children:
        if load[c] < 1:
            rep.covering.append((inst.edge_of(c), load[c] - 1))
    # pairs with a zero member satisfy the row trivially
    support = [l for l in x.support if l in inst.links]
    for l1, l2 in combinations(support, 2):
        s = x[l1] + x[l2]
        if s > 1 and is_overlapping_pair(inst, l1, l2):
            rep.overlapping.append((l1, l2, s - 1))
    return rep


def _shorten(inst: TapInstance, l1: Link, l2: Link) -> Link | None | bool:
    """Replacement for ``l1`` against ``l2``: a link, ``None`` (drop) or ``False`` (no move)."""
    p2 = set(inst.tree_path(*l2))
    degenerate = False
    for u1, v1 in (l1, l1[::-1]):
        if u1 not in p2:
            continue
        path = inst.tree_path(u1, v1)
        k = 0
        while k + 1 < len(path) and path[k + 1] in p2:
            k += 1
        if path[k] == v1:
            degenerate = True
            continue
        return mklink(path[k], v1)
    return None if degenerate else False


def shadow_minimalize(inst: TapInstance, cover: Iterable[tuple[int, int]]) -> set[Link]:
    """Shorten links of a cover until no two of them form an overlapping pair.

    Each step replaces one link of an overlapping pair by the part of its path
    that sticks out of the other link's path, so coverage is kept and the total
    path length drops.  A link lying entirely on another's path is dropped, so
    the size never grows and stays the same for inclusion-minimal covers.
    """
    cur = {mklink(*l) for l in cover}
    while True:
        move = None
        for l1, l2 in combinations(sorted(cur), 2):
            if not is_overlapping_pair(inst, l1, l2):
                continue
            for a, b in ((l1, l2), (l2, l1)):
                r = _shorten(inst, a, b)
                if r is not False and r is not None:
                    move = (a, r)
                    break
            if move is None:
                for a, b in ((l1, l2), (l2, l1)):
                    if _shorten(inst, a, b) is None:
                        move = (a, None)
                        break
            if move is not None:
                break
        if move is None:
            return cur
        old, new = move
        cur.discard(old)
        if new is not None:
            if new not in inst.links:
                raise InstanceError(f"shadow {new} missing; instance is not shadow-closed")
            cur.add(new)


def overlapping_clique(inst: TapInstance, links: Iterable[tuple[int, int]]) -> bool:
    ls = sorted({mklink(*l) for l in links})
    return all(is_overlapping_pair(inst, a, b) for a, b in combinations(ls, 2))


# -- potential and credits ---------------------------------------------------

def _incident_value(inst: TapInstance, x: dict[Link, Fraction], w: int) -> Fraction:
    return sum((x.get(l, ZERO) for l in inst.incident(w)), ZERO)


def phi(inst: TapInstance, x: dict[Link, Fraction], nodes: Iterable[int]) -> Fraction:
    total = ZERO
    for w in set(nodes):
        if not inst.is_leaf(w):
            total += _incident_value(inst, x, w)
    return total / 2


def potential(inst: TapInstance, x: dict[Link, Fraction], M: Iterable[Link], U: Iterable[int]) -> Fraction:
    return len(list(U)) + THREE_HALVES * len(list(M)) + phi(inst, x, range(inst.node_count))


def _original_nodes(ct: ContractedTree, nodes: Iterable[int]) -> list[int]:
    return [c for c in nodes if not ct.is_compound(c)]


@dataclass(frozen=True)
class SubtreeCredit:
    credit: Fraction
    gamma_size: int
    good: bool
    m_links: int
    exposed: int
    compound_internal: int
    phi: Fraction
    root_bonus: int


def subtree_credit(inst: TapInstance, ct: ContractedTree, ms: MatchingState,
                   x: dict[Link, Fraction], v: int) -> SubtreeCredit:
    mimg = ms.images(ct)
    nodes, leaves = ct.subtree_and_leaves(v)
    inside = set(nodes)
    m_in = sum(1 for a, b in mimg if a in inside and b in inside)
    exposed = len(matching_exposed_leaves(ct, mimg, nodes))
    comp = sum(1 for c in nodes if ct.is_compound(c) and not ct.is_leaf(c))
    originals = _original_nodes(ct, nodes)
    ph = phi(inst, x, originals)
    bonus = 1 if inst.root in originals and not inst.is_leaf(inst.root) else 0
    credit = bonus + THREE_HALVES * m_in + exposed + comp + ph
    g = len(gamma(ct, mimg, v))
    good = credit >= g + 1
    sufficient = (v == ct.root or comp > 0 or m_in >= 2 or ph >= 1 or (m_in == 1 and ph >= HALF))
    if sufficient and not good:
        raise AlgorithmAssertion(f"T'_{v} meets a goodness condition but has credit {credit} < {g + 1}")
    return SubtreeCredit(credit, g, good, m_in, exposed, comp, ph, bonus)


@dataclass(frozen=True)
class LedgerRow:
    iteration: int
    kind: str
    v: int | None
    cost: int
    released: Fraction

    @property
    def ok(self) -> bool:
        return self.released >= self.cost

    def line(self) -> str:
        where = f" v={self.v}" if self.v is not None else ""
        mark = "ok" if self.ok else "FAIL"
        return f"{self.iteration:>3} {self.kind:<10}{where} cost={self.cost} released={self.released} {mark}"


@dataclass
class CreditReport:
    potential: Fraction
    rows: list[LedgerRow]
    final_total_cost: int
    not_good_without_deficient: list[int]

    @property
    def final_ok(self) -> bool:
        return all(r.ok for r in self.rows) and self.final_total_cost <= self.potential

    @property
    def ok(self) -> bool:
        return self.final_ok and not self.not_good_without_deficient

    def failing_rows(self) -> list[LedgerRow]:
        return [r for r in self.rows if not r.ok]


class _Ledger:
    """Solver observer holding one credit account per node and per M-link."""

    def __init__(self, inst: TapInstance, x: FractionalAssignment, ms: MatchingState):
        self.inst, self.x, self.ms = inst, x, ms
        self.node_credit: dict[int, Fraction] = {}
        for w in range(inst.node_count):
            c = ZERO
            if w in ms.U_original:
                c += 1
            if not inst.is_leaf(w):
                c += _incident_value(inst, x, w) / 2
            if w == inst.root:
                c += 1
            self.node_credit[w] = c
        self.m_live = set(ms.M_original)
        self.rows: list[LedgerRow] = []
        self.bad_v: list[int] = []

    def on_contract(self, ct: ContractedTree, ms: MatchingState, kind: str,
                    images: list[Link], v: int | None) -> None:
        merged = ct.path_union(images)
        released = ZERO
        for c in merged:
            released += 1 if ct.is_compound(c) else self.node_credit.pop(c)
        for l in sorted(self.m_live):
            if ct.membership[l[0]] in merged and ct.membership[l[1]] in merged:
                released += THREE_HALVES
                self.m_live.discard(l)
        self.rows.append(LedgerRow(len(self.rows) + 1, kind, v, len(images) + 1, released))

    def on_stable(self, ct: ContractedTree, ms: MatchingState) -> None:
        mimg = ms.images(ct)
        index = SubtreeIndex(ct, mimg)
        for v in ct.postorder:
            if not index.semiclosed(v):
                continue
            sc = subtree_credit(self.inst, ct, ms, self.x, v)
            if not sc.good and detect_deficient_3leaf(ct, mimg, v, index) is None:
                self.bad_v.append(v)


def audit_solve(inst: TapInstance, x: dict[Link, Fraction],
                forced_matching: Iterable[Link] | None = None) -> CreditReport:
    """Replay the solver while charging every contraction to the credit scheme."""
    x = FractionalAssignment(x)
    if not x.is_integral():
        raise ValueError("the ledger needs an integral assignment")
    rep = check_lp0(inst, x)
    if not rep.ok:
        raise ValueError("assignment is not LP0-feasible: " + "; ".join(rep.lines()[:3]))
    ms = MatchingState.for_instance(inst, forced_matching)
    ledger = _Ledger(inst, x, ms)
    res = solve(inst, forced_matching, observer=ledger)
    pot = potential(inst, x, ms.M_original, ms.U_original)
    return CreditReport(pot, ledger.rows, len(res.F), ledger.bad_v)


# -- matching polytope -------------------------------------------------------

def matching_polytope_member(inst: TapInstance, x: dict[Link, Fraction],
                             scale: Fraction | int = 1, max_leaves: int = 20) -> bool:
    """Is ``x`` restricted to leaf-to-leaf links, divided by ``scale``, in the
    matching polytope of the leaf-link graph?  Checked by enumerating odd sets."""
    leaves = inst.leaves
    if len(leaves) > max_leaves:
        raise ValueError(f"{len(leaves)} leaves exceeds the enumeration guard of {max_leaves}")
    scale = Fraction(scale)
    lset = set(leaves)
    y = {l: Fraction(v) / scale for l, v in x.items()
         if v != 0 and l[0] in lset and l[1] in lset}
    if any(v < 0 for v in y.values()):
        return False
    deg: dict[int, Fraction] = {}
    for (a, b), v in y.items():
        deg[a] = deg.get(a, ZERO) + v
        deg[b] = deg.get(b, ZERO) + v
    if any(d > 1 for d in deg.values()):
        return False
    verts = sorted(deg)
    for size in range(3, len(verts) + 1, 2):
        for W in combinations(verts, size):
            ws = set(W)
            if sum((v for (a, b), v in y.items() if a in ws and b in ws), ZERO) > Fraction(size - 1, 2):
                return False
    return True


# -- auxiliary graph ---------------------------------------------------------

VBAR = -1  # stands for everything outside the subtree


@dataclass(frozen=True)
class AuxiliaryGraph:
    v: int
    left: tuple[int, ...]
    right: tuple[int, ...]
    edges: tuple[tuple[int, int, Link], ...]  # (left node, right node, image link)

    def perfect_matchings(self):
        if len(self.left) != len(self.right):
            return
        by_left: dict[int, list[tuple[int, Link]]] = {p: [] for p in self.left}
        for p, q, l in self.edges:
            by_left[p].append((q, l))

        def rec(i, used, chosen):
            if i == len(self.left):
                yield list(chosen)
                return
            for q, l in by_left[self.left[i]]:
                if q not in used:
                    used.add(q)
                    chosen.append(l)
                    yield from rec(i + 1, used, chosen)
                    chosen.pop()
                    used.discard(q)

        yield from rec(0, set(), [])


def build_aux_graph(ct: ContractedTree, ms: MatchingState, v: int) -> AuxiliaryGraph:
    mimg = ms.images(ct)
    nodes, leaves = ct.subtree_and_leaves(v)
    inside = set(nodes)
    covered = {x for e in mimg for x in e}
    left = tuple(w for w in leaves if w in covered)
    exposed = tuple(w for w in leaves if w not in covered)
    eset = set(exposed)
    edges = []
    for p in left:
        for q in ct.neighbors(p):
            if q in eset:
                edges.append((p, q, mklink(p, q)))
            elif q not in inside:
                edges.append((p, VBAR, mklink(p, q)))
    return AuxiliaryGraph(v, left, (VBAR,) + exposed, tuple(edges))


def aux_matching_covers(ct: ContractedTree, ag: AuxiliaryGraph) -> list[Link] | None:
    """A perfect matching of ``ag`` whose links cover ``T'_v``, if one exists."""
    nodes, _ = ct.subtree_and_leaves(ag.v)
    need = {c for c in nodes if c != ag.v}
    for pm in ag.perfect_matchings():
        got = set()
        for a, b in pm:
            got.update(ct.path_edges(a, b))
        if need <= got:
            return pm
    return None


def indicator_of_cover(inst: TapInstance, cover: Iterable[tuple[int, int]]) -> FractionalAssignment:
    cover = list(cover)
    if not is_cover(inst, cover):
        raise ValueError("not a cover")
    return FractionalAssignment.indicator(cover)
