"""Instance generators: fixtures, the claw-path family, the tight family and
random stemless instances.  Every generator returns a shadow-closed instance."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .instance import InstanceError, Link, TapInstance, find_stems, mklink, shadow_close, validate

FIXTURES = ("PATH3", "STAR4", "DEF3", "DEF3x2")

# DEF3 is usually drawn with node labels 0,3,4,5,6,7; ids must be dense, so the
# labels are mapped in order.  ``DEF3_LABELS[label] -> id``.
DEF3_LABELS = {0: 0, 3: 1, 4: 2, 5: 3, 6: 4, 7: 5}


def gen_fixture(name: str) -> TapInstance:
    if name == "PATH3":
        inst = TapInstance.build(3, 0, [(0, 1), (1, 2)], [(0, 2)])
    elif name == "STAR4":
        inst = TapInstance.build(5, 0, [(0, i) for i in range(1, 5)], [(1, 2), (3, 4)])
    elif name == "DEF3":
        L = DEF3_LABELS
        inst = TapInstance.build(
            6, L[0], [(L[0], L[3]), (L[3], L[4]), (L[3], L[5]), (L[5], L[6]), (L[5], L[7])],
            [(L[4], L[7]), (L[4], L[6]), (L[0], L[7])])
    elif name == "DEF3x2":
        inst = _def3x2()
    else:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return shadow_close(inst)


def def3x2_gadgets() -> list[dict[int, int]]:
    """Label maps (DEF3 label -> id) for the two gadgets of DEF3x2."""
    return [{0: g, 3: g + 1, 4: g + 2, 5: g + 3, 6: g + 4, 7: g + 5} for g in (1, 7)]


def _def3x2() -> TapInstance:
    # fresh root 0; gadget roots 1 and 7 joined by a link through 0
    edges, links = [], [(1, 7)]
    for L in def3x2_gadgets():
        edges += [(0, L[0]), (L[0], L[3]), (L[3], L[4]), (L[3], L[5]), (L[5], L[6]), (L[5], L[7])]
        links += [(L[4], L[7]), (L[4], L[6]), (L[0], L[7])]
    return TapInstance.build(13, 0, edges, links)


def gen_clawpath(k: int) -> tuple[TapInstance, dict[Link, Fraction]]:
    """Spine of ``k`` nodes, each the center of a claw with three leaves.

    Spine node ``i`` has id ``i`` (root 0); its leaves are ``k + 3i + j``.
    The returned assignment puts 1 on the spine end-to-end link and 1/2 on
    every claw leaf pair.  For ``k == 1`` the spine link does not exist and
    the single claw is a stem.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    edges = [(i, i + 1) for i in range(k - 1)]
    links: list[Link] = []
    x: dict[Link, Fraction] = {}
    for i in range(k):
        leaves = [k + 3 * i + j for j in range(3)]
        edges += [(i, l) for l in leaves]
        for a in range(3):
            for b in range(a + 1, 3):
                l = mklink(leaves[a], leaves[b])
                links.append(l)
                x[l] = Fraction(1, 2)
    if k >= 2:
        links.append((0, k - 1))
        x[(0, k - 1)] = Fraction(1)
    inst = shadow_close(TapInstance.build(4 * k, 0, edges, links))
    expected = Fraction(3 * k, 2) + (1 if k >= 2 else 0)
    assert sum(x.values()) == expected
    if k >= 2:
        assert not find_stems(inst)
    return inst, x


class TightFamilyError(InstanceError):
    """The tight-family construction failed its own verification."""

    def __init__(self, k: int, failures: list[str]):
        super().__init__(f"tight family k={k} failed self-check: " + "; ".join(failures))
        self.k = k
        self.failures = failures


@dataclass(frozen=True)
class TightBlock:
    v: int
    q: int  # the non-leaf child of v
    p: int
    a1: int
    a2: int
    b1: int
    b2: int


@dataclass
class TightReconstruction:
    k: int
    inst: TapInstance
    initial: tuple[int, int, int, int]  # (c, u1, u2, u3)
    blocks: list[TightBlock]
    solve_size: int = -1
    opt_size: int = -1
    trace: str = ""
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def tight_reconstruction(k: int, biconnected: bool = False, verify: bool = True) -> TightReconstruction:
    """Build the tight family and check it against its behavioural contract.

    Initial block: star ``c`` with leaves ``u1 < u2 < u3`` and links
    ``u1u2``, ``u2u3``.  Repeated block ``i``: root ``v`` with children ``b1``
    and ``q``; ``q`` has children ``p`` and ``b2``; ``p`` has children ``a1``
    and ``a2``, where ``a1`` is the previous block's root (``c`` for the
    first block).  Links ``a1a2, b1b2, a1b2, a2b1`` plus shadows.  The last
    block's ``v`` is the root.  Ids put ``b1 < b2 < a2`` so the matching
    picks ``b1b2``.  ``biconnected`` adds ``u2-q`` for the first block and
    ``q-q'`` between consecutive blocks.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    c, u1, u2, u3 = 0, 1, 2, 3
    edges = [(c, u1), (c, u2), (c, u3)]
    links: list[Link] = [(u1, u2), (u2, u3)]
    blocks: list[TightBlock] = []
    prev = c
    for i in range(k):
        b1, b2, a2, v, q, p = range(4 + 6 * i, 10 + 6 * i)
        edges += [(v, b1), (v, q), (q, p), (q, b2), (p, prev), (p, a2)]
        links += [(prev, a2), (b1, b2), (prev, b2), (a2, b1)]
        blocks.append(TightBlock(v, q, p, prev, a2, b1, b2))
        prev = v
    if biconnected:
        links.append((u2, blocks[0].q))
        links += [(x.q, y.q) for x, y in zip(blocks, blocks[1:])]
    inst = shadow_close(TapInstance.build(4 + 6 * k, prev, edges, links))
    rec = TightReconstruction(k, inst, (c, u1, u2, u3), blocks)
    if verify:
        _verify_tight(rec)
    return rec


def _verify_tight(rec: TightReconstruction) -> None:
    # imported here: the solver and oracle are heavier than the generators
    from .oracle import opt_cover
    from .solver import solve

    inst, k, fail = rec.inst, rec.k, rec.failures
    if not validate(inst).ok:
        fail.append("infeasible")
    for s, (x, y) in find_stems(inst).stems:
        where = next((f"q of block {i + 1}" for i, b in enumerate(rec.blocks) if b.q == s), f"node {s}")
        fail.append(f"not stemless: stem {s} ({where}) with twin link {x}-{y}")
    res = solve(inst, check=False)
    rec.solve_size, rec.trace = len(res.F), res.trace_text()
    if rec.solve_size != 3 * k + 2:
        fail.append(f"solver returned {rec.solve_size} links, expected {3 * k + 2}")
    shape = [(e.kind, e.gamma_size, e.deficient_roots) for e in res.trace]
    want = [("semiclosed", 2, ())] + [("simple-A", 0, ()), ("semiclosed", 2, ())] * k
    if shape != want:
        fail.append("trace shape differs from: initial semiclosed, then simple + semiclosed per block")
    rec.opt_size = opt_cover(inst).opt_size
    if rec.opt_size != 2 * k + 2:
        fail.append(f"optimum is {rec.opt_size}, expected {2 * k + 2}")


def gen_tight(k: int, biconnected: bool = False) -> TapInstance:
    """Tight family on ``4 + 6k`` nodes; raises :class:`TightFamilyError` unless
    every verified property holds."""
    rec = tight_reconstruction(k, biconnected)
    if not rec.ok:
        raise TightFamilyError(k, rec.failures)
    return rec.inst


def _ancestors(inst: TapInstance, v: int) -> list[int]:
    out = []
    while v != inst.root:
        v = inst.parent[v]
        out.append(v)
    return out


def _near_ancestor(inst: TapInstance, v: int, rng: random.Random, reach: int = 3) -> int:
    anc = _ancestors(inst, v)
    return anc[min(len(anc) - 1, int(rng.expovariate(1.0)) % reach)]


def _repair(inst: TapInstance, links: set[Link], rng: random.Random, banned: set[Link]) -> set[Link]:
    """Cover every uncovered tree-edge by a link from a deepest leaf below it
    to a proper ancestor of it."""
    covered = set()
    for u, v in links:
        covered.update(inst.path_edges(u, v))
    deepest = list(range(inst.node_count))
    order = sorted(range(inst.node_count), key=lambda v: (-inst.depth[v], v))
    for v in order:
        if v != inst.root:
            p = inst.parent[v]
            if inst.depth[deepest[v]] > inst.depth[deepest[p]]:
                deepest[p] = deepest[v]
    out = set(links)
    for c in order:
        if c == inst.root or c in covered:
            continue
        leaf = deepest[c]
        anc = _ancestors(inst, c)
        choices = [a for a in anc[:3] if mklink(leaf, a) not in banned] or anc
        l = mklink(leaf, rng.choice(choices))
        out.add(l)
        covered.update(inst.path_edges(*l))
    return out


def gen_random_stemless(n: int, seed: int, extra_link_factor: float = 0.6,
                        max_rounds: int = 50) -> TapInstance:
    """Seeded random stemless, shadow-closed, feasible instance on ``n`` nodes.

    Links are local: leaf pairs meet within a few levels and node-to-ancestor
    links climb a few levels, so the solver sees a mix of contraction types.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = random.Random(seed)
    # attach each node to one of the last ``window`` nodes: small windows give deep trees
    window = rng.randint(2, max(2, n))
    edges = [(rng.randrange(max(0, i - window), i), i) for i in range(1, n)]
    inst = TapInstance.build(n, 0, edges)
    leaves = inst.leaves
    under: dict[int, list[int]] = {}
    for l in leaves:
        for a in _ancestors(inst, l):
            under.setdefault(a, []).append(l)
    links: set[Link] = set()
    for _ in range(max(1, round(extra_link_factor * n))):
        if len(leaves) >= 2 and rng.random() < 0.5:
            a = rng.choice(leaves)
            top = _near_ancestor(inst, a, rng)
            others = [b for b in under[top] if b != a]
            if others:
                links.add(mklink(a, rng.choice(others)))
        else:
            u = rng.randrange(1, n)
            links.add(mklink(u, _near_ancestor(inst, u, rng)))
    banned: set[Link] = set()
    for _ in range(max_rounds):
        links = _repair(inst, links, rng, banned)
        cur = shadow_close(inst.with_links(links))
        twins = find_stems(cur).twin_links
        if not twins:
            assert validate(cur).ok
            return cur
        banned |= twins
        links = set(cur.links) - twins
    raise InstanceError(f"could not make a stemless instance (n={n}, seed={seed})")
