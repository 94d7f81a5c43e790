import random

import pytest

from tapaug.contraction import ContractedTree, ContractionError
from tapaug.gens import gen_fixture, gen_random_stemless
from tapaug.instance import mklink

from conftest import lab, link_lab


def test_init_counts():
    s = ContractedTree(gen_fixture("STAR4"))
    assert len(s) == 5 and len(s.images) == 6
    assert len(ContractedTree(gen_fixture("PATH3"))) == 3
    d = ContractedTree(gen_fixture("DEF3"))
    assert len(d) == 6 and set(d.images) == set(gen_fixture("DEF3").links)


def test_contract_path3_to_single_node():
    ct = ContractedTree(gen_fixture("PATH3"))
    new = ct.contract([(0, 2)])
    assert ct.nodes == [new] and ct.root == new
    assert ct.members[new] == (0, 1, 2)
    assert not ct.images


def test_contract_star4_pair():
    ct = ContractedTree(gen_fixture("STAR4"))
    c = ct.contract([(1, 2)])
    assert ct.members[c] == (0, 1, 2) and ct.root == c
    assert ct.leaves() == [3, 4]
    assert ct.has_image(3, 4)
    assert ct.image((1, 2)) is None
    assert ct.image((1, 3)) == mklink(c, 3)


def test_contract_def3():
    ct = ContractedTree(gen_fixture("DEF3"))
    c = ct.contract([link_lab(4, 6)])
    assert set(ct.members[c]) == set(lab(4, 3, 5, 6))
    assert ct.leaves() == [lab(7)]
    assert ct.image(link_lab(0, 7)) == mklink(lab(0), lab(7))
    assert ct.image(link_lab(4, 7)) == mklink(c, lab(7))
    assert link_lab(4, 7) in ct.realizers[mklink(c, lab(7))]


def test_subtree_and_leaves():
    ct = ContractedTree(gen_fixture("DEF3"))
    nodes, leaves = ct.subtree_and_leaves(lab(3))
    assert nodes == sorted(lab(3, 4, 5, 6, 7)) and leaves == sorted(lab(4, 6, 7))
    assert ct.subtree_and_leaves(lab(6)) == ([lab(6)], [lab(6)])
    assert ct.subtree_and_leaves(ct.root)[0] == ct.nodes


def test_up_examples():
    assert ContractedTree(gen_fixture("PATH3")).up(2) == 0
    assert ContractedTree(gen_fixture("DEF3")).up(lab(6)) == lab(3)
    assert ContractedTree(gen_fixture("STAR4")).up(1) == 0
    ct = ContractedTree(gen_fixture("DEF3"))
    assert ct.up(lab(6), lambda l: l != link_lab(3, 6)) == lab(5)


def test_disconnected_union_rejected():
    ct = ContractedTree(gen_fixture("STAR4"))
    with pytest.raises(ContractionError, match="nothing"):
        ct.contract([])
    inst = gen_fixture("DEF3x2")
    ct = ContractedTree(inst)
    with pytest.raises(ContractionError, match="disconnected"):
        ct.contract([(3, 5), (9, 11)])
    with pytest.raises(ContractionError, match="not a live"):
        ct.contract([(3, 9)])


def test_to_dot_shapes():
    ct = ContractedTree(gen_fixture("STAR4"))
    ct.contract([(1, 2)])
    dot = ct.to_dot()
    assert dot.startswith('graph "T" {') and "shape=box" in dot and "style=dashed" in dot


class UnionFind:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        self.p[self.find(a)] = self.find(b)


@pytest.mark.parametrize("seed", range(60))
def test_quotient_matches_union_find(seed):
    """After random contractions the stored tree equals the quotient of the
    original tree by the merged classes, and images equal projected links."""
    inst = gen_random_stemless(6 + seed % 10, seed)
    rng = random.Random(seed)
    ct = ContractedTree(inst)
    uf = UnionFind(inst.node_count)
    while len(ct) > 1:
        img = rng.choice(ct.images)
        for a, b in [ct.realizer(img)]:
            for x in inst.tree_path(a, b):
                uf.union(x, a)
        ct.contract([img])
        cls = {}
        for v in range(inst.node_count):
            cls.setdefault(uf.find(v), set()).add(v)
        assert sorted(sorted(c) for c in cls.values()) == sorted(sorted(ct.members[c]) for c in ct.nodes)
        for c in ct.nodes:
            assert ct.is_compound(c) == (len(ct.members[c]) >= 2)
        quotient = set()
        for v in range(inst.node_count):
            if v != inst.root:
                a, b = ct.membership[v], ct.membership[inst.parent[v]]
                if a != b:
                    quotient.add(mklink(a, b))
        stored = {mklink(c, ct.parent[c]) for c in ct.nodes if c != ct.root}
        assert quotient == stored
        projected = {ct.image(l) for l in inst.links} - {None}
        assert projected == set(ct.images)
        for img2, reals in ct.realizers.items():
            assert all(ct.image(l) == img2 for l in reals)
