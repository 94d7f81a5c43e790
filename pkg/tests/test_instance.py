from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from tapaug.gens import gen_clawpath, gen_fixture, gen_random_stemless
from tapaug.instance import (InstanceError, TapInstance, find_stems, is_cover, is_overlapping_pair,
                             is_shadow_closed, maximal_links, parse_instance, serialize, shadow_close,
                             validate)

from conftest import link_lab

PATH3_TEXT = """tap 1
nodes 3
root 0
tree 0 1
tree 1 2
link 0 2
"""

STAR4_TEXT = """tap 1   # a star
nodes 5
root 0
tree 0 1
tree 0 2
tree 0 3
tree 0 4
link 1 2
link 3 4
"""


def test_parse_path3():
    inst = parse_instance(PATH3_TEXT)
    assert inst.node_count == 3 and inst.root == 0
    assert inst.depth[2] == 2
    assert inst.links == frozenset({(0, 2)})


def test_parse_star4_leaves_and_bytes():
    inst = parse_instance(STAR4_TEXT.encode())
    assert inst.leaves == [1, 2, 3, 4]
    assert inst.nonleaves == [0]


def test_parse_rejects_cycle():
    text = "tap 1\nnodes 3\nroot 0\ntree 0 1\ntree 1 2\n"
    cyc = "tap 1\nnodes 4\nroot 0\ntree 1 2\ntree 2 3\ntree 3 1\nlink 0 1\n"
    with pytest.raises(InstanceError, match="not a tree"):
        parse_instance(cyc)
    with pytest.raises(InstanceError, match="not covered"):
        parse_instance(text)
    assert parse_instance(text, check=False).links == frozenset()


@pytest.mark.parametrize("text,line", [
    ("tap 2\n", 1),
    ("tap 1\nnodes x\n", 2),
    ("tap 1\nnodes 2\nroot 0\n\n# c\nlink 0 1\n", 6),
    ("tap 1\nnodes 2\nroot 0\ntree 0 1\nbogus 1\n", 5),
])
def test_syntax_errors_carry_line_numbers(text, line):
    with pytest.raises(InstanceError) as info:
        parse_instance(text)
    assert info.value.line == line


def test_self_loop_and_range_rejected():
    with pytest.raises(InstanceError):
        TapInstance.build(2, 0, [(0, 1)], [(1, 1)])
    with pytest.raises(InstanceError):
        TapInstance.build(2, 0, [(0, 1)], [(0, 5)])


def test_duplicate_links_deduplicated():
    inst = TapInstance.build(3, 0, [(0, 1), (1, 2)], [(0, 2), (2, 0), (0, 2)])
    assert inst.links == frozenset({(0, 2)})


@pytest.mark.parametrize("name", ["PATH3", "STAR4", "DEF3", "DEF3x2"])
def test_serialize_round_trip(name):
    inst = gen_fixture(name)
    text = serialize(inst)
    again = parse_instance(text)
    assert serialize(again) == text
    assert again.links == inst.links and again.root == inst.root


def test_serialize_sorted_links():
    text = serialize(parse_instance(STAR4_TEXT))
    assert text.splitlines()[-2:] == ["link 1 2", "link 3 4"]


def test_root_of_degree_one_is_not_a_leaf():
    inst = parse_instance(PATH3_TEXT)
    assert inst.degree(0) == 1
    assert not inst.is_leaf(0)
    assert inst.leaves == [2]


def test_validate_reports_uncovered():
    p = parse_instance(PATH3_TEXT)
    d = validate(p.with_links([]))
    assert not d.ok and d.uncovered == ((0, 1), (1, 2))
    s = parse_instance(STAR4_TEXT)
    assert validate(s.with_links([(1, 2)])).uncovered == ((0, 3), (0, 4))
    assert validate(p).ok


def test_shadow_close_examples():
    p = shadow_close(parse_instance(PATH3_TEXT))
    assert p.links == {(0, 1), (1, 2), (0, 2)}
    s = shadow_close(parse_instance(STAR4_TEXT))
    assert s.links == {(1, 2), (3, 4), (0, 1), (0, 2), (0, 3), (0, 4)}
    d = gen_fixture("DEF3")
    for a, b in [(4, 3), (4, 5), (3, 5), (3, 7), (5, 7)]:
        assert link_lab(a, b) in d.links
    assert shadow_close(d) is d


def test_tree_path_examples():
    p = parse_instance(PATH3_TEXT)
    s = parse_instance(STAR4_TEXT)
    assert p.tree_path(0, 2) == [0, 1, 2]
    assert p.tree_path(1, 1) == [1]
    assert s.tree_path(1, 3) == [1, 0, 3]


def test_overlapping_pairs_on_claw_path():
    inst, _ = gen_clawpath(3)
    c0 = [3, 4, 5]  # leaves of the claw at spine node 0
    assert is_overlapping_pair(inst, (3, 4), (3, 5))
    assert not is_overlapping_pair(inst, (3, 4), (0, 2))
    assert is_overlapping_pair(inst, (3, 4), (3, 4))
    assert not is_overlapping_pair(inst, (c0[0], c0[1]), (6, 7))


def test_find_stems_examples():
    assert not find_stems(gen_fixture("STAR4"))
    assert not find_stems(gen_fixture("DEF3"))
    claw = TapInstance.build(4, 0, [(0, 1), (1, 2), (1, 3)], [(2, 3), (0, 2)])
    rep = find_stems(claw)
    # the degree-1 root counts like a leaf here, so 0-2 is a twin link as well
    assert rep.stems == ((1, (0, 2)), (1, (2, 3)))
    assert rep.twin_links == frozenset({(0, 2), (2, 3)})


def test_is_cover_examples():
    p = parse_instance(PATH3_TEXT)
    s = parse_instance(STAR4_TEXT)
    assert is_cover(p, [(0, 2)])
    assert not is_cover(s, [(1, 2)])
    assert is_cover(s, [(1, 2), (3, 4)])


def test_maximal_links_path3():
    assert maximal_links(gen_fixture("PATH3")) == [(0, 2)]
    assert maximal_links(gen_fixture("DEF3")) == sorted([link_lab(0, 7), link_lab(4, 6), link_lab(4, 7)])


@st.composite
def random_instances(draw):
    n = draw(st.integers(2, 14))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    edges = [(p, i) for i, p in zip(range(1, n), parents)]
    pairs = [(a, b) for a, b in combinations(range(n), 2)]
    links = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=8))
    return TapInstance.build(n, 0, edges, links)


@settings(max_examples=150, deadline=None)
@given(random_instances())
def test_shadow_close_properties(inst):
    closed = shadow_close(inst)
    assert is_shadow_closed(closed)
    assert shadow_close(closed) is closed
    for u, v in closed.links:
        path = closed.tree_path(u, v)
        w = closed.lca(u, v)
        assert len(path) == closed.depth[u] + closed.depth[v] - 2 * closed.depth[w] + 1
        for a, b in combinations(path, 2):
            assert (min(a, b), max(a, b)) in closed.links
    if not find_stems(inst):
        assert not find_stems(closed)


@settings(max_examples=100, deadline=None)
@given(random_instances(), st.data())
def test_overlap_is_symmetric(inst, data):
    links = sorted(shadow_close(inst).links)
    l1 = data.draw(st.sampled_from(links))
    l2 = data.draw(st.sampled_from(links))
    assert is_overlapping_pair(inst, l1, l2) == is_overlapping_pair(inst, l2, l1)


def test_leaf_incident_links_overlap_pairwise():
    # links at a leaf all share the leaf's pendant edge and contain the leaf
    for seed in range(40):
        inst = gen_random_stemless(12, seed)
        for w in inst.leaves:
            inc = inst.incident(w)
            for a, b in combinations(inc, 2):
                assert is_overlapping_pair(inst, a, b)


def test_random_generator_outputs_are_valid():
    inst = gen_random_stemless(12, 7)
    assert validate(inst).ok and is_shadow_closed(inst) and not find_stems(inst)
    assert serialize(gen_random_stemless(12, 7)) == serialize(inst)
    two = gen_random_stemless(2, 0)
    assert two.links == {(0, 1)}
