from itertools import combinations

import pytest

from tapaug.gens import gen_clawpath, gen_fixture, gen_random_stemless
from tapaug.instance import is_cover, maximal_links
from tapaug.oracle import BudgetExceeded, opt_cover


def exhaustive_opt(inst):
    links = sorted(inst.links)
    for size in range(1, len(links) + 1):
        for combo in combinations(links, size):
            if is_cover(inst, combo):
                return size
    raise AssertionError("infeasible")


@pytest.mark.parametrize("name,opt", [("PATH3", 1), ("STAR4", 2), ("DEF3", 2), ("DEF3x2", 5)])
def test_fixture_optima(name, opt):
    res = opt_cover(gen_fixture(name))
    assert res.opt_size == opt
    assert is_cover(gen_fixture(name), res.cover)


def test_claw_path_optimum():
    # two links per claw plus one more to cover the spine
    for k in range(2, 5):
        inst, _ = gen_clawpath(k)
        assert opt_cover(inst).opt_size == 2 * k + 1


@pytest.mark.parametrize("seed", range(80))
def test_matches_exhaustive_search(seed):
    inst = gen_random_stemless(3 + seed % 7, seed)
    if len(inst.links) > 24:
        pytest.skip("too many links for the exhaustive check")
    res = opt_cover(inst)
    assert res.opt_size == exhaustive_opt(inst)
    assert set(res.cover) <= set(maximal_links(inst))


def test_budget_exceeded_is_raised_not_guessed():
    inst = gen_random_stemless(18, 11)
    with pytest.raises(BudgetExceeded) as info:
        opt_cover(inst, limit=1)
    assert info.value.explored == 2


def test_deterministic_cover():
    inst = gen_random_stemless(15, 3)
    assert opt_cover(inst) == opt_cover(inst)
