from functools import lru_cache

import pytest

from tapaug.gens import DEF3_LABELS, gen_random_stemless
from tapaug.oracle import opt_cover
from tapaug.solver import solve

CORPUS_SIZE = 500


def corpus_params():
    return [(2 + seed % 17, seed) for seed in range(CORPUS_SIZE)]


@lru_cache(maxsize=None)
def corpus():
    """(n, seed, instance, solve result, oracle result) for the random corpus."""
    out = []
    for n, seed in corpus_params():
        inst = gen_random_stemless(n, seed)
        out.append((n, seed, inst, solve(inst), opt_cover(inst)))
    return tuple(out)


def lab(*labels):
    """DEF3 drawing labels -> node ids."""
    ids = tuple(DEF3_LABELS[x] for x in labels)
    return ids[0] if len(ids) == 1 else ids


def link_lab(a, b):
    u, v = lab(a, b)
    return (min(u, v), max(u, v))


@pytest.fixture(scope="session")
def random_corpus():
    return corpus()


# acceptance verdicts, echoed again in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
