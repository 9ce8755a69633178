import itertools
from pathlib import Path

import pytest

from onlinesm.core import TwoStageProblem, Variant
from onlinesm.generate import SplitMix64, random_instance
from onlinesm.multistage import adversary_stages12, block_extremes, cyclic_block

FIXTURES = Path(__file__).parent / "fixtures"

# criterion label -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[label]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")


def rand_inst(rng, a, b):
    return random_instance(range(1, a + 1), range(1, b + 1), rng)


def arrival_problem(rng, a, b, c):
    full = rand_inst(rng, a, b)
    w1 = rng.subset(full.women, c)
    return TwoStageProblem(Variant.WOMEN_ARRIVE, full.restrict(full.men, w1), full)


def brute_blocking(inst, m):
    """Quadratic scan straight from the definition, using list positions."""
    wife = dict(m)
    husband = {w: u for u, w in m}
    out = set()
    for u in inst.men:
        for w in inst.women:
            if (u, w) in m:
                continue
            lu = list(inst.man_prefs[u])
            lw = list(inst.woman_prefs[w])
            u_wants = u not in wife or lu.index(w) < lu.index(wife[u])
            w_wants = w not in husband or lw.index(u) < lw.index(husband[w])
            if u_wants and w_wants:
                out.add((u, w))
    return out


def all_matchings(inst):
    """Every matching of any size (including partial ones)."""
    men, women = list(inst.men), list(inst.women)
    out = []
    for k in range(min(len(men), len(women)) + 1):
        for us in itertools.combinations(men, k):
            for ws in itertools.permutations(women, k):
                out.append(frozenset(zip(us, ws)))
    return out


@pytest.fixture
def rng():
    return SplitMix64(20240601)


@pytest.fixture
def block3():
    return cyclic_block(3)


@pytest.fixture
def block3_extremes():
    return block_extremes(3)


@pytest.fixture
def adversary_stages():
    return adversary_stages12(4)
