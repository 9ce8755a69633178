import itertools
import math

import pytest

from onlinesm.core import MultiStageProblem, Variant, divorces, is_stable, men_dominates
from onlinesm.errors import CapExceededError, ProtocolViolationError, VariantMismatchError
from onlinesm.generate import SplitMix64, random_multistage
from onlinesm.lattice import enumerate_stable, men_optimal, women_optimal
from onlinesm.multistage import (
    POLICIES,
    adversary3,
    adversary_stages12,
    block_extremes,
    brute_force_multistage,
    cyclic_block,
    greedy_chain,
    iterated_dominance,
    run_adversary_experiment,
    run_online,
)


def _problem(stages):
    return MultiStageProblem(Variant.WOMEN_ARRIVE, tuple(stages))


def test_cyclic_block_rejects_k1():
    with pytest.raises(ValueError):
        cyclic_block(1)


@pytest.mark.parametrize("k", range(2, 8))
def test_cyclic_block_has_two_stable_matchings(k):
    assert enumerate_stable(cyclic_block(k), backend="brute") == sorted(block_extremes(k), key=sorted)


def test_adversary_stage12_shape(adversary_stages):
    s1, s2 = adversary_stages
    assert s1.women == (1,) and s2.women == (1, 2, 3)
    assert enumerate_stable(s1) == [frozenset({(2, 1)})]
    assert set(enumerate_stable(s2)) == set(block_extremes(3))


def test_adversary3_against_men_optimal(adversary_stages):
    _, s2 = adversary_stages
    mh, mf = block_extremes(3)
    s3 = adversary3(4, mh)
    ms = enumerate_stable(s3)
    assert mf | {(4, 4)} in ms
    assert s3.woman_prefs[4][0] == 4


def test_adversary3_against_women_optimal(adversary_stages):
    mh, mf = block_extremes(3)
    s3 = adversary3(4, mf)
    assert enumerate_stable(s3) == [mh | {(4, 4)}]


def test_adversary3_rejects_other_choices():
    with pytest.raises(ProtocolViolationError):
        adversary3(4, frozenset())


def test_greedy_chain_on_adversary():
    s1, s2 = adversary_stages12(4)
    mh, mf = block_extremes(3)
    s3 = adversary3(4, mf)
    sol = greedy_chain(_problem([s1, s2, s3]))
    assert sol.matchings == (frozenset({(2, 1)}), mf, mh | {(4, 4)})
    assert sol.transitions == [0, 3]
    assert sol.total_divorces == 3


def test_greedy_chain_variant_check():
    block = cyclic_block(2)
    with pytest.raises(VariantMismatchError):
        greedy_chain(MultiStageProblem(Variant.MEN_LEAVE, (block, block.restrict([1], block.women))))


def test_run_online_rejects_unstable_policy():
    block = cyclic_block(3)
    with pytest.raises(ProtocolViolationError):
        run_online([block], lambda stages, hist: frozenset())


@pytest.mark.parametrize("n", [3, 4, 5])
def test_adversary_outcomes(n):
    greedy = run_adversary_experiment(n, POLICIES["greedy"])
    assert (greedy.branch, greedy.alg_cost, greedy.opt_cost) == ("case2", n - 1, 1)
    assert greedy.ratio == n - 1
    men = run_adversary_experiment(n, POLICIES["men-optimal"])
    assert (men.branch, men.alg_cost, men.opt_cost) == ("case1", 1, 0)
    assert men.ratio == math.inf


def test_brute_force_multistage_matches_product():
    rng = SplitMix64(61)
    for _ in range(60):
        p = random_multistage(rng, 4, [rng.randint(0, 2), rng.randint(2, 3), 4])
        layers = [enumerate_stable(s) for s in p.stages]
        best = min(sum(divorces(a, b) for a, b in zip(seq, seq[1:])) for seq in itertools.product(*layers))
        sol = brute_force_multistage(p)
        assert sol.total_divorces == best
        assert all(is_stable(s, m) for s, m in zip(p.stages, sol.matchings))


def test_brute_force_multistage_cap():
    block = cyclic_block(3)
    with pytest.raises(CapExceededError):
        brute_force_multistage(_problem([block, block]), cap=3)


def test_restricting_first_stage_to_men_optimal_costs_nothing():
    rng = SplitMix64(62)
    for _ in range(80):
        p = random_multistage(rng, 4, [rng.randint(0, 4), 4, 5])
        free = brute_force_multistage(p).total_divorces
        fixed = brute_force_multistage(p, first=[men_optimal(p.stages[0])]).total_divorces
        assert fixed == free


def test_iterated_dominance_carries_men_optimal():
    rng = SplitMix64(63)
    for _ in range(80):
        p = random_multistage(rng, 4, [rng.randint(0, 3), 4, 5])
        layers = [enumerate_stable(s) for s in p.stages]
        top = men_optimal(p.stages[0])
        for seq in itertools.product(*layers):
            out = iterated_dominance(p, seq, top)
            for t, (s, m) in enumerate(zip(p.stages, out)):
                assert is_stable(s, m)
                assert men_dominates(s, m, seq[t])
                if t:
                    assert divorces(out[t - 1], m) <= divorces(seq[t - 1], seq[t])
            assert sum(map(divorces, out, out[1:])) <= sum(map(divorces, seq, seq[1:]))


def test_policies_return_lattice_extremes():
    block = cyclic_block(4)
    assert run_online([block], POLICIES["men-optimal"]).matchings == (men_optimal(block),)
    assert run_online([block], POLICIES["women-optimal"]).matchings == (women_optimal(block),)
