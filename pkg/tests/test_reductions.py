import pytest

from onlinesm.core import Instance, TwoStageProblem, Variant, divorces, is_stable
from onlinesm.errors import MalformedInputError, VariantMismatchError
from onlinesm.generate import SplitMix64, random_college
from onlinesm.lattice import enumerate_stable
from onlinesm.reductions import (
    CollegeInstance,
    CollegeTwoStageProblem,
    brute_force_college,
    college_blocking_pairs,
    college_divorces,
    expand_college,
    opt_two_stage_college,
    project_assignment,
    reduce_leave_arrive,
    reduce_leaving,
    reduce_to_arrival,
    regularize,
    stable_assignments,
)
from onlinesm.twostage import brute_force_optimum, is_regular, opt_two_stage

from conftest import arrival_problem, rand_inst


def _arrival(full, w1):
    return TwoStageProblem(Variant.WOMEN_ARRIVE, full.restrict(full.men, w1), full)


def _check_regularized(p):
    q, cert = regularize(p)
    assert is_regular(q)
    # stable sets correspond exactly at both stages
    for t, old, new in ((1, p.stage1, q.stage1), (2, p.stage2, q.stage2)):
        lifted = {cert.lift(t, m) for m in enumerate_stable(old, backend="brute")}
        assert lifted == set(enumerate_stable(new, backend="brute"))
        assert all(cert.project(t, m) in enumerate_stable(old) for m in lifted)
    assert brute_force_optimum(q)[1] == brute_force_optimum(p)[1]
    return q, cert


def test_regularize_adds_dummy_woman():
    rng = SplitMix64(41)
    p = _arrival(rand_inst(rng, 3, 2), [1])
    q, cert = _check_regularized(p)
    assert q.stage2.women == (1, 2, 3)
    assert len(cert.forced_pairs) == 1
    ((u, w),) = cert.forced_pairs
    assert w == 3 and q.stage2.man_prefs[u][2] == 3 and q.stage2.woman_prefs[3][0] == u
    assert q.stage1 == p.stage1


def test_regularize_adds_extra_man():
    rng = SplitMix64(42)
    p = _arrival(rand_inst(rng, 2, 3), [1, 2])
    q, cert = _check_regularized(p)
    assert q.stage2.men == (1, 2, 3)
    ((t, w),) = cert.forced_pairs
    assert t == 3
    # the extra man is ranked last by every woman and is unmatched at stage 1
    assert all(q.stage2.woman_prefs[x][-1] == 3 for x in q.stage2.women if x != w)
    assert all(3 not in dict(m) for m in enumerate_stable(q.stage1))


def test_regularize_pins_idle_first_stage_women():
    rng = SplitMix64(43)
    p = _arrival(rand_inst(rng, 1, 3), [1, 2])
    q, cert = _check_regularized(p)
    # one idle woman at stage 1, two more unmatched at stage 2
    assert q.stage2.men == (1, 2, 3)
    assert len(cert.forced_first) == 1 and cert.forced_first <= cert.forced_pairs
    ((d, w),) = cert.forced_first
    assert d == 2 and q.stage1.woman_prefs[w][0] == 1


def test_regularize_keeps_blockers_of_idle_women():
    # deleting the idle woman 3 would make {(1,1),(2,2)} stable
    full = Instance.from_prefs({1: [2, 3, 1, 4], 2: [1, 3, 2, 4]},
                               {1: [1, 2], 2: [2, 1], 3: [1, 2], 4: [2, 1]})
    p = _arrival(full, [1, 2, 3, 4])
    q, cert = _check_regularized(p)
    assert cert.lift(1, {(1, 1), (2, 2)}) not in enumerate_stable(q.stage1)


def test_regularize_preserves_optimum_random():
    rng = SplitMix64(44)
    for _ in range(300):
        a, b = rng.randint(1, 5), rng.randint(1, 5)
        _check_regularized(arrival_problem(rng, a, b, rng.randint(0, b)))


def test_regularize_rejects_other_variants():
    inst = rand_inst(SplitMix64(1), 2, 2)
    with pytest.raises(VariantMismatchError):
        regularize(TwoStageProblem(Variant.MEN_LEAVE, inst, inst.restrict([1], inst.women)))


def _leave_problem(rng, a, b, stay):
    full = rand_inst(rng, a, b)
    return TwoStageProblem(Variant.MEN_LEAVE, full, full.restrict(rng.subset(full.men, stay), full.women))


def _check_departures(p, reducer):
    q, cert = reducer(p)
    assert q.variant is Variant.WOMEN_ARRIVE
    assert all(cert.forced_pairs <= m for m in enumerate_stable(q.stage2, backend="brute"))
    assert brute_force_optimum(q)[1] == brute_force_optimum(p)[1]
    sol = opt_two_stage(q)
    assert divorces(sol.m1, sol.m2) == brute_force_optimum(p)[1]
    assert is_stable(p.stage2, cert.project(2, sol.m2))
    return q, cert


def test_reduce_leaving_example():
    p = _leave_problem(SplitMix64(45), 3, 3, 2)
    q, cert = _check_departures(p, reduce_leaving)
    (gone,) = set(p.stage1.men) - set(p.stage2.men)
    assert cert.forced_pairs == {(gone, 4)}
    assert q.stage2.women == (1, 2, 3, 4)


def test_reduce_leaving_everyone_leaves():
    p = _leave_problem(SplitMix64(46), 3, 2, 0)
    q, cert = _check_departures(p, reduce_leaving)
    assert len(cert.forced_pairs) == 3
    assert enumerate_stable(q.stage2) == [cert.forced_pairs]


def test_reduce_leaving_random():
    rng = SplitMix64(47)
    for _ in range(200):
        a, b = rng.randint(1, 4), rng.randint(1, 4)
        _check_departures(_leave_problem(rng, a, b, rng.randint(0, a)), reduce_leaving)


def test_reduce_leave_arrive_random():
    rng = SplitMix64(48)
    for _ in range(200):
        a, b = rng.randint(1, 4), rng.randint(1, 4)
        full = rand_inst(rng, a, b)
        p = TwoStageProblem(
            Variant.LEAVE_AND_ARRIVE,
            full.restrict(full.men, rng.subset(full.women, rng.randint(0, b))),
            full.restrict(rng.subset(full.men, rng.randint(0, a)), full.women),
        )
        _check_departures(p, reduce_leave_arrive)


def test_reduce_to_arrival_dispatch():
    rng = SplitMix64(49)
    p = arrival_problem(rng, 3, 3, 1)
    assert reduce_to_arrival(p)[0] is p
    with pytest.raises(VariantMismatchError):
        reduce_leaving(p)
    with pytest.raises(VariantMismatchError):
        reduce_leave_arrive(p)


def _college(caps, uprefs, sprefs):
    return CollegeInstance(caps, tuple(sorted(sprefs)), uprefs, sprefs)


def test_expand_college_seats():
    ci = _college({1: 2, 2: 1}, {1: (1, 2), 2: (2, 1)}, {1: (2, 1), 2: (1, 2)})
    inst, seats = expand_college(ci)
    assert seats == {1: (1, 1), 2: (1, 2), 3: (2, 1)}
    assert inst.man_prefs[1] == inst.man_prefs[2] == (1, 2)
    assert inst.woman_prefs[1] == (3, 1, 2)
    assert inst.woman_prefs[2] == (1, 2, 3)


def test_college_validation():
    with pytest.raises(MalformedInputError):
        _college({1: 0}, {1: (1,)}, {1: (1,)})
    ci = _college({1: 1}, {1: (1, 2)}, {1: (1,), 2: (1,)})
    with pytest.raises(MalformedInputError):
        college_blocking_pairs(ci, {1: 1, 2: 1})


def test_college_divorces_examples():
    assert college_divorces({}, {1: 1}) == 0
    assert college_divorces({1: 1, 2: 2}, {1: 1, 2: 1}) == 1
    assert college_divorces({1: 1}, {}) == 1


def test_college_blocking_examples():
    ci = _college({1: 2, 2: 1}, {1: (1, 2), 2: (2, 1)}, {1: (2, 1), 2: (1, 2)})
    assert college_blocking_pairs(ci, {1: 2, 2: 1}) == []
    # both universities have room for a student who would rather be there
    assert college_blocking_pairs(ci, {1: 1}) == [(2, 1), (1, 2), (2, 2)]


def test_projected_seat_matchings_are_college_stable():
    rng = SplitMix64(50)
    for _ in range(200):
        p = random_college(rng, rng.randint(1, 3), rng.randint(1, 5), 2)
        inst, seats = expand_college(p.stage2)
        for m in enumerate_stable(inst):
            assert college_blocking_pairs(p.stage2, project_assignment(m, seats)) == []
        for a in stable_assignments(p.stage2):
            assert college_blocking_pairs(p.stage2, a) == []


def test_college_unit_capacities_match_one_to_one():
    rng = SplitMix64(51)
    for _ in range(100):
        p = arrival_problem(rng, 3, 4, rng.randint(0, 4))
        ci = [CollegeInstance({u: 1 for u in s.men}, s.women, s.man_prefs, s.woman_prefs) for s in (p.stage1, p.stage2)]
        a1, a2 = opt_two_stage_college(CollegeTwoStageProblem(*ci))
        assert college_divorces(a1, a2) == opt_two_stage(p).divorce_count


def test_college_single_university_never_divorces():
    s2 = _college({1: 3}, {1: (3, 1, 2)}, {1: (1,), 2: (1,), 3: (1,)})
    s1 = _college({1: 3}, {1: (1, 2)}, {1: (1,), 2: (1,)})
    a1, a2 = opt_two_stage_college(CollegeTwoStageProblem(s1, s2))
    assert a1 == {1: 1, 2: 1} and a2 == {1: 1, 2: 1, 3: 1}
    assert brute_force_college(CollegeTwoStageProblem(s1, s2))[2] == 0


def test_college_problem_validation():
    s1 = _college({1: 1}, {1: (1,)}, {1: (1,)})
    s2 = _college({1: 2}, {1: (1,)}, {1: (1,)})
    with pytest.raises(MalformedInputError):
        CollegeTwoStageProblem(s1, s2)
    with pytest.raises(VariantMismatchError):
        CollegeTwoStageProblem(_college({1: 1}, {1: (1, 2)}, {1: (1,), 2: (1,)}),
                               _college({1: 1}, {1: (1,)}, {1: (1,)}))


def test_college_opt_matches_brute_force():
    rng = SplitMix64(52)
    for _ in range(150):
        p = random_college(rng, rng.randint(1, 3), rng.randint(1, 5), 2)
        a1, a2 = opt_two_stage_college(p)
        assert college_blocking_pairs(p.stage1, a1) == [] and college_blocking_pairs(p.stage2, a2) == []
        assert college_divorces(a1, a2) == brute_force_college(p)[2]


def test_instance_helper_roundtrip():
    inst = Instance.from_prefs({1: [1]}, {1: [1]})
    assert inst.restrict([1], [1]) == inst
