"""Problem transformations.

* :func:`regularize` turns a women-arrive problem into one where
  ``|W1| <= |W2| = |U|`` so that every second-stage stable matching is
  perfect.
* :func:`reduce_leaving` and :func:`reduce_leave_arrive` turn departures of
  men into arrivals of women pinned to them.
* :func:`expand_college` turns a university-admission instance into a
  one-to-one instance with one man per seat.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from .core import (
    Instance,
    Matching,
    Person,
    TwoStageProblem,
    Variant,
    check_consistent,
    man,
    partner_maps,
    woman,
)
from .errors import MalformedInputError, VariantMismatchError
from .lattice import enumerate_stable, max_weight_stable, men_optimal


@dataclass(frozen=True)
class ReductionCert:
    """How the persons and matchings of a reduced problem relate to the original.

    Original persons keep their identifiers, so ``mapping`` is the identity
    on every person that survives. ``forced_pairs`` is present in every
    second-stage stable matching of the reduced problem and
    ``forced_first`` in every first-stage one.
    """

    mapping: Mapping[Person, Person] = field(default_factory=dict)
    added_persons: FrozenSet[Person] = frozenset()
    removed_persons: FrozenSet[Person] = frozenset()
    forced_pairs: Matching = frozenset()
    forced_first: Matching = frozenset()

    def inverse(self) -> Dict[Person, Person]:
        return {v: k for k, v in self.mapping.items()}

    def _drop(self, m: Iterable, persons: FrozenSet[Person]) -> Matching:
        return frozenset((u, w) for u, w in m if man(u) not in persons and woman(w) not in persons)

    def lift(self, stage: int, m: Iterable) -> Matching:
        """Image of an original stage-``stage`` matching (1 or 2)."""
        base = self._drop(m, self.removed_persons)
        return base | (self.forced_pairs if stage == 2 else self.forced_first)

    def project(self, stage: int, m: Iterable) -> Matching:
        return self._drop(m, self.added_persons)

    def then(self, other: "ReductionCert") -> "ReductionCert":
        """Compose with a certificate for a reduction applied afterwards."""
        mapping = {k: other.mapping[v] for k, v in self.mapping.items() if v in other.mapping}
        return ReductionCert(
            mapping,
            (self.added_persons - other.removed_persons) | other.added_persons,
            self.removed_persons | other.removed_persons,
            self._drop(self.forced_pairs, other.removed_persons) | other.forced_pairs,
            self._drop(self.forced_first, other.removed_persons) | other.forced_first,
        )


def _identity_cert(*instances: Instance) -> Dict[Person, Person]:
    persons = {p for inst in instances for p in inst.persons()}
    return {p: p for p in persons}


def _fresh(ids: Iterable[int], k: int) -> List[int]:
    start = max(ids, default=0) + 1
    return list(range(start, start + k))


def _add_tail_men(inst: Instance, targets: Sequence[int]) -> Tuple[Instance, List[int]]:
    """Add one new man per woman in ``targets``, standing in for "unmatched".

    New man ``t_i`` ranks ``targets[i]`` first, then the other targets, then
    every remaining woman in index order. Every woman ranks the new men
    below all existing men; a target ranks her own new man first among them.
    """
    extra = _fresh(inst.men, len(targets))
    own = dict(zip(targets, extra))
    rest = sorted(w for w in inst.women if w not in own)
    mp = dict(inst.man_prefs)
    for t, w in zip(extra, targets):
        mp[t] = tuple([w] + [x for x in targets if x != w] + rest)
    wp = {}
    for w, prefs in inst.woman_prefs.items():
        tail = [own[w]] + [t for t in extra if t != own[w]] if w in own else extra
        wp[w] = tuple(prefs) + tuple(tail)
    return Instance(inst.men + tuple(extra), inst.women, mp, wp), extra


def regularize(p: TwoStageProblem) -> Tuple[TwoStageProblem, ReductionCert]:
    """Make ``|W1| <= |W2| = |U|`` with the stable sets of both stages kept intact.

    Every added person is pinned to a person who is unmatched in all stable
    matchings, and is ranked by that person exactly where "unmatched" used
    to be, so the stable matchings of the new problem are those of the old
    one plus a fixed set of forced pairs.

    1. Women unmatched at stage 1 get a new man each, present at both
       stages; she ranks him below every real man.
    2. If stage 2 still has more women than men, each woman unmatched at
       stage 2 gets a new man in the same way (he is unmatched at stage 1).
    3. If stage 2 has fewer women than men, each unmatched stage-2 man gets
       a dummy woman at stage 2; he ranks her right after all real women.
    """
    if p.variant is not Variant.WOMEN_ARRIVE:
        raise VariantMismatchError("regularize expects a women-arrive problem")
    s1, s2 = p.stage1, p.stage2
    orig = _identity_cert(s1, s2)
    added: set = set()
    forced: set = set()
    forced_first: set = set()

    if len(s1.men) < len(s1.women):
        _, husband = partner_maps(men_optimal(s1))
        idle = sorted(w for w in s1.women if w not in husband)
        s2, extra = _add_tail_men(s2, idle)
        s1 = s2.restrict(s2.men, s1.women)
        forced_first |= set(zip(extra, idle))
        forced |= set(zip(extra, idle))
        added |= {man(t) for t in extra}

    if len(s2.women) > len(s2.men):
        _, husband = partner_maps(men_optimal(s2))
        spare = sorted(w for w in s2.women if w not in husband)
        s2, extra = _add_tail_men(s2, spare)
        s1 = s2.restrict(s2.men, s1.women)
        forced |= set(zip(extra, spare))
        added |= {man(t) for t in extra}
    elif len(s2.women) < len(s2.men):
        wife_map, _ = partner_maps(men_optimal(s2))
        lonely = sorted(u for u in s2.men if u not in wife_map)
        dummies = _fresh(s2.women, len(lonely))
        s2 = _pin(s2, lonely, dummies, own_first=False)
        forced |= set(zip(lonely, dummies))
        added |= {woman(w) for w in dummies}

    cert = ReductionCert({q: q for q in orig}, frozenset(added), frozenset(),
                         frozenset(forced), frozenset(forced_first))
    return TwoStageProblem(Variant.WOMEN_ARRIVE, s1, s2), cert


def _pin(inst: Instance, pinned_men: Sequence[int], new_women: Sequence[int],
         own_first: bool = True) -> Instance:
    """Add ``new_women[i]`` as the favourite of ``pinned_men[i]``.

    Each new woman ranks her own man first, then the others in index order.
    Her man ranks her first when ``own_first`` holds, otherwise just after
    his original list (she then stands for "unmatched"). Every other man
    gets the new women appended in index order.
    """
    men = list(inst.men)
    own = dict(zip(pinned_men, new_women))
    mp = {}
    for u in men:
        base = list(inst.man_prefs[u])
        if u in own:
            others = [w for w in new_women if w != own[u]]
            mp[u] = [own[u]] + base + others if own_first else base + [own[u]] + others
        else:
            mp[u] = base + list(new_women)
    ordered_men = sorted(men)
    wp = {w: list(prefs) for w, prefs in inst.woman_prefs.items()}
    for u, w in own.items():
        wp[w] = [u] + [v for v in ordered_men if v != u]
    return Instance(tuple(ordered_men), inst.women + tuple(new_women), mp, wp)


def reduce_leaving(p: TwoStageProblem) -> Tuple[TwoStageProblem, ReductionCert]:
    """Replace each departing man by a new stage-2 woman who is his mutual first choice."""
    if p.variant is not Variant.MEN_LEAVE:
        raise VariantMismatchError("reduce_leaving expects a men-leave problem")
    return _reduce_departures(p)


def reduce_leave_arrive(p: TwoStageProblem) -> Tuple[TwoStageProblem, ReductionCert]:
    """Departures handled as in :func:`reduce_leaving`; arriving women stay arrivals.

    An arriving woman has no stage-1 list over the departed men; they are
    appended to her list in index order.
    """
    if p.variant is not Variant.LEAVE_AND_ARRIVE:
        raise VariantMismatchError("reduce_leave_arrive expects a leave-and-arrive problem")
    return _reduce_departures(p)


def _reduce_departures(p: TwoStageProblem) -> Tuple[TwoStageProblem, ReductionCert]:
    s1, s2 = p.stage1, p.stage2
    stay = set(s2.men)
    gone = [u for u in sorted(s1.men) if u not in stay]
    new_women = sorted(set(s2.women) - set(s1.women))
    pinned = _fresh(set(s1.women) | set(s2.women), len(gone))

    # Stage-2 instance over all stage-1 men and all stage-2 women before pinning.
    mp = {}
    for u in s1.men:
        mp[u] = s2.man_prefs[u] if u in stay else tuple(s1.man_prefs[u]) + tuple(new_women)
    wp = {}
    for w in s2.women:
        wp[w] = s1.woman_prefs[w] if w in s1.woman_prefs else tuple(s2.woman_prefs[w]) + tuple(gone)
    base = Instance(tuple(sorted(s1.men)), s2.women, mp, wp)
    s2_new = _pin(base, gone, pinned) if gone else base

    persons = _identity_cert(s1, s2)
    cert = ReductionCert(
        {q: q for q in persons},
        frozenset(woman(w) for w in pinned),
        frozenset(),
        frozenset(zip(gone, pinned)),
    )
    return TwoStageProblem(Variant.WOMEN_ARRIVE, s1, s2_new), cert


def reduce_to_arrival(p: TwoStageProblem) -> Tuple[TwoStageProblem, ReductionCert]:
    """Route any supported variant to an equivalent women-arrive problem."""
    if p.variant is Variant.WOMEN_ARRIVE:
        return p, ReductionCert({q: q for q in _identity_cert(p.stage1, p.stage2)})
    if p.variant is Variant.MEN_LEAVE:
        return reduce_leaving(p)
    return reduce_leave_arrive(p)


# ---------------------------------------------------------------------------
# University admission

Assignment = Dict[int, int]  # student -> university


@dataclass(frozen=True)
class CollegeInstance:
    """Universities (the men's side, with capacities) and students (the women's side)."""

    capacities: Mapping[int, int]
    students: Tuple[int, ...]
    university_prefs: Mapping[int, Tuple[int, ...]]
    student_prefs: Mapping[int, Tuple[int, ...]]

    def __post_init__(self) -> None:
        bad = {u: c for u, c in self.capacities.items() if int(c) != c or c < 1}
        if bad:
            raise MalformedInputError(f"capacities must be positive integers: {bad}")
        # Reuse the one-to-one validation for completeness and strictness.
        Instance(tuple(sorted(self.capacities)), tuple(self.students),
                 self.university_prefs, self.student_prefs)

    @property
    def universities(self) -> List[Tuple[int, int]]:
        return sorted(self.capacities.items())

    def as_instance(self) -> Instance:
        return Instance(tuple(sorted(self.capacities)), tuple(self.students),
                        self.university_prefs, self.student_prefs)


SeatMap = Dict[int, Tuple[int, int]]  # seat id -> (university, seat number from 1)


def expand_college(ci: CollegeInstance) -> Tuple[Instance, SeatMap]:
    """One man per seat; each seat copies its university's list, students list seats in order."""
    seat_map: SeatMap = {}
    seats_of: Dict[int, List[int]] = {}
    sid = 0
    for u, cap in ci.universities:
        for j in range(1, cap + 1):
            sid += 1
            seat_map[sid] = (u, j)
            seats_of.setdefault(u, []).append(sid)
    man_prefs = {s: tuple(ci.university_prefs[u]) for s, (u, _) in seat_map.items()}
    woman_prefs = {w: tuple(s for u in ci.student_prefs[w] for s in seats_of[u]) for w in ci.students}
    return Instance(tuple(seat_map), tuple(ci.students), man_prefs, woman_prefs), seat_map


def project_assignment(m: Iterable, seat_map: SeatMap) -> Assignment:
    return {w: seat_map[s][0] for s, w in m}


def college_divorces(a1: Mapping[int, int], a2: Mapping[int, int]) -> int:
    """Students assigned in ``a1`` whose university differs (or is missing) in ``a2``."""
    return sum(1 for s, u in a1.items() if a2.get(s) != u)


def college_blocking_pairs(ci: CollegeInstance, a: Mapping[int, int]) -> List[Tuple[int, int]]:
    """(university, student) pairs blocking ``a`` under capacity semantics."""
    load: Dict[int, List[int]] = {u: [] for u in ci.capacities}
    for s, u in a.items():
        load[u].append(s)
    if any(len(v) > ci.capacities[u] for u, v in load.items()):
        raise MalformedInputError("assignment exceeds a capacity")
    out = []
    for s in ci.students:
        prefs = ci.student_prefs[s]
        mine = a.get(s)
        for u in prefs:
            if u == mine:
                break
            ranking = ci.university_prefs[u]
            if len(load[u]) < ci.capacities[u] or any(ranking.index(s) < ranking.index(x) for x in load[u]):
                out.append((u, s))
    return out


@dataclass(frozen=True)
class CollegeTwoStageProblem:
    """Fixed universities and capacities; students may only arrive."""

    stage1: CollegeInstance
    stage2: CollegeInstance

    def __post_init__(self) -> None:
        if dict(self.stage1.capacities) != dict(self.stage2.capacities):
            raise MalformedInputError("universities or capacities differ between stages")
        if not set(self.stage1.students) <= set(self.stage2.students):
            raise VariantMismatchError("stage-1 students must all be present at stage 2")
        check_consistent(self.stage1.as_instance(), self.stage2.as_instance())


def opt_two_stage_college(p: CollegeTwoStageProblem) -> Tuple[Assignment, Assignment]:
    """Seat-optimal first stage, then keep as many student-university links as possible."""
    inst1, seats = expand_college(p.stage1)
    inst2, seats2 = expand_college(p.stage2)
    assert seats == seats2
    m1 = men_optimal(inst1)
    a1 = project_assignment(m1, seats)
    same_univ = {s: [t for t, (v, _) in seats.items() if v == u] for s, (u, _) in seats.items()}
    weights = {(t, w): 1 for s, w in m1 for t in same_univ[s]}
    m2 = max_weight_stable(inst2, weights)
    return a1, project_assignment(m2, seats)


def stable_assignments(ci: CollegeInstance, backend: str = "brute") -> List[Assignment]:
    """Distinct stable assignments, via seat-level enumeration and projection."""
    inst, seats = expand_college(ci)
    seen = {}
    for m in enumerate_stable(inst, backend=backend):
        a = project_assignment(m, seats)
        seen[tuple(sorted(a.items()))] = a
    return [seen[k] for k in sorted(seen)]


def brute_force_college(p: CollegeTwoStageProblem) -> Tuple[Assignment, Assignment, int]:
    best = min(
        itertools.product(stable_assignments(p.stage1), stable_assignments(p.stage2)),
        key=lambda ab: college_divorces(*ab),
    )
    return best[0], best[1], college_divorces(*best)
