"""Instances, matchings, stability and difference graphs.

Men and women are identified by integers in two separate namespaces; a
pair is always written ``(man, woman)``. A matching is a ``frozenset`` of
such pairs. Identifiers keep their meaning across the stages of a problem.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple, Union

from .errors import (
    DuplicateRankError,
    IncompleteListError,
    MalformedInputError,
    PreferenceDriftError,
    StructureViolationError,
    VariantMismatchError,
)

Pair = Tuple[int, int]
Matching = FrozenSet[Pair]


class Side(enum.IntEnum):
    MAN = 0
    WOMAN = 1


class Person(NamedTuple):
    side: Side
    index: int

    def __str__(self) -> str:
        return ("u" if self.side == Side.MAN else "w") + str(self.index)


def man(i: int) -> Person:
    return Person(Side.MAN, i)


def woman(j: int) -> Person:
    return Person(Side.WOMAN, j)


def make_matching(pairs: Iterable[Pair]) -> Matching:
    return frozenset((int(u), int(w)) for u, w in pairs)


def _check_list(owner: str, prefs: Sequence[int], expected: FrozenSet[int]) -> None:
    counts = Counter(prefs)
    dup = sorted(p for p, c in counts.items() if c > 1)
    if dup:
        raise DuplicateRankError(f"{owner} ranks {dup} more than once")
    if set(prefs) != expected:
        missing = sorted(expected - set(prefs))
        extra = sorted(set(prefs) - expected)
        raise IncompleteListError(
            f"preference list of {owner} is not a permutation of the opposite side"
            f" (missing {missing}, unknown {extra})"
        )


@dataclass(frozen=True, eq=False)
class Instance:
    """One stage: men, women and complete strict preference lists.

    ``man_prefs[u]`` lists all women from most to least preferred, and
    symmetrically for ``woman_prefs``. Ranks are precomputed so that every
    comparison is a dictionary lookup.
    """

    men: Tuple[int, ...]
    women: Tuple[int, ...]
    man_prefs: Mapping[int, Tuple[int, ...]]
    woman_prefs: Mapping[int, Tuple[int, ...]]
    man_rank: Dict[int, Dict[int, int]] = field(init=False, repr=False)
    woman_rank: Dict[int, Dict[int, int]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        men = tuple(self.men)
        women = tuple(self.women)
        if len(set(men)) != len(men) or len(set(women)) != len(women):
            raise MalformedInputError("duplicate person identifier in roster")
        man_prefs = {u: tuple(self.man_prefs.get(u, ())) for u in men}
        woman_prefs = {w: tuple(self.woman_prefs.get(w, ())) for w in women}
        if set(self.man_prefs) - set(men) or set(self.woman_prefs) - set(women):
            raise MalformedInputError("preference list given for a person outside the roster")
        wset, mset = frozenset(women), frozenset(men)
        for u in men:
            _check_list(str(man(u)), man_prefs[u], wset)
        for w in women:
            _check_list(str(woman(w)), woman_prefs[w], mset)
        object.__setattr__(self, "men", men)
        object.__setattr__(self, "women", women)
        object.__setattr__(self, "man_prefs", man_prefs)
        object.__setattr__(self, "woman_prefs", woman_prefs)
        object.__setattr__(self, "man_rank", {u: {w: r for r, w in enumerate(p)} for u, p in man_prefs.items()})
        object.__setattr__(self, "woman_rank", {w: {u: r for r, u in enumerate(p)} for w, p in woman_prefs.items()})

    @classmethod
    def from_prefs(cls, man_prefs: Mapping[int, Sequence[int]], woman_prefs: Mapping[int, Sequence[int]]) -> "Instance":
        return cls(tuple(sorted(man_prefs)), tuple(sorted(woman_prefs)),
                   {u: tuple(p) for u, p in man_prefs.items()},
                   {w: tuple(p) for w, p in woman_prefs.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (set(self.men) == set(other.men) and set(self.women) == set(other.women)
                and dict(self.man_prefs) == dict(other.man_prefs)
                and dict(self.woman_prefs) == dict(other.woman_prefs))

    __hash__ = None  # type: ignore[assignment]

    def restrict(self, men: Iterable[int], women: Iterable[int]) -> "Instance":
        """Sub-instance on the given persons, preserving relative orders."""
        mk, wk = set(men), set(women)
        return Instance(
            tuple(u for u in self.men if u in mk),
            tuple(w for w in self.women if w in wk),
            {u: tuple(w for w in self.man_prefs[u] if w in wk) for u in self.men if u in mk},
            {w: tuple(u for u in self.woman_prefs[w] if u in mk) for w in self.women if w in wk},
        )

    def persons(self) -> List[Person]:
        return [man(u) for u in self.men] + [woman(w) for w in self.women]


def partner_maps(m: Matching) -> Tuple[Dict[int, int], Dict[int, int]]:
    """Return ``(wife, husband)`` dictionaries of a matching."""
    wife = {u: w for u, w in m}
    husband = {w: u for u, w in m}
    return wife, husband


def validate_matching(inst: Instance, m: Iterable[Pair]) -> Matching:
    pairs = list(m)
    men = Counter(u for u, _ in pairs)
    women = Counter(w for _, w in pairs)
    twice = [str(man(u)) for u, c in men.items() if c > 1] + [str(woman(w)) for w, c in women.items() if c > 1]
    if twice:
        raise MalformedInputError(f"persons matched more than once: {', '.join(sorted(twice))}")
    mset, wset = set(inst.men), set(inst.women)
    unknown = [str(man(u)) for u in men if u not in mset] + [str(woman(w)) for w in women if w not in wset]
    if unknown:
        raise MalformedInputError(f"matching references unknown persons: {', '.join(sorted(unknown))}")
    return frozenset(pairs)


def blocking_pairs(inst: Instance, m: Iterable[Pair]) -> Set[Pair]:
    m = validate_matching(inst, m)
    wife, husband = partner_maps(m)
    out = set()
    for u in inst.men:
        prefs = inst.man_prefs[u]
        cut = inst.man_rank[u][wife[u]] if u in wife else len(prefs)
        for w in prefs[:cut]:
            h = husband.get(w)
            if h is None or inst.woman_rank[w][u] < inst.woman_rank[w][h]:
                out.add((u, w))
    return out


def is_stable(inst: Instance, m: Iterable[Pair]) -> bool:
    return not blocking_pairs(inst, m)


def divorces(m1: Iterable[Pair], m2: Iterable[Pair]) -> int:
    """Number of pairs of ``m1`` that are absent from ``m2``."""
    return len(set(m1) - set(m2))


def men_dominates(inst: Instance, a: Iterable[Pair], b: Iterable[Pair]) -> bool:
    """True iff every man likes his partner in ``a`` at least as much as in ``b``.

    Being unmatched ranks below every partner.
    """
    wa, _ = partner_maps(frozenset(a))
    wb, _ = partner_maps(frozenset(b))
    worst = len(inst.women)
    for u in inst.men:
        ra = inst.man_rank[u][wa[u]] if u in wa else worst
        rb = inst.man_rank[u][wb[u]] if u in wb else worst
        if ra > rb:
            return False
    return True


# ---------------------------------------------------------------------------
# Two-stage and multi-stage problems


class Variant(enum.Enum):
    WOMEN_ARRIVE = "women-arrive"
    MEN_LEAVE = "men-leave"
    LEAVE_AND_ARRIVE = "leave-and-arrive"


def check_consistent(a: Instance, b: Instance) -> None:
    """Raise unless ``a`` and ``b`` agree on preferences between shared persons."""
    men = set(a.men) & set(b.men)
    women = set(a.women) & set(b.women)
    for u in sorted(men):
        pa = [w for w in a.man_prefs[u] if w in women]
        pb = [w for w in b.man_prefs[u] if w in women]
        if pa != pb:
            raise PreferenceDriftError(f"preferences of {man(u)} change between stages")
    for w in sorted(women):
        pa = [u for u in a.woman_prefs[w] if u in men]
        pb = [u for u in b.woman_prefs[w] if u in men]
        if pa != pb:
            raise PreferenceDriftError(f"preferences of {woman(w)} change between stages")


def check_nesting(variant: Variant, a: Instance, b: Instance) -> None:
    ma, mb, wa, wb = set(a.men), set(b.men), set(a.women), set(b.women)
    if variant is Variant.WOMEN_ARRIVE:
        ok = ma == mb and wa <= wb
    elif variant is Variant.MEN_LEAVE:
        ok = wa == wb and mb <= ma
    else:
        ok = mb <= ma and wa <= wb
    if not ok:
        raise VariantMismatchError(f"rosters of consecutive stages do not fit variant {variant.value}")


@dataclass(frozen=True)
class TwoStageProblem:
    variant: Variant
    stage1: Instance
    stage2: Instance

    def __post_init__(self) -> None:
        check_nesting(self.variant, self.stage1, self.stage2)
        check_consistent(self.stage1, self.stage2)


@dataclass(frozen=True)
class MultiStageProblem:
    variant: Variant
    stages: Tuple[Instance, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise MalformedInputError("a multi-stage problem needs at least one stage")
        for a, b in zip(self.stages, self.stages[1:]):
            check_nesting(self.variant, a, b)
            check_consistent(a, b)

    def pair(self, t: int) -> TwoStageProblem:
        """The two-stage problem formed by stages ``t`` and ``t + 1`` (0-based)."""
        return TwoStageProblem(self.variant, self.stages[t], self.stages[t + 1])


# ---------------------------------------------------------------------------
# Difference graphs


class CycleKind(enum.Enum):
    TYPE_I = "I"
    TYPE_II = "II"


@dataclass(frozen=True)
class Path:
    """Alternating path; ``sources[i]`` is 0 or 1 for the edge ``vertices[i]``-``vertices[i+1]``."""

    vertices: Tuple[Person, ...]
    sources: Tuple[int, ...]

    def edges(self) -> List[Tuple[Pair, int]]:
        return [(_as_pair(a, b), s) for a, b, s in zip(self.vertices, self.vertices[1:], self.sources)]


@dataclass(frozen=True)
class Cycle:
    """Alternating cycle; the last edge joins ``vertices[-1]`` back to ``vertices[0]``."""

    vertices: Tuple[Person, ...]
    sources: Tuple[int, ...]
    kind: Optional[CycleKind] = None

    def edges(self) -> List[Tuple[Pair, int]]:
        vs = self.vertices
        return [(_as_pair(vs[i], vs[(i + 1) % len(vs)]), s) for i, s in enumerate(self.sources)]


Component = Union[Path, Cycle]


@dataclass(frozen=True)
class DiffGraph:
    components: Tuple[Component, ...]

    @property
    def paths(self) -> List[Path]:
        return [c for c in self.components if isinstance(c, Path)]

    @property
    def cycles(self) -> List[Cycle]:
        return [c for c in self.components if isinstance(c, Cycle)]

    def edges(self) -> List[Tuple[Pair, int]]:
        return [e for c in self.components for e in c.edges()]


def _as_pair(a: Person, b: Person) -> Pair:
    return (a.index, b.index) if a.side == Side.MAN else (b.index, a.index)


def diff_graph(inst: Instance, m: Iterable[Pair], m_prime: Iterable[Pair]) -> DiffGraph:
    """Decompose ``m △ m_prime`` into alternating paths and cycles.

    Edges from ``m`` are tagged 0, edges from ``m_prime`` are tagged 1.
    Paths start at their smaller endpoint; cycles start at their smallest
    man and leave him along his ``m`` edge. Isolated vertices are dropped.
    """
    m = validate_matching(inst, m)
    m_prime = validate_matching(inst, m_prime)
    adj: Dict[Person, List[Tuple[Person, int]]] = {}
    for tag, pairs in ((0, m - m_prime), (1, m_prime - m)):
        for u, w in pairs:
            adj.setdefault(man(u), []).append((woman(w), tag))
            adj.setdefault(woman(w), []).append((man(u), tag))

    def walk(start: Person, first: Tuple[Person, int]) -> Tuple[List[Person], List[int]]:
        verts, tags = [start], []
        cur, tag = first
        while True:
            tags.append(tag)
            if cur == start:
                return verts, tags
            verts.append(cur)
            nxt = [e for e in adj[cur] if e[1] != tag]
            if not nxt:
                return verts, tags
            cur, tag = nxt[0]

    seen: Set[Person] = set()
    comps: List[Component] = []
    # Path endpoints first (degree one), in sorted order, so each path starts
    # at its smaller endpoint.
    for v in sorted(adj):
        if v in seen or len(adj[v]) != 1:
            continue
        verts, tags = walk(v, adj[v][0])
        seen.update(verts)
        comps.append(Path(tuple(verts), tuple(tags)))
    for v in sorted(p for p in adj if p.side == Side.MAN):
        if v in seen:
            continue
        first = next(e for e in adj[v] if e[1] == 0)
        verts, tags = walk(v, first)
        seen.update(verts)
        comps.append(Cycle(tuple(verts), tuple(tags)))
    comps.sort(key=lambda c: min(c.vertices))
    return DiffGraph(tuple(comps))


def classify_components(inst: Instance, m1: Iterable[Pair], m2: Iterable[Pair]) -> DiffGraph:
    """Tag every cycle of ``G(m1, m2)`` as type I or II and check the path pattern.

    Type I: every man on the cycle strictly prefers his ``m2`` partner and
    every woman her ``m1`` partner; type II is the reverse. Every path must
    begin and end with ``m2`` edges, and its internal vertices follow the
    type I pattern. ``inst`` must rank every person in both matchings
    (use the stage-2 instance).
    """
    g = diff_graph(inst, m1, m2)
    wife1, husband1 = partner_maps(frozenset(m1))
    wife2, husband2 = partner_maps(frozenset(m2))

    def prefers_second(p: Person) -> bool:
        if p.side == Side.MAN:
            r = inst.man_rank[p.index]
            return r[wife2[p.index]] < r[wife1[p.index]]
        r = inst.woman_rank[p.index]
        return r[husband2[p.index]] < r[husband1[p.index]]

    def type_one(p: Person) -> bool:
        return prefers_second(p) == (p.side == Side.MAN)

    out: List[Component] = []
    for comp in g.components:
        if isinstance(comp, Path):
            if comp.sources[0] != 1 or comp.sources[-1] != 1:
                raise StructureViolationError(
                    f"path {' '.join(map(str, comp.vertices))} has an extremal edge outside the second matching")
            bad = [p for p in comp.vertices[1:-1] if not type_one(p)]
            if bad:
                raise StructureViolationError(f"internal path vertex {bad[0]} breaks the type I pattern")
            out.append(comp)
        else:
            flags = {type_one(p) for p in comp.vertices}
            if len(flags) != 1:
                raise StructureViolationError(
                    f"cycle {' '.join(map(str, comp.vertices))} is neither type I nor type II")
            kind = CycleKind.TYPE_I if flags.pop() else CycleKind.TYPE_II
            out.append(Cycle(comp.vertices, comp.sources, kind))
    return DiffGraph(tuple(out))
