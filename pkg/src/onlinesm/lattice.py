"""Deferred acceptance, stable-matching enumeration and maximum-weight stable matching.

The set of stable matchings of an instance is represented through its
rotation poset: every stable matching is obtained from the men-optimal one
by eliminating a closed (downward-closed) set of rotations. A maximum-weight
stable matching is then a maximum-weight closed set, which is a min-cut
problem.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx

from .core import Instance, Matching, Pair, Side, partner_maps
from .errors import CapExceededError, SMError

Number = Union[int, Fraction]
WeightFn = Mapping[Pair, Number]


def deferred_acceptance(inst: Instance, proposers: Side = Side.MAN) -> Matching:
    """Gale-Shapley; returns the proposer-optimal stable matching."""
    if proposers == Side.MAN:
        props, accept_rank = inst.man_prefs, inst.woman_rank
        order = inst.men
    else:
        props, accept_rank = inst.woman_prefs, inst.man_rank
        order = inst.women
    nxt = {p: 0 for p in order}
    held: Dict[int, int] = {}
    free = deque(order)
    while free:
        p = free.popleft()
        prefs = props[p]
        if nxt[p] >= len(prefs):
            continue
        q = prefs[nxt[p]]
        nxt[p] += 1
        cur = held.get(q)
        if cur is None:
            held[q] = p
        elif accept_rank[q][p] < accept_rank[q][cur]:
            held[q] = p
            free.append(cur)
        else:
            free.append(p)
    if proposers == Side.MAN:
        return frozenset((p, q) for q, p in held.items())
    return frozenset((q, p) for q, p in held.items())


def men_optimal(inst: Instance) -> Matching:
    return deferred_acceptance(inst, Side.MAN)


def women_optimal(inst: Instance) -> Matching:
    return deferred_acceptance(inst, Side.WOMAN)


def canonical_order(matchings) -> List[Matching]:
    return sorted(set(matchings), key=lambda m: sorted(m))


def matching_weight(m: Matching, f: WeightFn) -> Number:
    return sum((f.get(p, 0) for p in m), 0)


# ---------------------------------------------------------------------------
# Brute-force enumeration (reference oracle)


def _stable_fast(inst: Instance, wife: Dict[int, int], husband: Dict[int, int]) -> bool:
    wr = inst.woman_rank
    for u, prefs in inst.man_prefs.items():
        mine = wife.get(u)
        for w in prefs:
            if w == mine:
                break
            h = husband.get(w)
            if h is None or wr[w][u] < wr[w][h]:
                return False
    return True


def enumerate_stable_brute(inst: Instance, cap: Optional[int] = None) -> List[Matching]:
    """All stable matchings by scanning every maximum-cardinality matching.

    With complete lists a stable matching always has size
    ``min(|men|, |women|)``, so only those matchings are scanned.
    """
    men, women = inst.men, inst.women
    found = []
    if len(men) <= len(women):
        candidates = ((tuple(zip(men, ws))) for ws in itertools.permutations(women, len(men)))
    else:
        candidates = ((tuple(zip(us, women))) for us in itertools.permutations(men, len(women)))
    for pairs in candidates:
        wife = dict(pairs)
        husband = {w: u for u, w in pairs}
        if _stable_fast(inst, wife, husband):
            found.append(frozenset(pairs))
            if cap is not None and len(found) > cap:
                raise CapExceededError(cap, len(found))
    return canonical_order(found)


# ---------------------------------------------------------------------------
# Rotations


@dataclass(frozen=True)
class Rotation:
    """Cyclic exchange ``(u_0, w_0), ..., (u_{r-1}, w_{r-1})``.

    Eliminating it moves each ``u_i`` from ``w_i`` to ``w_{i+1 mod r}``.
    """

    pairs: Tuple[Pair, ...]

    def moves(self) -> List[Tuple[int, int, int]]:
        """``(man, old wife, new wife)`` for every man on the rotation."""
        r = len(self.pairs)
        return [(u, w, self.pairs[(i + 1) % r][1]) for i, (u, w) in enumerate(self.pairs)]

    def weight_delta(self, f: WeightFn) -> Number:
        return sum((f.get((u, new), 0) - f.get((u, old), 0) for u, old, new in self.moves()), 0)


@dataclass(frozen=True)
class RotationPoset:
    """Rotations of an instance listed in a valid elimination order.

    ``precedence`` holds index pairs ``(a, b)``: rotation ``a`` must be
    eliminated before rotation ``b``. The relation may contain redundant
    (transitive) edges. ``base`` is the men-optimal matching.
    """

    base: Matching
    rotations: Tuple[Rotation, ...]
    precedence: frozenset

    def predecessors(self) -> List[Set[int]]:
        preds: List[Set[int]] = [set() for _ in self.rotations]
        for a, b in self.precedence:
            preds[b].add(a)
        return preds

    def is_closed(self, subset) -> bool:
        s = set(subset)
        return all(a in s for a, b in self.precedence if b in s)

    def closed_subsets(self) -> Iterator[frozenset]:
        preds = self.predecessors()
        k = len(self.rotations)
        chosen: List[int] = []
        inside = [False] * k

        def rec(i: int) -> Iterator[frozenset]:
            if i == k:
                yield frozenset(chosen)
                return
            yield from rec(i + 1)
            if all(inside[p] for p in preds[i]):
                inside[i] = True
                chosen.append(i)
                yield from rec(i + 1)
                chosen.pop()
                inside[i] = False

        yield from rec(0)

    def matching_of(self, subset) -> Matching:
        """Stable matching reached by eliminating the rotations in ``subset``."""
        wife, _ = partner_maps(self.base)
        for i in sorted(subset):
            for u, old, new in self.rotations[i].moves():
                if wife[u] != old:
                    raise SMError(f"rotation {i} is not exposed; subset is not closed")
                wife[u] = new
        return frozenset(wife.items())


def build_rotation_poset(inst: Instance) -> RotationPoset:
    """Find all rotations along one maximal elimination chain and their order.

    Persons unmatched in the men-optimal matching are unmatched in every
    stable matching. A man never moves past the first such woman in his
    list, since she would block with him.
    """
    m0 = men_optimal(inst)
    wife, husband = partner_maps(m0)
    unmatched_women = {w for w in inst.women if w not in husband}
    base_husband = dict(husband)
    rank_w = inst.woman_rank

    def successor(u: int) -> Optional[int]:
        prefs = inst.man_prefs[u]
        for w in prefs[inst.man_rank[u][wife[u]] + 1:]:
            if w in unmatched_women:
                return None
            if rank_w[w][u] < rank_w[w][husband[w]]:
                return w
        return None

    rotations: List[Rotation] = []
    while True:
        succ = {u: successor(u) for u in wife}
        rot = _find_cycle(succ, husband, wife)
        if rot is None:
            break
        rotations.append(rot)
        for u, _old, new in rot.moves():
            wife[u] = new
        husband = {w: u for u, w in wife.items()}

    moves_to: Dict[Pair, int] = {}
    woman_moves: Dict[int, List[Tuple[int, int, int]]] = {}
    for idx, rot in enumerate(rotations):
        r = len(rot.pairs)
        for i, (u, old, new) in enumerate(rot.moves()):
            moves_to[(u, new)] = idx
            # woman ``new`` leaves her old partner u_{i+1} for u_i
            woman_moves.setdefault(new, []).append((idx, rot.pairs[(i + 1) % r][0], u))

    prec: Set[Tuple[int, int]] = set()
    for idx, rot in enumerate(rotations):
        for u, old, new in rot.moves():
            if (u, old) in moves_to:
                prec.add((moves_to[(u, old)], idx))
            ranks = inst.man_rank[u]
            for w in inst.man_prefs[u][ranks[old] + 1: ranks[new]]:
                ru = rank_w[w][u]
                hit = [j for j, frm, to in woman_moves.get(w, ()) if rank_w[w][to] < ru < rank_w[w][frm]]
                if hit:
                    if hit[0] != idx:
                        prec.add((hit[0], idx))
                elif rank_w[w][base_husband[w]] > ru:
                    raise SMError("rotation order is inconsistent; instance changed during construction?")
    return RotationPoset(m0, tuple(rotations), frozenset(prec))


def _find_cycle(succ: Dict[int, Optional[int]], husband: Dict[int, int], wife: Dict[int, int]) -> Optional[Rotation]:
    state: Dict[int, int] = {}  # 1 = on current walk, 2 = finished
    for start in sorted(succ):
        if start in state:
            continue
        walk = []
        u: Optional[int] = start
        while u is not None and u not in state:
            state[u] = 1
            walk.append(u)
            w = succ[u]
            u = husband[w] if w is not None else None
        if u is not None and state[u] == 1:
            cyc = walk[walk.index(u):]
            k = cyc.index(min(cyc))
            cyc = cyc[k:] + cyc[:k]
            return Rotation(tuple((v, wife[v]) for v in cyc))
        for v in walk:
            state[v] = 2
    return None


def enumerate_stable(inst: Instance, cap: Optional[int] = None, backend: str = "rotations") -> List[Matching]:
    """All stable matchings of ``inst`` in canonical order.

    ``backend`` is ``"rotations"`` (closed subsets of the rotation poset) or
    ``"brute"`` (filter every maximum matching; intended for at most 7+7
    persons).
    """
    if backend == "brute":
        return enumerate_stable_brute(inst, cap)
    if backend != "rotations":
        raise ValueError(f"unknown backend {backend!r}")
    poset = build_rotation_poset(inst)
    out = []
    for subset in poset.closed_subsets():
        out.append(poset.matching_of(subset))
        if cap is not None and len(out) > cap:
            raise CapExceededError(cap, len(out))
    return canonical_order(out)


# ---------------------------------------------------------------------------
# Maximum-weight closure and maximum-weight stable matching


def _to_integers(values: Sequence[Number]) -> List[int]:
    fr = [Fraction(v) for v in values]
    scale = 1
    for v in fr:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    return [int(v * scale) for v in fr]


def max_weight_closure(weights: Sequence[Number], precedence) -> frozenset:
    """Minimal maximum-weight closed subset.

    A subset is closed when ``a`` belongs to it whenever ``b`` does, for
    every ``(a, b)`` in ``precedence``. Among all optimal subsets the
    smallest one (their intersection) is returned: the source side of the
    minimum cut read off the residual graph.
    """
    ints = _to_integers(weights)
    g = nx.DiGraph()
    g.add_nodes_from(["s", "t"])
    g.add_nodes_from(range(len(ints)))
    for i, c in enumerate(ints):
        if c > 0:
            g.add_edge("s", i, capacity=c)
        elif c < 0:
            g.add_edge(i, "t", capacity=-c)
    for a, b in precedence:
        g.add_edge(b, a)  # no capacity attribute: infinite
    residual = nx.algorithms.flow.edmonds_karp(g, "s", "t")
    seen = {"s"}
    todo = deque(["s"])
    while todo:
        x = todo.popleft()
        for y, attr in residual[x].items():
            if y not in seen and attr["flow"] < attr["capacity"]:
                seen.add(y)
                todo.append(y)
    return frozenset(v for v in seen if v != "s")


def max_weight_stable(inst: Instance, f: WeightFn) -> Matching:
    """Stable matching of maximum total weight under ``f`` (missing pairs weigh 0).

    Ties go to the matching whose rotation set is smallest, i.e. the one
    closest to men-optimal.
    """
    poset = build_rotation_poset(inst)
    if not poset.rotations:
        return poset.base
    deltas = [rot.weight_delta(f) for rot in poset.rotations]
    return poset.matching_of(max_weight_closure(deltas, poset.precedence))
