"""The optimal online algorithm for two stages, its dominance transform, and oracles."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Tuple

from .core import (
    CycleKind,
    Instance,
    Matching,
    Path,
    TwoStageProblem,
    Variant,
    classify_components,
    divorces,
    is_stable,
    men_dominates,
)
from .errors import (
    CapExceededError,
    DominancePreconditionError,
    PostconditionError,
    RegularityError,
    VariantMismatchError,
)
from .lattice import enumerate_stable, max_weight_stable, men_optimal


@dataclass(frozen=True)
class TwoStageSolution:
    m1: Matching
    m2: Matching

    @property
    def divorce_count(self) -> int:
        return divorces(self.m1, self.m2)


def stage1_choice(stage1: Instance) -> Matching:
    """First-stage decision; sees nothing of the future."""
    return men_optimal(stage1)


def stage2_choice(previous: Matching, stage2: Instance) -> Matching:
    """Stable matching of ``stage2`` keeping as many pairs of ``previous`` as possible."""
    keep = {p: 1 for p in previous}
    return max_weight_stable(stage2, keep)


def opt_two_stage(p: TwoStageProblem) -> TwoStageSolution:
    if p.variant is not Variant.WOMEN_ARRIVE:
        raise VariantMismatchError("opt_two_stage needs a women-arrive problem; reduce it first")
    m1 = stage1_choice(p.stage1)
    return TwoStageSolution(m1, stage2_choice(m1, p.stage2))


def brute_force_optimum(p: TwoStageProblem, cap: Optional[int] = 10**6,
                        backend: str = "brute") -> Tuple[TwoStageSolution, int]:
    """Exhaustive minimum of divorces over all pairs of stable matchings."""
    d1 = enumerate_stable(p.stage1, backend=backend)
    d2 = enumerate_stable(p.stage2, backend=backend)
    if cap is not None and len(d1) * len(d2) > cap:
        raise CapExceededError(cap, len(d1) * len(d2))
    best = min(itertools.product(d1, d2), key=lambda ab: divorces(*ab))
    sol = TwoStageSolution(*best)
    return sol, sol.divorce_count


def is_regular(p: TwoStageProblem) -> bool:
    return len(p.stage1.women) <= len(p.stage2.women) == len(p.stage2.men)


def dominance_transform(p: TwoStageProblem, m1: Matching, m2: Matching, m1_prime: Matching) -> Matching:
    """Build a stage-2 matching for ``m1_prime`` at most as costly as ``m2`` is for ``m1``.

    Keep ``m1_prime ∩ m2``; in ``G(m1_prime, m2)`` take the ``m2`` edges on
    paths and type I cycles and the ``m1_prime`` edges on type II cycles.
    The result is checked to be stable, to satisfy the divorce inequality,
    to divorce only men who were already divorced, and to men-dominate
    ``m2``; any failure raises :class:`PostconditionError`.
    """
    if not is_regular(p):
        raise RegularityError("dominance_transform needs a regular problem (|W1| <= |W2| = |U|)")
    if len(m2) != len(p.stage2.men):
        raise RegularityError("second-stage matching is not perfect")
    if not men_dominates(p.stage1, m1_prime, m1):
        raise DominancePreconditionError("m1_prime does not men-dominate m1")

    g = classify_components(p.stage2, m1_prime, m2)
    out = set(m1_prime & m2)
    for comp in g.components:
        take = 0 if (not isinstance(comp, Path) and comp.kind is CycleKind.TYPE_II) else 1
        out.update(pair for pair, src in comp.edges() if src == take)
    m2_prime = frozenset(out)

    if not is_stable(p.stage2, m2_prime):
        raise PostconditionError("transformed matching is not stable")
    if divorces(m1_prime, m2_prime) > divorces(m1, m2):
        raise PostconditionError("transformed matching has more divorces")
    if not divorced_men(m1_prime, m2_prime) <= divorced_men(m1, m2):
        raise PostconditionError("a man divorced in the new pair was not divorced before")
    if not men_dominates(p.stage2, m2_prime, m2):
        raise PostconditionError("transformed matching does not men-dominate m2")
    return m2_prime


def divorced_men(m1: Matching, m2: Matching) -> set:
    """Men whose pair in ``m1`` is gone in ``m2``."""
    return {u for u, _ in set(m1) - set(m2)}
