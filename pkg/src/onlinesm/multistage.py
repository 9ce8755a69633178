"""More than two stages: online chaining, offline optimum, and the three-stage adversary."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .core import (
    Instance,
    Matching,
    MultiStageProblem,
    TwoStageProblem,
    Variant,
    divorces,
    is_stable,
    make_matching,
)
from .errors import CapExceededError, ProtocolViolationError, VariantMismatchError
from .lattice import enumerate_stable, men_optimal, women_optimal
from .reductions import regularize
from .twostage import dominance_transform, stage1_choice, stage2_choice


@dataclass(frozen=True)
class MultiStageSolution:
    matchings: Tuple[Matching, ...]

    @property
    def transitions(self) -> List[int]:
        return [divorces(a, b) for a, b in zip(self.matchings, self.matchings[1:])]

    @property
    def total_divorces(self) -> int:
        return sum(self.transitions)


# An online policy sees the stages revealed so far and its own earlier
# choices, and returns the matching for the newest stage.
Policy = Callable[[Sequence[Instance], Sequence[Matching]], Matching]


def greedy_policy(stages: Sequence[Instance], history: Sequence[Matching]) -> Matching:
    if not history:
        return stage1_choice(stages[0])
    return stage2_choice(history[-1], stages[-1])


def men_optimal_policy(stages: Sequence[Instance], history: Sequence[Matching]) -> Matching:
    return men_optimal(stages[-1])


def women_optimal_policy(stages: Sequence[Instance], history: Sequence[Matching]) -> Matching:
    return women_optimal(stages[-1])


POLICIES: Dict[str, Policy] = {
    "greedy": greedy_policy,
    "men-optimal": men_optimal_policy,
    "women-optimal": women_optimal_policy,
}


def run_online(stages: Sequence[Instance], policy: Policy) -> MultiStageSolution:
    """Reveal stages one at a time; the policy never sees a later stage."""
    history: List[Matching] = []
    for t in range(len(stages)):
        m = frozenset(policy(tuple(stages[: t + 1]), tuple(history)))
        if not is_stable(stages[t], m):
            raise ProtocolViolationError(f"policy returned an unstable matching at stage {t + 1}")
        history.append(m)
    return MultiStageSolution(tuple(history))


def greedy_chain(p: MultiStageProblem, policy: Policy = greedy_policy) -> MultiStageSolution:
    if p.variant is not Variant.WOMEN_ARRIVE:
        raise VariantMismatchError("greedy_chain runs on women-arrive problems")
    return run_online(p.stages, policy)


def brute_force_multistage(p: MultiStageProblem, cap: Optional[int] = 10**6,
                           first: Optional[Sequence[Matching]] = None,
                           backend: str = "brute") -> MultiStageSolution:
    """Offline optimum by dynamic programming over stable matchings.

    ``first`` restricts the stage-1 choices (default: all stable matchings).
    """
    layers = [enumerate_stable(s, backend=backend) for s in p.stages]
    if first is not None:
        layers[0] = sorted(set(frozenset(m) for m in first), key=sorted)
    if cap is not None and math.prod(len(x) for x in layers) > cap:
        raise CapExceededError(cap, math.prod(len(x) for x in layers))
    cost = {m: 0 for m in layers[0]}
    back: List[Dict[Matching, Matching]] = []
    for layer in layers[1:]:
        new, ptr = {}, {}
        for m in layer:
            prev = min(cost, key=lambda a: (cost[a] + divorces(a, m), sorted(a)))
            new[m] = cost[prev] + divorces(prev, m)
            ptr[m] = prev
        cost = new
        back.append(ptr)
    last = min(cost, key=lambda a: (cost[a], sorted(a)))
    seq = [last]
    for ptr in reversed(back):
        seq.append(ptr[seq[-1]])
    return MultiStageSolution(tuple(reversed(seq)))


def transfer(p: TwoStageProblem, m1: Matching, m2: Matching, m1_prime: Matching) -> Matching:
    """Dominance transform on any women-arrive pair, via regularization and back."""
    q, cert = regularize(p)
    out = dominance_transform(q, cert.lift(1, m1), cert.lift(2, m2), cert.lift(1, m1_prime))
    return cert.project(2, out)


def iterated_dominance(p: MultiStageProblem, matchings: Sequence[Matching], m1_prime: Matching) -> List[Matching]:
    """Carry a men-dominating first matching through every later stage."""
    out = [frozenset(m1_prime)]
    for t in range(len(p.stages) - 1):
        out.append(transfer(p.pair(t), matchings[t], matchings[t + 1], out[-1]))
    return out


# ---------------------------------------------------------------------------
# The adversarial family


def _cyc(i: int, k: int) -> int:
    return (i - 1) % k + 1


def cyclic_block(k: int) -> Instance:
    """``k`` men and women with exactly two stable matchings.

    ``u_i`` ranks ``w_i, w_{i+1}, ...`` cyclically; ``w_i`` ranks
    ``u_{i+1}, u_i, u_{i-1}, ...`` cyclically downwards.
    """
    if k < 2:
        raise ValueError("the cyclic block needs at least two men")
    men = {i: [_cyc(i + d, k) for d in range(k)] for i in range(1, k + 1)}
    women = {i: [_cyc(i + 1, k)] + [_cyc(i - d, k) for d in range(k - 1)] for i in range(1, k + 1)}
    return Instance.from_prefs(men, women)


def block_extremes(k: int) -> Tuple[Matching, Matching]:
    """Men-optimal ``{(u_i, w_i)}`` and women-optimal ``{(u_{i+1}, w_i)}`` of the block."""
    return (make_matching((i, i) for i in range(1, k + 1)),
            make_matching((_cyc(i + 1, k), i) for i in range(1, k + 1)))


def adversary_stages12(n: int) -> Tuple[Instance, Instance]:
    """Stage 1 (only ``w_1``) and stage 2 (block on n-1 plus ``u_n`` ranked last by all)."""
    if n < 3:
        raise ValueError("the adversary needs n >= 3")
    block = cyclic_block(n - 1)
    men = {u: list(block.man_prefs[u]) for u in block.men}
    men[n] = list(range(1, n))
    women = {w: list(block.woman_prefs[w]) + [n] for w in block.women}
    s2 = Instance.from_prefs(men, women)
    return s2.restrict(s2.men, [1]), s2


def adversary3(n: int, stage2_choice: Matching) -> Instance:
    """Stage 3 where ``w_n`` arrives, built against the algorithm's stage-2 choice.

    Against the men-optimal choice ``w_n`` ranks ``u_n`` first, which lets the
    women-optimal matching survive. Against the women-optimal choice ``w_n``
    becomes every block man's second choice and the only stable matching is
    ``{(u_i, w_i)}``.
    """
    _, s2 = adversary_stages12(n)
    if not is_stable(s2, stage2_choice):
        raise ProtocolViolationError("stage-2 choice is not stable")
    mh, mf = block_extremes(n - 1)
    choice = frozenset(stage2_choice)
    women = {w: list(s2.woman_prefs[w]) for w in s2.women}
    men = {u: list(s2.man_prefs[u]) for u in s2.men}
    men[n].append(n)
    if choice == mh:
        for u in range(1, n):
            men[u].append(n)
        women[n] = [n] + list(range(1, n))
    elif choice == mf:
        for u in range(1, n):
            men[u].insert(1, n)
        women[n] = list(range(1, n + 1))
    else:
        raise ProtocolViolationError("stage-2 choice is neither extreme matching of the block")
    return Instance.from_prefs(men, women)


@dataclass(frozen=True)
class AdversaryTranscript:
    n: int
    choices: Tuple[Matching, ...]
    branch: str
    alg_cost: int
    opt_cost: int
    opt_matchings: Tuple[Matching, ...]

    @property
    def ratio(self) -> float:
        return math.inf if self.opt_cost == 0 else self.alg_cost / self.opt_cost


def run_adversary_experiment(n: int, policy: Policy) -> AdversaryTranscript:
    s1, s2 = adversary_stages12(n)
    seen = run_online([s1, s2], policy)
    mh, _ = block_extremes(n - 1)
    branch = "case1" if seen.matchings[1] == mh else "case2"
    s3 = adversary3(n, seen.matchings[1])
    stages = (s1, s2, s3)
    sol = run_online(stages, policy)
    if sol.matchings[:2] != seen.matchings:
        raise ProtocolViolationError("policy is not deterministic")
    opt = brute_force_multistage(MultiStageProblem(Variant.WOMEN_ARRIVE, stages))
    return AdversaryTranscript(n, sol.matchings, branch, sol.total_divorces, opt.total_divorces, opt.matchings)
