"""Seeded instance generators.

Randomness comes from SplitMix64 (generator id ``splitmix64-fy/1``):
state advances by ``0x9E3779B97F4A7C15`` and is mixed with the standard
finalizer. Bounded draws use rejection sampling, and permutations are
Fisher-Yates shuffles running from the last position down. Preference
lists are drawn men first, then women, each in increasing index order,
each as a shuffle of the opposite roster sorted by index. The same seed
yields the same files in any language following these rules.
"""
from __future__ import annotations

from typing import List, Optional, Sequence

from .core import Instance, MultiStageProblem, TwoStageProblem, Variant
from .multistage import adversary_stages12, cyclic_block
from .reductions import CollegeInstance, CollegeTwoStageProblem

PRNG_NAME = "splitmix64-fy/1"
_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)

    def permutation(self, items: Sequence[int]) -> List[int]:
        xs = list(items)
        for i in range(len(xs) - 1, 0, -1):
            j = self.below(i + 1)
            xs[i], xs[j] = xs[j], xs[i]
        return xs

    def subset(self, items: Sequence[int], k: int) -> List[int]:
        return sorted(self.permutation(sorted(items))[:k])


def random_instance(men: Sequence[int], women: Sequence[int], rng: SplitMix64) -> Instance:
    men, women = sorted(men), sorted(women)
    man_prefs = {u: rng.permutation(women) for u in men}
    woman_prefs = {w: rng.permutation(men) for w in women}
    return Instance(tuple(men), tuple(women), man_prefs, woman_prefs)


def random_two_stage(rng: SplitMix64, variant: Variant, men: int, women: int,
                     women1: Optional[int] = None, men2: Optional[int] = None) -> TwoStageProblem:
    """Random problem; ``women1`` is the stage-1 women count, ``men2`` the stage-2 men count."""
    if men < 0 or women < 0:
        raise ValueError("sizes must be non-negative")
    if women1 is not None and not 0 <= women1 <= women:
        raise ValueError("women1 must lie between 0 and women")
    if men2 is not None and not 0 <= men2 <= men:
        raise ValueError("men2 must lie between 0 and men")
    full = random_instance(range(1, men + 1), range(1, women + 1), rng)
    w1 = full.women if women1 is None else tuple(rng.subset(full.women, women1))
    u2 = full.men if men2 is None else tuple(rng.subset(full.men, men2))
    if variant is Variant.WOMEN_ARRIVE:
        return TwoStageProblem(variant, full.restrict(full.men, w1), full)
    if variant is Variant.MEN_LEAVE:
        return TwoStageProblem(variant, full, full.restrict(u2, full.women))
    return TwoStageProblem(variant, full.restrict(full.men, w1), full.restrict(u2, full.women))


def random_multistage(rng: SplitMix64, men: int, women_counts: Sequence[int]) -> MultiStageProblem:
    """Women-arrive problem where stage ``t`` has the first ``women_counts[t]`` arrivals."""
    if list(women_counts) != sorted(women_counts):
        raise ValueError("women counts must be non-decreasing")
    n_w = women_counts[-1]
    full = random_instance(range(1, men + 1), range(1, n_w + 1), rng)
    order = rng.permutation(full.women)
    stages = tuple(full.restrict(full.men, order[:k]) for k in women_counts)
    return MultiStageProblem(Variant.WOMEN_ARRIVE, stages)


def random_college(rng: SplitMix64, universities: int, students: int, max_cap: int,
                   students1: Optional[int] = None) -> CollegeTwoStageProblem:
    if universities < 1 or max_cap < 1 or students < 0:
        raise ValueError("need at least one university and positive capacities")
    if students1 is not None and not 0 <= students1 <= students:
        raise ValueError("students1 must lie between 0 and students")
    caps = {u: rng.randint(1, max_cap) for u in range(1, universities + 1)}
    full = random_instance(range(1, universities + 1), range(1, students + 1), rng)
    s1 = full.women if students1 is None else tuple(rng.subset(full.women, students1))
    part = full.restrict(full.men, s1)
    return CollegeTwoStageProblem(
        CollegeInstance(caps, part.women, part.man_prefs, part.woman_prefs),
        CollegeInstance(caps, full.women, full.man_prefs, full.woman_prefs),
    )


def generate(kind: str, seed: int = 0, **params):
    """Problem value for one of the generator kinds.

    ``random``: params ``men``, ``women``, optional ``women1``, ``men2``,
    ``variant`` (default women-arrive). ``multistage_random``: ``men``,
    ``women_counts``. ``cyclic_block``: ``k``. ``adversary3_stage12``: ``n``.
    ``college_random``: ``universities``, ``students``, ``max_cap``,
    optional ``students1``.
    """
    rng = SplitMix64(seed)
    if kind == "random":
        variant = Variant(params.pop("variant", "women-arrive"))
        return random_two_stage(rng, variant, **params)
    if kind == "multistage_random":
        return random_multistage(rng, **params)
    if kind == "cyclic_block":
        inst = cyclic_block(int(params["k"]))
        return MultiStageProblem(Variant.WOMEN_ARRIVE, (inst,))
    if kind == "adversary3_stage12":
        s1, s2 = adversary_stages12(int(params["n"]))
        return TwoStageProblem(Variant.WOMEN_ARRIVE, s1, s2)
    if kind == "college_random":
        return random_college(rng, **params)
    raise ValueError(f"unknown generator kind {kind!r}")
