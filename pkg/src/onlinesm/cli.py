"""Command-line entry point.

Exit status: 0 on success, 1 on input or I/O errors, 2 when a verification
fails (oracle disagreement or a violated property).
"""
from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import fileformat
from .core import (
    MultiStageProblem,
    TwoStageProblem,
    Variant,
    classify_components,
    is_stable,
    men_dominates,
    partner_maps,
)
from .errors import SMError
from .generate import generate
from .lattice import enumerate_stable, matching_weight, max_weight_stable, men_optimal, women_optimal
from .multistage import POLICIES, brute_force_multistage, greedy_chain, run_adversary_experiment
from .reductions import (
    CollegeTwoStageProblem,
    brute_force_college,
    college_blocking_pairs,
    expand_college,
    opt_two_stage_college,
    reduce_to_arrival,
    regularize,
    stable_assignments,
)
from .report import assignment_report, component_summary, matching_report, to_json, to_text, verify_report
from .twostage import brute_force_optimum, dominance_transform, opt_two_stage

OUTPUT_DIR_ENV = "ONLINESM_OUTPUT_DIR"


class VerificationFailed(Exception):
    pass


def _resolve(path: Optional[str]) -> Optional[str]:
    if path is None or os.path.isabs(path):
        return path
    base = os.environ.get(OUTPUT_DIR_ENV)
    return os.path.join(base, path) if base else path


def _emit(rep: dict, args) -> None:
    text = to_text(rep)
    out = _resolve(args.out)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    js = _resolve(getattr(args, "json", None))
    if js:
        with open(js, "w", encoding="utf-8") as fh:
            fh.write(to_json(rep))


# ---------------------------------------------------------------------------
# solve


def _solve_two_stage(p: TwoStageProblem, oracle: bool) -> dict:
    q, cert = reduce_to_arrival(p)
    sol = opt_two_stage(q)
    ms = [sol.m1, cert.project(2, sol.m2)]
    best = brute_force_optimum(p)[1] if oracle else None
    # departed men only exist in the reduced problem's second stage
    comps = [component_summary(q.stage2, sol.m1, sol.m2)]
    return matching_report("solve", [p.stage1, p.stage2], ms, best, components=comps, variant=p.variant.value)


def _solve_multi(p: MultiStageProblem, oracle: bool) -> dict:
    sol = greedy_chain(p)
    best = brute_force_multistage(p).total_divorces if oracle else None
    return matching_report("solve", p.stages, sol.matchings, best, claims_optimal=len(p.stages) <= 2,
                           variant=p.variant.value)


def _solve_college(p: CollegeTwoStageProblem, oracle: bool) -> dict:
    a1, a2 = opt_two_stage_college(p)
    best = brute_force_college(p)[2] if oracle else None
    return assignment_report("solve", [a1, a2], best, variant="college")


def cmd_solve(args) -> int:
    problem = fileformat.parse_problem(args.file)
    if args.variant and not isinstance(problem, CollegeTwoStageProblem):
        problem = type(problem)(Variant(args.variant), *([problem.stage1, problem.stage2]
                                if isinstance(problem, TwoStageProblem) else [problem.stages]))
    if args.college and not isinstance(problem, CollegeTwoStageProblem):
        raise SMError("--college given but the file is not a college problem")
    if isinstance(problem, CollegeTwoStageProblem):
        rep = _solve_college(problem, args.oracle)
    elif isinstance(problem, TwoStageProblem):
        rep = _solve_two_stage(problem, args.oracle)
    else:
        rep = _solve_multi(problem, args.oracle)
    _emit(rep, args)
    if not verify_report(rep):
        raise VerificationFailed("report is not self-consistent")
    o = rep.get("oracle")
    if o and o["claims_optimal"] and not o["optimal"]:
        raise VerificationFailed("solution is not optimal")
    return 0


# ---------------------------------------------------------------------------
# enumerate / mwsm


def _pick_stage(problem, stage: int):
    stages = fileformat.stages_of(problem)
    if not 1 <= stage <= len(stages):
        raise SMError(f"stage {stage} does not exist (file has {len(stages)})")
    return stages[stage - 1]


def cmd_enumerate(args) -> int:
    inst = _pick_stage(fileformat.parse_problem(args.file), args.stage)
    ms = enumerate_stable(inst, cap=args.cap, backend=args.backend)
    rep = {"command": "enumerate", "stage": args.stage, "count": len(ms),
           "stable_matchings": [[list(p) for p in sorted(m)] for m in ms]}
    _emit(rep, args)
    return 0


def read_weights(path: str) -> Dict[tuple, Fraction]:
    out: Dict[tuple, Fraction] = {}
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, 1):
            toks = raw.split("#", 1)[0].split()
            if not toks:
                continue
            try:
                u, w, val = toks
                if not (u[0] == "u" and w[0] == "w"):
                    raise ValueError
                out[(int(u[1:]), int(w[1:]))] = Fraction(val)
            except (ValueError, ZeroDivisionError):
                raise fileformat.ProblemSyntaxError(ln, 1, "expected 'uI wJ WEIGHT'", path) from None
    return out


def cmd_mwsm(args) -> int:
    inst = _pick_stage(fileformat.parse_problem(args.file), args.stage)
    f = read_weights(args.weights)
    m = max_weight_stable(inst, f)
    weight = matching_weight(m, f)
    rep = {"command": "mwsm", "stage": args.stage, "matching": [list(p) for p in sorted(m)], "weight": str(weight)}
    if args.oracle:
        best = max(matching_weight(x, f) for x in enumerate_stable(inst, backend="brute"))
        rep["oracle_weight"] = str(best)
        rep["optimal"] = best == weight
    _emit(rep, args)
    if args.oracle and not rep["optimal"]:
        raise VerificationFailed("max_weight_stable disagrees with enumeration")
    return 0


# ---------------------------------------------------------------------------
# check


def _arrival_pairs(problem) -> List[TwoStageProblem]:
    if isinstance(problem, CollegeTwoStageProblem):
        i1, _ = expand_college(problem.stage1)
        i2, _ = expand_college(problem.stage2)
        return [TwoStageProblem(Variant.WOMEN_ARRIVE, i1, i2)]
    if isinstance(problem, TwoStageProblem):
        return [reduce_to_arrival(problem)[0]]
    if problem.variant is not Variant.WOMEN_ARRIVE:
        return [reduce_to_arrival(problem.pair(t))[0] for t in range(len(problem.stages) - 1)]
    return [problem.pair(t) for t in range(len(problem.stages) - 1)]


def check_pair(prop: str, p: TwoStageProblem) -> tuple:
    """Return ``(cases checked, violation messages)`` for one arrival pair."""
    bad: List[str] = []
    n = 0
    if prop == "stability":
        for t, inst in enumerate((p.stage1, p.stage2), 1):
            rot = enumerate_stable(inst)
            brute = enumerate_stable(inst, backend="brute")
            n += len(brute) + 2
            if rot != brute:
                bad.append(f"stage {t}: rotation and brute-force enumerations differ")
            bad += [f"stage {t}: unstable enumerated matching" for m in rot if not is_stable(inst, m)]
            for m in (men_optimal(inst), women_optimal(inst)):
                if not is_stable(inst, m):
                    bad.append(f"stage {t}: deferred acceptance returned an unstable matching")
        return n, bad
    if prop == "coherence":
        d1, d2 = enumerate_stable(p.stage1), enumerate_stable(p.stage2)
        for a, b in itertools.product(d1, d2):
            n += 1
            wa, ha = partner_maps(a)
            wb, hb = partner_maps(b)
            if not set(wa) <= set(wb):
                bad.append(f"man matched in {sorted(a)} is unmatched in {sorted(b)}")
            if any(w in hb for w in p.stage1.women if w not in ha):
                bad.append(f"woman unmatched in {sorted(a)} is matched in {sorted(b)}")
        return n, bad
    q, _ = regularize(p)
    d1, d2 = enumerate_stable(q.stage1), enumerate_stable(q.stage2)
    if prop == "structure":
        for a, b in itertools.product(d1, d2):
            n += 1
            try:
                classify_components(q.stage2, a, b)
            except SMError as exc:
                bad.append(str(exc))
        return n, bad
    if prop == "dominance":
        for a, a_prime in itertools.product(d1, d1):
            if not men_dominates(q.stage1, a_prime, a):
                continue
            for b in d2:
                n += 1
                try:
                    dominance_transform(q, a, b, a_prime)
                except SMError as exc:
                    bad.append(str(exc))
        return n, bad
    raise ValueError(f"unknown property {prop!r}")


def _check_college_assignments(p: CollegeTwoStageProblem) -> tuple:
    bad = []
    n = 0
    for t, ci in enumerate((p.stage1, p.stage2), 1):
        for a in stable_assignments(ci):
            n += 1
            if college_blocking_pairs(ci, a):
                bad.append(f"stage {t}: projected assignment {sorted(a.items())} has a blocking pair")
    return n, bad


def cmd_check(args) -> int:
    problem = fileformat.parse_problem(args.file)
    pairs = _arrival_pairs(problem)
    if args.jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(check_pair, [args.property] * len(pairs), pairs))
    else:
        results = [check_pair(args.property, p) for p in pairs]
    if args.property == "stability" and isinstance(problem, CollegeTwoStageProblem):
        results.append(_check_college_assignments(problem))
    checked = sum(n for n, _ in results)
    violations = [v for _, vs in results for v in vs]
    rep = {"command": "check", "property": args.property, "checked": checked,
           "violations": len(violations), "status": "pass" if not violations else "FAIL"}
    if violations:
        rep["details"] = violations[:20]
    _emit(rep, args)
    if violations:
        raise VerificationFailed(f"{len(violations)} violation(s) of {args.property}")
    return 0


# ---------------------------------------------------------------------------
# adversary / generate


def _adversary_row(n: int, alg: str) -> dict:
    t = run_adversary_experiment(n, POLICIES[alg])
    return {"n": n, "alg": alg, "branch": t.branch, "alg_cost": t.alg_cost, "opt_cost": t.opt_cost,
            "ratio": "inf" if t.opt_cost == 0 else t.alg_cost / t.opt_cost,
            "alg_matchings": [[list(p) for p in sorted(m)] for m in t.choices],
            "opt_matchings": [[list(p) for p in sorted(m)] for m in t.opt_matchings]}


def cmd_adversary(args) -> int:
    ns = args.n
    if args.jobs > 1 and len(ns) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_adversary_row, ns, [args.alg] * len(ns)))
    else:
        rows = [_adversary_row(n, args.alg) for n in ns]
    failures = []
    for r in rows:
        if r["branch"] == "case1":
            ok = r["opt_cost"] == 0 and r["alg_cost"] >= 1
        else:
            ok = r["opt_cost"] == 1 and r["alg_cost"] == r["n"] - 1
        if not ok:
            failures.append(r["n"])
    if len(rows) == 1:
        rep = {"command": "adversary", **rows[0]}
    else:
        rep = {"command": "adversary", "alg": args.alg,
               "transcripts": [[r["n"], r["branch"], r["alg_cost"], r["opt_cost"], r["ratio"]] for r in rows]}
    rep["lower_bound_reproduced"] = not failures
    _emit(rep, args)
    if failures:
        raise VerificationFailed(f"adversary figures not reproduced for n = {failures}")
    return 0


def cmd_generate(args) -> int:
    params: Dict[str, object] = {}
    if args.kind == "random":
        params = {"men": args.men, "women": args.women, "variant": args.variant}
        if args.women1 is not None:
            params["women1"] = args.women1
        if args.men2 is not None:
            params["men2"] = args.men2
    elif args.kind == "multistage_random":
        params = {"men": args.men, "women_counts": [int(x) for x in args.women_counts.split(",")]}
    elif args.kind == "cyclic_block":
        params = {"k": args.k}
    elif args.kind == "adversary3_stage12":
        params = {"n": args.n}
    elif args.kind == "college_random":
        params = {"universities": args.universities, "students": args.students, "max_cap": args.max_cap}
        if args.students1 is not None:
            params["students1"] = args.students1
    try:
        problem = generate(args.kind, args.seed, **params)
    except (TypeError, ValueError, KeyError) as exc:
        raise SMError(f"invalid parameters for {args.kind}: {exc}") from None
    text = fileformat.write_text(problem)
    out = _resolve(args.out)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="onlinesm", description="Online multi-stage stable matching.")
    sub = ap.add_subparsers(dest="command", required=True)

    def outputs(p):
        p.add_argument("--out", help="write the text report here instead of stdout")
        p.add_argument("--json", help="also write the structured report to this file")

    p = sub.add_parser("solve", help="run the online algorithm on a problem file")
    p.add_argument("file")
    p.add_argument("--variant", choices=[v.value for v in Variant], help="override the file's variant")
    p.add_argument("--oracle", action="store_true", help="also compute the offline optimum by brute force")
    p.add_argument("--college", action="store_true", help="require a college problem")
    outputs(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("enumerate", help="list all stable matchings of one stage")
    p.add_argument("file")
    p.add_argument("--stage", type=int, default=1)
    p.add_argument("--cap", type=int)
    p.add_argument("--backend", choices=["rotations", "brute"], default="rotations")
    outputs(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("mwsm", help="maximum-weight stable matching of one stage")
    p.add_argument("file")
    p.add_argument("--weights", required=True, help="lines 'uI wJ WEIGHT' (integers or fractions)")
    p.add_argument("--stage", type=int, default=1)
    p.add_argument("--oracle", action="store_true")
    outputs(p)
    p.set_defaults(func=cmd_mwsm)

    p = sub.add_parser("check", help="verify a structural property on every stable pair")
    p.add_argument("file")
    p.add_argument("--property", required=True, choices=["stability", "dominance", "coherence", "structure"])
    p.add_argument("--jobs", type=int, default=1)
    outputs(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("adversary", help="play the three-stage adversary")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--alg", choices=sorted(POLICIES), default="greedy")
    p.add_argument("--jobs", type=int, default=1)
    outputs(p)
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("generate", help="write a generated problem file")
    p.add_argument("kind", choices=["random", "multistage_random", "cyclic_block", "adversary3_stage12",
                                    "college_random"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--men", type=int, default=4)
    p.add_argument("--women", type=int, default=4)
    p.add_argument("--women1", type=int)
    p.add_argument("--men2", type=int)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="women-arrive")
    p.add_argument("--women-counts", default="1,2,3")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--universities", type=int, default=2)
    p.add_argument("--students", type=int, default=4)
    p.add_argument("--students1", type=int)
    p.add_argument("--max-cap", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 2
    except (SMError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
