"""Reading and writing problem files.

Grammar (one directive per line; ``#`` starts a comment; blank lines are
ignored; tokens are separated by whitespace)::

    file        := header stage+
    header      := "format" "smp" "1"
                   "kind" ("two-stage" | "multi-stage" | "college")
                   "variant" ("women-arrive" | "men-leave" | "leave-and-arrive")
    stage       := "stage" INT
                   "men" MAN*
                   "women" WOMAN*
                   ["capacities" (MAN "=" INT)*]        # college only
                   pref-line*
    pref-line   := (MAN | WOMAN) ":" PERSON*
    MAN         := "u" INT
    WOMAN       := "w" INT

Stages are numbered 1, 2, ... in order. Every person on a roster has
exactly one preference line listing the whole opposite roster of that
stage. ``two-stage`` and ``college`` files have exactly two stages; in a
``college`` file the men are universities and the women students, and the
variant must be ``women-arrive``. The canonical writer emits persons in
(side, index) order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .core import Instance, MultiStageProblem, TwoStageProblem, Variant
from .errors import DuplicateRankError, IncompleteListError, MalformedInputError, SMError
from .reductions import CollegeInstance, CollegeTwoStageProblem

FORMAT_VERSION = "1"
KINDS = ("two-stage", "multi-stage", "college")

Problem = Union[TwoStageProblem, MultiStageProblem, CollegeTwoStageProblem]


class ProblemSyntaxError(SMError):
    def __init__(self, line: int, column: int, message: str, source: str = "<string>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column


_PERSON = re.compile(r"([uw])(\d+)$")


@dataclass
class _Stage:
    number: int
    line: int
    men: Optional[List[int]] = None
    women: Optional[List[int]] = None
    capacities: Dict[int, int] = field(default_factory=dict)
    man_prefs: Dict[int, List[int]] = field(default_factory=dict)
    woman_prefs: Dict[int, List[int]] = field(default_factory=dict)
    pref_lines: Dict[Tuple[str, int], int] = field(default_factory=dict)


def _tokens(line: str) -> List[Tuple[int, str]]:
    return [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]


def parse_text(text: str, source: str = "<string>") -> Problem:
    header: Dict[str, str] = {}
    where: Dict[str, Tuple[int, int]] = {}  # header key -> position of its value
    stages: List[_Stage] = []

    def fail(ln: int, col: int, msg: str):
        raise ProblemSyntaxError(ln, col, msg, source)

    def person(ln: int, col: int, tok: str, side: Optional[str] = None) -> Tuple[str, int]:
        m = _PERSON.match(tok)
        if not m:
            fail(ln, col, f"expected a person like u3 or w1, got {tok!r}")
        if side and m.group(1) != side:
            fail(ln, col, f"expected a {'man' if side == 'u' else 'woman'}, got {tok}")
        return m.group(1), int(m.group(2))

    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        col, head = toks[0]
        if head in ("format", "kind", "variant"):
            if stages:
                fail(ln, col, f"{head!r} must appear before the first stage")
            if len(toks) != (3 if head == "format" else 2):
                fail(ln, col, f"malformed {head} line")
            header[head] = " ".join(t for _, t in toks[1:])
            where[head] = (ln, toks[1][0])
            continue
        if head == "stage":
            if len(toks) != 2 or not toks[1][1].isdigit():
                fail(ln, col, "expected 'stage N'")
            number = int(toks[1][1])
            if number != len(stages) + 1:
                fail(ln, toks[1][0], f"expected stage {len(stages) + 1}, got {number}")
            stages.append(_Stage(number, ln))
            continue
        if not stages:
            fail(ln, col, f"unexpected {head!r} before the first stage")
        st = stages[-1]
        if head in ("men", "women"):
            if getattr(st, head) is not None:
                fail(ln, col, f"duplicate {head} roster in stage {st.number}")
            side = "u" if head == "men" else "w"
            setattr(st, head, [person(ln, c, t, side)[1] for c, t in toks[1:]])
            continue
        if head == "capacities":
            for c, t in toks[1:]:
                name, _, cap = t.partition("=")
                _, idx = person(ln, c, name, "u")
                if not cap.isdigit() or int(cap) < 1:
                    fail(ln, c, f"capacity of {name} must be a positive integer")
                st.capacities[idx] = int(cap)
            continue
        if head.endswith(":"):
            side, idx = person(ln, col, head[:-1])
        elif len(toks) > 1 and toks[1][1] == ":":
            side, idx = person(ln, col, head)
            toks = toks[1:]
        else:
            fail(ln, col, f"unknown directive {head!r}")
        if st.men is None or st.women is None:
            fail(ln, col, "rosters ('men', 'women') must precede preference lines")
        if (side, idx) in st.pref_lines:
            fail(ln, col, f"second preference line for {side}{idx} in stage {st.number}")
        st.pref_lines[(side, idx)] = ln
        other = "w" if side == "u" else "u"
        prefs = [person(ln, c, t, other)[1] for c, t in toks[1:]]
        roster = st.women if side == "u" else st.men
        owner = f"{side}{idx}"
        if (idx not in (st.men if side == "u" else st.women)):
            fail(ln, col, f"{owner} is not on the stage {st.number} roster")
        dup = sorted({p for p in prefs if prefs.count(p) > 1})
        if dup:
            raise DuplicateRankError(f"{source}:{ln}: {owner} ranks {', '.join(f'{other}{d}' for d in dup)} more than once")
        if set(prefs) != set(roster):
            missing = sorted(set(roster) - set(prefs))
            unknown = sorted(set(prefs) - set(roster))
            raise IncompleteListError(
                f"{source}:{ln}: preference list of {owner} is incomplete"
                + (f" (missing {', '.join(f'{other}{d}' for d in missing)})" if missing else "")
                + (f" (not on roster: {', '.join(f'{other}{d}' for d in unknown)})" if unknown else ""))
        (st.man_prefs if side == "u" else st.woman_prefs)[idx] = prefs

    for key in ("format", "kind", "variant"):
        if key not in header:
            fail(1, 1, f"missing {key!r} header")
    if header["format"] != f"smp {FORMAT_VERSION}":
        fail(*where["format"], f"unsupported format {header['format']!r}")
    kind = header["kind"]
    if kind not in KINDS:
        fail(*where["kind"], f"unknown kind {kind!r}")
    try:
        variant = Variant(header["variant"])
    except ValueError:
        fail(*where["variant"], f"unknown variant {header['variant']!r}")
    if not stages:
        fail(1, 1, "no stages")

    instances = []
    for st in stages:
        if st.men is None or st.women is None:
            fail(st.line, 1, f"stage {st.number} lacks a roster")
        for side, roster, prefs in (("u", st.men, st.man_prefs), ("w", st.women, st.woman_prefs)):
            lacking = [i for i in roster if i not in prefs]
            if lacking:
                raise IncompleteListError(
                    f"{source}: stage {st.number}: no preference list for {', '.join(f'{side}{i}' for i in lacking)}")
        instances.append(Instance(tuple(st.men), tuple(st.women), st.man_prefs, st.woman_prefs))

    if kind in ("two-stage", "college") and len(instances) != 2:
        fail(stages[-1].line, 1, f"a {kind} file needs exactly two stages")
    if kind == "college":
        if variant is not Variant.WOMEN_ARRIVE:
            fail(1, 1, "college files only support women-arrive")
        cis = []
        for st, inst in zip(stages, instances):
            if set(st.capacities) != set(st.men):
                raise MalformedInputError(f"{source}: stage {st.number}: every university needs a capacity")
            cis.append(CollegeInstance(dict(st.capacities), inst.women, inst.man_prefs, inst.woman_prefs))
        return CollegeTwoStageProblem(*cis)
    if any(st.capacities for st in stages):
        fail(stages[0].line, 1, "capacities are only allowed in college files")
    if kind == "two-stage":
        return TwoStageProblem(variant, *instances)
    return MultiStageProblem(variant, tuple(instances))


def parse_problem(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), str(path))


def _stage_lines(inst: Instance, capacities: Optional[Dict[int, int]] = None) -> List[str]:
    men, women = sorted(inst.men), sorted(inst.women)
    out = ["men" + "".join(f" u{u}" for u in men), "women" + "".join(f" w{w}" for w in women)]
    if capacities is not None:
        out.append("capacities" + "".join(f" u{u}={capacities[u]}" for u in men))
    out += [f"u{u}:" + "".join(f" w{w}" for w in inst.man_prefs[u]) for u in men]
    out += [f"w{w}:" + "".join(f" u{u}" for u in inst.woman_prefs[w]) for w in women]
    return out


def write_text(problem: Problem) -> str:
    if isinstance(problem, CollegeTwoStageProblem):
        kind, variant = "college", Variant.WOMEN_ARRIVE
        stages = [(ci.as_instance(), dict(ci.capacities)) for ci in (problem.stage1, problem.stage2)]
    elif isinstance(problem, TwoStageProblem):
        kind, variant = "two-stage", problem.variant
        stages = [(problem.stage1, None), (problem.stage2, None)]
    else:
        kind, variant = "multi-stage", problem.variant
        stages = [(s, None) for s in problem.stages]
    lines = [f"format smp {FORMAT_VERSION}", f"kind {kind}", f"variant {variant.value}"]
    for t, (inst, caps) in enumerate(stages, 1):
        lines.append(f"stage {t}")
        lines += _stage_lines(inst, caps)
    return "\n".join(lines) + "\n"


def write_problem(problem: Problem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_text(problem))


def canonical(text: str) -> str:
    return write_text(parse_text(text))


def stages_of(problem: Problem) -> List[Instance]:
    if isinstance(problem, CollegeTwoStageProblem):
        return [problem.stage1.as_instance(), problem.stage2.as_instance()]
    if isinstance(problem, TwoStageProblem):
        return [problem.stage1, problem.stage2]
    return list(problem.stages)
