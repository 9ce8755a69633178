"""Reports: a JSON-ready dictionary plus a plain-text rendering of the same content."""
from __future__ import annotations

import json
from typing import Dict, List, Mapping, Optional, Sequence

from .core import Instance, Matching, classify_components, diff_graph, divorces
from .errors import StructureViolationError
from .reductions import college_divorces


def _pairs(m: Matching) -> List[List[int]]:
    return [list(p) for p in sorted(m)]


def component_summary(inst: Instance, a: Matching, b: Matching) -> Dict[str, int]:
    """Counts of paths and typed cycles in ``G(a, b)`` over ``inst`` (the later stage)."""
    try:
        g = classify_components(inst, a, b)
        kinds = [c.kind.value for c in g.cycles]
        return {"paths": len(g.paths), "type_i": kinds.count("I"), "type_ii": kinds.count("II"), "untyped": 0}
    except StructureViolationError:
        g = diff_graph(inst, a, b)
        return {"paths": len(g.paths), "type_i": 0, "type_ii": 0, "untyped": len(g.cycles)}


def matching_report(command: str, stages: Sequence[Instance], matchings: Sequence[Matching],
                    oracle: Optional[int] = None, claims_optimal: bool = True,
                    components: Optional[List[Dict[str, int]]] = None, **extra) -> dict:
    """``components`` overrides the per-transition summaries (needed when men leave)."""
    trans = [divorces(a, b) for a, b in zip(matchings, matchings[1:])]
    if components is None:
        components = [component_summary(stages[t + 1], matchings[t], matchings[t + 1])
                      for t in range(len(matchings) - 1)]
    rep = {
        "command": command,
        "matchings": [_pairs(m) for m in matchings],
        "divorces": trans,
        "total_divorces": sum(trans),
        "components": components,
    }
    if oracle is not None:
        rep["oracle"] = {"optimum": oracle, "optimal": sum(trans) == oracle, "claims_optimal": claims_optimal}
    rep.update(extra)
    return rep


def assignment_report(command: str, assignments: Sequence[Mapping[int, int]],
                      oracle: Optional[int] = None, **extra) -> dict:
    trans = [college_divorces(a, b) for a, b in zip(assignments, assignments[1:])]
    rep = {
        "command": command,
        "assignments": [[[s, u] for s, u in sorted(a.items())] for a in assignments],
        "divorces": trans,
        "total_divorces": sum(trans),
    }
    if oracle is not None:
        rep["oracle"] = {"optimum": oracle, "optimal": sum(trans) == oracle, "claims_optimal": True}
    rep.update(extra)
    return rep


def verify_report(rep: dict) -> bool:
    """Recompute every divorce figure from the embedded matchings or assignments."""
    if "matchings" in rep:
        ms = [frozenset(map(tuple, m)) for m in rep["matchings"]]
        trans = [divorces(a, b) for a, b in zip(ms, ms[1:])]
    elif "assignments" in rep:
        asg = [{s: u for s, u in a} for a in rep["assignments"]]
        trans = [college_divorces(a, b) for a, b in zip(asg, asg[1:])]
    else:
        return True
    ok = trans == rep["divorces"] and sum(trans) == rep["total_divorces"]
    if "oracle" in rep:
        ok = ok and rep["oracle"]["optimal"] == (sum(trans) == rep["oracle"]["optimum"])
    return ok


def to_json(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=True, default=str) + "\n"


def _fmt_pairs(pairs, left="u", right="w") -> str:
    return " ".join(f"({left}{a},{right}{b})" for a, b in pairs) or "(empty)"


def to_text(rep: dict) -> str:
    lines = [f"== {rep['command']} =="]
    if "matchings" in rep:
        for t, m in enumerate(rep["matchings"], 1):
            lines.append(f"stage {t:>2}  {_fmt_pairs(m)}")
    if "assignments" in rep:
        for t, a in enumerate(rep["assignments"], 1):
            lines.append(f"stage {t:>2}  " + (" ".join(f"w{s}->u{u}" for s, u in a) or "(empty)"))
    if "divorces" in rep:
        for t, d in enumerate(rep["divorces"], 1):
            comp = rep.get("components", [None] * len(rep["divorces"]))[t - 1]
            tail = ""
            if comp:
                tail = f"   paths={comp['paths']} typeI={comp['type_i']} typeII={comp['type_ii']}"
                if comp["untyped"]:
                    tail += f" untyped={comp['untyped']}"
            lines.append(f"divorces {t}->{t + 1}: {d}{tail}")
        lines.append(f"total divorces: {rep['total_divorces']}")
    if "oracle" in rep:
        o = rep["oracle"]
        if o["optimal"]:
            verdict = "confirmed"
        elif o["claims_optimal"]:
            verdict = "FAILED"
        else:
            verdict = "no (online result above offline optimum)"
        lines.append(f"offline optimum: {o['optimum']}")
        lines.append(f"optimal: {verdict}")
    for key in sorted(rep):
        if key in ("command", "matchings", "assignments", "divorces", "total_divorces", "components", "oracle"):
            continue
        val = rep[key]
        if isinstance(val, list) and val and isinstance(val[0], list) and val and all(isinstance(x, list) for x in val):
            lines.append(f"{key}:")
            lines += [f"  {x}" for x in val]
        else:
            lines.append(f"{key}: {val}")
    return "\n".join(lines) + "\n"
