"""Prefixed tableau satisfiability procedure.

Branch entries have the shape ``prefix  truth  boxes  payload``: a world
prefix (a string of P_C agent classes rooted at the empty prefix), a
truth sign T or F, a string of box agents, and either a formula or a
star-expression.  The base rule set creates successor worlds for agents
whose relations must be serial and transports boxed formulas along the
frame; the improved rule set reuses sibling worlds for V-class boxes
(rule SVB) instead of growing the prefix, guided by the visibility
computation of the agents module.

A complete branch is rejecting when it is propositionally closed or
when the star-calculus derives some F-side star-expression from the
T-side ones over the branch frame.  An accepting complete branch yields
a model; decide verifies that model before reporting Satisfiable.

Termination is enforced by configurable caps on prefix length, box
nesting, and entry count.  A branch that hit a cap is marked truncated;
rejection of a truncated branch is still sound (rules only add entries,
and rejection is monotone in the entry set), while acceptance of one is
reported as ResourceExceeded unless the extracted model verifies.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from . import syntax
from .agents import AgentAnalysis, AgentClass, Prefix, ROOT, analyze, classify, visible
from .logic import LogicSpec
from .models import FModel
from .star import FiniteFrame, PrefixedStar, derives_any, pstar
from .syntax import (
    FALSUM,
    Falsum,
    Formula,
    Implies,
    Just,
    StarExpression,
    formula_size,
    modal_depth,
    print_formula,
)


Payload = Union[Formula, StarExpression]


@dataclass(frozen=True)
class PrefixedFormula:
    prefix: Prefix
    truth: str  # "T" | "F"
    boxes: Tuple[int, ...]
    payload: Payload

    def __post_init__(self):
        if self.truth not in ("T", "F"):
            raise ValueError("truth sign must be T or F")
        if isinstance(self.payload, StarExpression) and self.boxes:
            raise ValueError("star-expression entries carry no boxes")

    def __str__(self):
        pre = "." + ".".join("{%s}" % ",".join(map(str, sorted(c)))
                             for c in self.prefix) if self.prefix else ""
        bs = "".join(f"[]_{i} " for i in self.boxes)
        if isinstance(self.payload, StarExpression):
            s = self.payload
            body = f"*_{s.agent}({syntax.print_term(s.term)}, {print_formula(s.body)})"
        else:
            body = print_formula(self.payload)
        return f"0{pre} {self.truth} {bs}{body}"


@dataclass
class Limits:
    prefix_len: int
    box_len: int
    max_entries: int = 4000
    deadline: Optional[float] = None  # absolute time.monotonic() stamp


def default_limits(spec: LogicSpec, analysis: AgentAnalysis, f: Formula) -> Limits:
    report = classify(analysis, spec)
    size = formula_size(f)
    if report.sigma2p_condition or report.j1_pattern:
        # these cases terminate on their own with prefixes within |f|
        prefix_cap = max(1, size)
    else:
        # deeper prefixes than the box transport can reach hold no
        # content beyond F-falsum entries; capping them keeps seriality
        # cascades finite, and any effect on the verdict is caught by
        # model verification (truncated accepts are never trusted)
        prefix_cap = max(2, modal_depth(f) + 1)
    return Limits(
        prefix_len=prefix_cap,
        box_len=max(2, 2 * modal_depth(f)),
    )


class Branch:
    """An ordered, duplicate-free set of prefixed formulas."""

    def __init__(self, mode: str = "improved"):
        if mode not in ("base", "improved"):
            raise ValueError("mode must be 'base' or 'improved'")
        self.mode = mode
        self.entries: List[PrefixedFormula] = []
        self._present: set = set()
        self._worlds: set = {ROOT}
        self.truncated = False
        self.truncation_reasons: List[str] = []

    def copy(self) -> "Branch":
        b = Branch(self.mode)
        b.entries = list(self.entries)
        b._present = set(self._present)
        b._worlds = set(self._worlds)
        b.truncated = self.truncated
        b.truncation_reasons = list(self.truncation_reasons)
        return b

    def __contains__(self, e: PrefixedFormula) -> bool:
        return e in self._present

    def add(self, e: PrefixedFormula) -> bool:
        if e in self._present:
            return False
        self.entries.append(e)
        self._present.add(e)
        self._worlds.add(e.prefix)
        return True

    def worlds(self) -> FrozenSet[Prefix]:
        return frozenset(self._worlds)

    def has_prefix(self, p: Prefix) -> bool:
        return p in self._worlds

    def mark_truncated(self, reason: str):
        self.truncated = True
        if reason not in self.truncation_reasons:
            self.truncation_reasons.append(reason)

    def is_propositionally_closed(self) -> bool:
        for e in self.entries:
            if e.truth == "F":
                if replace(e, truth="T") in self._present:
                    return True
        return False

    def star_entries(self, truth: str) -> List[PrefixedStar]:
        return [
            PrefixedStar(e.prefix, e.payload)
            for e in self.entries
            if e.truth == truth and isinstance(e.payload, StarExpression)
        ]


# ---------------------------------------------------------------------------
# Rule instances


@dataclass
class RuleInstance:
    rule: str
    premise: PrefixedFormula
    conclusions: List[PrefixedFormula]  # linear rules
    split: Optional[Tuple[PrefixedFormula, PrefixedFormula]] = None


def _vclass_visible(analysis: AgentAnalysis, agent: int, sigma: Prefix) -> bool:
    P = analysis.Pclass.get(agent)
    if P is None or not analysis.is_v_class(P):
        return False
    return visible(analysis, P, sigma) is not None


def _instances_for(
    branch: Branch,
    e: PrefixedFormula,
    analysis: AgentAnalysis,
    spec: LogicSpec,
    limits: Limits,
) -> List[RuleInstance]:
    out: List[RuleInstance] = []
    improved = branch.mode == "improved"
    sigma, boxes, pay = e.prefix, e.boxes, e.payload

    if isinstance(pay, StarExpression):
        return out

    if not boxes and isinstance(pay, Implies):
        if e.truth == "F":
            out.append(
                RuleInstance(
                    "propF",
                    e,
                    [
                        PrefixedFormula(sigma, "T", (), pay.ant),
                        PrefixedFormula(sigma, "F", (), pay.cons),
                    ],
                )
            )
        else:
            out.append(
                RuleInstance(
                    "propT",
                    e,
                    [],
                    split=(
                        PrefixedFormula(sigma, "F", (), pay.ant),
                        PrefixedFormula(sigma, "T", (), pay.cons),
                    ),
                )
            )
        return out

    if not boxes and isinstance(pay, Just):
        i, star = pay.agent, StarExpression(pay.agent, pay.term, pay.body)
        if e.truth == "F":
            out.append(
                RuleInstance("Fa", e, [PrefixedFormula(sigma, "F", (), star)])
            )
            return out
        if i not in analysis.S:
            out.append(
                RuleInstance("Tr", e, [PrefixedFormula(sigma, "T", (), star)])
            )
            return out
        out.append(
            RuleInstance(
                "TrB",
                e,
                [
                    PrefixedFormula(sigma, "T", (), star),
                    PrefixedFormula(sigma, "T", (i,), pay.body),
                ],
            )
        )
        for K in analysis.MC.get(analysis.chi[i], ()):
            j = min(K)
            if j in analysis.R:
                continue
            if improved and _vclass_visible(analysis, j, sigma):
                continue
            concl = PrefixedFormula(sigma + (K,), "F", (), FALSUM)
            if len(sigma) + 1 > limits.prefix_len:
                if concl not in branch:
                    branch.mark_truncated("prefix length cap")
                continue
            out.append(RuleInstance("TrD", e, [concl]))
        return out

    if boxes and e.truth == "T":
        i, rest = boxes[0], boxes[1:]
        if i in spec.F:
            out.append(
                RuleInstance("FB", e, [PrefixedFormula(sigma, "T", rest, pay)])
            )
        for (i2, j) in sorted(spec.C):
            if i2 == i:
                out.append(
                    RuleInstance(
                        "C", e, [PrefixedFormula(sigma, "T", (j,) + rest, pay)]
                    )
                )
        for (i2, j) in sorted(spec.V):
            if i2 != i:
                continue
            # an entry that is itself a V conclusion (its own premise is
            # still on the branch) is not re-expanded by V; frame paths
            # that would need deeper stacks are reached by re-applying V
            # at intermediate worlds instead
            if (
                len(boxes) >= 2
                and (boxes[1], boxes[0]) in spec.V
                and PrefixedFormula(sigma, "T", boxes[1:], pay) in branch
            ):
                continue
            concl = PrefixedFormula(sigma, "T", (j,) + boxes, pay)
            if len(boxes) + 1 > limits.box_len:
                if concl not in branch:
                    branch.mark_truncated("box nesting cap")
                continue
            out.append(RuleInstance("V", e, [concl]))
        tgt = sigma + (analysis.chi[i],) if i in analysis.chi else None
        if tgt is not None and branch.has_prefix(tgt):
            out.append(
                RuleInstance("SB", e, [PrefixedFormula(tgt, "T", rest, pay)])
            )
        if improved and i in analysis.Pclass:
            P = analysis.Pclass[i]
            if analysis.is_v_class(P):
                view = visible(analysis, P, sigma)
                if view is not None:
                    tau = view[:-1]
                    tgt2 = tau + (analysis.chi[i],)
                    if branch.has_prefix(tgt2):
                        out.append(
                            RuleInstance(
                                "SVB",
                                e,
                                [PrefixedFormula(tgt2, "T", rest, pay)],
                            )
                        )
        return out

    if (
        e.truth == "F"
        and not boxes
        and isinstance(pay, Falsum)
        and sigma != ROOT
    ):
        K = sigma[-1]
        targets = set()
        for j in sorted(K):
            for i in sorted(analysis.N.get(j, ())):
                if improved and _vclass_visible(analysis, i, sigma):
                    continue
                targets.add(analysis.chi[i])
        for cls in sorted(targets, key=lambda c: min(c)):
            concl = PrefixedFormula(sigma + (cls,), "F", (), FALSUM)
            if len(sigma) + 1 > limits.prefix_len:
                if concl not in branch:
                    branch.mark_truncated("prefix length cap")
                continue
            out.append(RuleInstance("S", e, [concl]))
    return out


_PRIORITY = {
    "propF": 0,
    "propT": 1,
    "Fa": 2,
    "Tr": 2,
    "TrB": 2,
    "C": 3,
    "V": 3,
    "FB": 3,
    "TrD": 4,
    "S": 4,
    "SB": 5,
    "SVB": 5,
}


def _next_instance(
    branch: Branch, analysis, spec, limits
) -> Optional[RuleInstance]:
    """The highest-priority applicable rule instance; within a priority
    class, oldest premise first.  An instance is applicable when it
    would add something new (for splits: when neither disjunct is
    already present)."""
    best = None
    for e in branch.entries:
        for inst in _instances_for(branch, e, analysis, spec, limits):
            if inst.split is not None:
                if inst.split[0] in branch or inst.split[1] in branch:
                    continue
            else:
                if all(c in branch for c in inst.conclusions):
                    continue
            p = _PRIORITY[inst.rule]
            if best is None or p < best[0]:
                best = (p, inst)
                if p == 0:
                    return inst
    return best[1] if best else None


def expand(branch: Branch, analysis: AgentAnalysis, spec: LogicSpec,
           limits: Optional[Limits] = None) -> List[Branch]:
    """One rule application.  Returns the successor branches: two for a
    propositional split, one for every other rule, none when the branch
    is complete."""
    if limits is None:
        limits = Limits(prefix_len=64, box_len=8)
    inst = _next_instance(branch, analysis, spec, limits)
    if inst is None:
        return []
    if inst.split is not None:
        left, right = branch.copy(), branch.copy()
        left.add(inst.split[0])
        right.add(inst.split[1])
        return [left, right]
    for c in inst.conclusions:
        branch.add(c)
    return [branch]


def expand_improved(branch: Branch, analysis, spec, limits=None) -> List[Branch]:
    if branch.mode != "improved":
        raise ValueError("branch mode is not 'improved'")
    return expand(branch, analysis, spec, limits)


# ---------------------------------------------------------------------------
# Frame construction and rejection


def build_frame(branch: Branch, analysis: AgentAnalysis) -> FiniteFrame:
    spec = analysis.spec
    W = branch.worlds()
    rel: Dict[int, set] = {i: set() for i in spec.agents()}
    for i in spec.agents():
        if i in analysis.chi:
            for w in W:
                child = w + (analysis.chi[i],)
                if child in W:
                    rel[i].add((w, child))
        if i in spec.F:
            for w in W:
                rel[i].add((w, w))
        if branch.mode == "improved" and i in analysis.Pclass:
            P = analysis.Pclass[i]
            if analysis.is_v_class(P):
                for w in W:
                    view = visible(analysis, P, w)
                    if view is not None:
                        tgt = view[:-1] + (analysis.chi[i],)
                        if tgt in W:
                            rel[i].add((w, tgt))
    changed = True
    while changed:
        changed = False
        for (i, j) in spec.C:
            extra = rel[j] - rel[i]
            if extra:
                rel[i] |= extra
                changed = True
        for (i, j) in spec.V:
            new = set()
            for (a, c) in rel[j]:
                for (c2, b) in rel[i]:
                    if c2 == c and (a, b) not in rel[i]:
                        new.add((a, b))
            if new:
                rel[i] |= new
                changed = True
    order = sorted(W, key=lambda p: (len(p), [sorted(c) for c in p]))
    return FiniteFrame(tuple(order), {i: frozenset(v) for i, v in rel.items()})


def is_rejecting(branch: Branch, analysis: AgentAnalysis, spec: LogicSpec) -> bool:
    if branch.is_propositionally_closed():
        return True
    targets = branch.star_entries("F")
    if not targets:
        return False
    frame = build_frame(branch, analysis)
    hit = derives_any(spec, analysis, frame, branch.star_entries("T"), targets)
    return hit is not None


def extract_model(
    branch: Branch, analysis: AgentAnalysis, spec: LogicSpec
) -> FModel:
    """The model of an accepting complete branch: branch frame with
    serial completion, valuation from T-atoms, evidence generated by the
    T-side star-expressions."""
    frame = build_frame(branch, analysis)
    W = frame.worlds
    rel = {i: set(frame.edges(i)) for i in spec.agents()}
    changed = True
    while changed:
        changed = False
        for i in sorted(analysis.S):
            for a in W:
                if not any(x == a for (x, y) in rel[i]):
                    rel[i].add((a, a))
                    changed = True
        for (i, j) in sorted(spec.C):
            extra = rel[j] - rel[i]
            if extra:
                rel[i] |= extra
                changed = True
        for (i, j) in sorted(spec.V):
            new = {
                (a, b)
                for (a, c) in rel[j]
                for (c2, b) in rel[i]
                if c2 == c
            } - rel[i]
            if new:
                rel[i] |= new
                changed = True
    frame2 = FiniteFrame(W, {i: frozenset(v) for i, v in rel.items()})
    valuation: Dict[int, set] = {}
    for e in branch.entries:
        if (
            e.truth == "T"
            and not e.boxes
            and isinstance(e.payload, syntax.Atom)
        ):
            valuation.setdefault(e.payload.index, set()).add(e.prefix)
    seeds = frozenset(branch.star_entries("T"))
    return FModel(
        spec,
        analysis,
        frame2,
        {p: frozenset(v) for p, v in valuation.items()},
        seeds,
    )


# ---------------------------------------------------------------------------
# Verdicts and the decision procedure


@dataclass
class SearchStats:
    branches_explored: int = 0
    max_prefix_len: int = 0
    max_boxes: int = 0
    max_entries: int = 0
    rule_applications: int = 0


@dataclass
class Satisfiable:
    model: FModel
    branch: Branch
    stats: SearchStats

    verdict = "SAT"


@dataclass
class Unsatisfiable:
    stats: SearchStats

    verdict = "UNSAT"


@dataclass
class ResourceExceeded:
    reason: str
    stats: SearchStats

    verdict = "RESOURCE"


TableauVerdict = Union[Satisfiable, Unsatisfiable, ResourceExceeded]


class _Timeout(Exception):
    pass


def decide(
    spec: LogicSpec,
    formula: Formula,
    mode: str = "improved",
    limits: Optional[Limits] = None,
    analysis: Optional[AgentAnalysis] = None,
    trace: Optional[List[str]] = None,
) -> TableauVerdict:
    if analysis is None:
        analysis = analyze(spec)
    if limits is None:
        limits = default_limits(spec, analysis, formula)
    stats = SearchStats()
    flags: List[str] = []

    root = Branch(mode)
    root.add(PrefixedFormula(ROOT, "F", (), FALSUM))
    root.add(PrefixedFormula(ROOT, "T", (), formula))

    def note(line: str):
        if trace is not None:
            trace.append(line)

    def search(branch: Branch) -> Optional[Satisfiable]:
        stats.branches_explored += 1
        while True:
            if limits.deadline is not None and time.monotonic() > limits.deadline:
                raise _Timeout()
            if branch.is_propositionally_closed():
                note("rejected: propositionally closed")
                return None
            if len(branch.entries) > limits.max_entries:
                branch.mark_truncated("entry count cap")
                break
            inst = _next_instance(branch, analysis, spec, limits)
            if inst is None:
                break
            stats.rule_applications += 1
            if inst.split is not None:
                note(
                    f"{inst.rule}: {inst.premise} => "
                    f"{inst.split[0]} | {inst.split[1]}"
                )
                for d in inst.split:
                    child = branch.copy()
                    child.add(d)
                    got = search(child)
                    if got is not None:
                        return got
                return None
            note(
                f"{inst.rule}: {inst.premise} => "
                + " ; ".join(str(c) for c in inst.conclusions)
            )
            for c in inst.conclusions:
                branch.add(c)
                stats.max_prefix_len = max(stats.max_prefix_len, len(c.prefix))
                stats.max_boxes = max(stats.max_boxes, len(c.boxes))
            stats.max_entries = max(stats.max_entries, len(branch.entries))

        # branch complete (or truncated)
        if is_rejecting(branch, analysis, spec):
            note("rejected: star-calculus closure")
            return None
        model = extract_model(branch, analysis, spec)
        if model.evaluate(ROOT, formula):
            note("accepted: model verified")
            return Satisfiable(model, branch, stats)
        if branch.truncated:
            flags.append(
                "accepting branch hit caps and its model failed verification: "
                + ", ".join(branch.truncation_reasons)
            )
            note("inconclusive: truncated accepting branch, model unverified")
            return None
        raise RuntimeError(
            "internal error: complete accepting branch produced a model "
            "that does not satisfy the input"
        )

    try:
        got = search(root)
    except _Timeout:
        return ResourceExceeded("time cap exceeded", stats)
    if got is not None:
        return got
    if flags:
        return ResourceExceeded("; ".join(flags), stats)
    return Unsatisfiable(stats)
