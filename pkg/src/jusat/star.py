"""Frame-relative derivability of prefixed star-expressions.

The calculus has axiom leaves (assumptions and constant-specification
instances) and rules App, Sum, V, C, and V-Dis.  Derivability is decided
by a deterministic bottom-up sweep over the goal term's subterms: every
(agent, subterm) node collects assignments, each a scheme (a formula
that may contain metavariables) together with the set of worlds at which
the corresponding expressions are derivable.  World sets are kept closed
under V-Dis propagation, so the frame relations never have to be
revisited; agent-change (C) assignments are saturated per subterm.  The
goal is derivable when some root assignment matches the goal formula at
a world containing the goal world.

Each assignment carries provenance: the distinct subterms and distinct
assumption expressions its derivation used.  Their total count bounds
the nondeterministic-choice sequence a derivation-guessing procedure
would need, which stays within |t| + |S'|.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from . import syntax
from .agents import AgentAnalysis
from .logic import LogicSpec, in_cl, scheme_of
from .syntax import (
    AgentMeta,
    App,
    Bang,
    Constant,
    Formula,
    Implies,
    Just,
    StarExpression,
    Sum,
    Term,
    canonical_scheme,
    fresh_name,
    rename_scheme,
)


@dataclass(frozen=True)
class PrefixedStar:
    world: object
    star: StarExpression

    def __str__(self):
        s = self.star
        return (
            f"{self.world} *_{s.agent}({syntax.print_term(s.term)}, "
            f"{syntax.print_formula(s.body)})"
        )


def pstar(world, agent: int, term: Term, body: Formula) -> PrefixedStar:
    return PrefixedStar(world, StarExpression(agent, term, body))


@dataclass(frozen=True)
class FiniteFrame:
    worlds: Tuple[object, ...]
    rel: Dict[int, FrozenSet[Tuple[object, object]]]

    def __post_init__(self):
        ws = set(self.worlds)
        for i, pairs in self.rel.items():
            for (a, b) in pairs:
                if a not in ws or b not in ws:
                    raise ValueError(f"edge {(a, b)} outside frame universe")

    def edges(self, i: int) -> FrozenSet[Tuple[object, object]]:
        return self.rel.get(i, frozenset())


def one_world_frame(n: int, world="w") -> FiniteFrame:
    return FiniteFrame((world,), {})


class PlusFreeError(ValueError):
    """prove_plus_free precondition violation."""


# ---------------------------------------------------------------------------
# Scheme subsumption


def _match_onesided(pattern, target, bindings) -> bool:
    """Can pattern's metavariables be instantiated to yield target?
    Target metavariables are rigid."""
    if isinstance(pattern, (syntax.FormulaMeta, syntax.TermMeta, AgentMeta)):
        if pattern in bindings:
            return bindings[pattern] == target
        bindings[pattern] = target
        return True
    if type(pattern) is not type(target):
        return False
    if isinstance(pattern, Implies):
        return _match_onesided(pattern.ant, target.ant, bindings) and _match_onesided(
            pattern.cons, target.cons, bindings
        )
    if isinstance(pattern, Just):
        return (
            _match_agent(pattern.agent, target.agent, bindings)
            and _match_onesided(pattern.term, target.term, bindings)
            and _match_onesided(pattern.body, target.body, bindings)
        )
    if isinstance(pattern, (Sum, App)):
        return _match_onesided(pattern.left, target.left, bindings) and _match_onesided(
            pattern.right, target.right, bindings
        )
    if isinstance(pattern, Bang):
        return _match_onesided(pattern.inner, target.inner, bindings)
    return pattern == target


def _match_agent(pattern, target, bindings) -> bool:
    if isinstance(pattern, AgentMeta):
        if pattern in bindings:
            return bindings[pattern] == target
        bindings[pattern] = target
        return True
    return pattern == target


def subsumes(general, specific) -> bool:
    """True when some substitution on general's metavariables yields
    specific (so general covers at least the instances of specific)."""
    return _match_onesided(general, specific, {})


# ---------------------------------------------------------------------------
# Assignments


@dataclass(frozen=True)
class Assignment:
    scheme: Formula  # may contain metavariables
    worlds: FrozenSet[object]
    used_terms: FrozenSet[Term]
    used_assumptions: FrozenSet[StarExpression]

    @property
    def choice_len(self) -> int:
        return len(self.used_terms) + len(self.used_assumptions)


class _NodeTable:
    """Assignments at one (agent, subterm) node, deduplicated under
    most-general-instance subsumption."""

    def __init__(self):
        self.items: List[Assignment] = []

    def add(self, cand: Assignment) -> bool:
        kept = []
        for a in self.items:
            if subsumes(a.scheme, cand.scheme) and cand.worlds <= a.worlds:
                return False
            if subsumes(cand.scheme, a.scheme) and a.worlds <= cand.worlds:
                continue  # superseded
            kept.append(a)
        kept.append(cand)
        self.items = kept
        return True


class StarEngine:
    """Derivability engine for one (frame, assumption set) context.

    Node tables are memoized per term, so repeated queries (e.g. while
    materializing an evidence function) share work.
    """

    def __init__(
        self,
        spec: LogicSpec,
        analysis: Optional[AgentAnalysis],
        frame: FiniteFrame,
        assumptions: Iterable[PrefixedStar],
    ):
        self.spec = spec
        self.analysis = analysis
        self.frame = frame
        self.assumptions = frozenset(assumptions)
        self._by_term: Dict[Tuple[int, Term], Dict] = {}
        for ps in self.assumptions:
            key = (ps.star.agent, ps.star.term)
            self._by_term.setdefault(key, {}).setdefault(ps.star.body, set()).add(
                ps.world
            )
        self._memo: Dict[Term, Dict[int, _NodeTable]] = {}
        self._fclo_cache: Dict[Tuple[int, FrozenSet], FrozenSet] = {}
        # choice audit: max provenance count seen at any accepted root query
        self.max_choice_len = 0
        self.branch_points = 0

    # -- world-set closure under V-Dis ------------------------------------

    def f_close(self, agent: int, worlds: FrozenSet) -> FrozenSet:
        key = (agent, worlds)
        hit = self._fclo_cache.get(key)
        if hit is not None:
            return hit
        out = set(worlds)
        succ = [
            self.frame.edges(j2) for (j, j2) in self.spec.V if j == agent
        ]
        changed = True
        while changed:
            changed = False
            for pairs in succ:
                for (a, b) in pairs:
                    if a in out and b not in out:
                        out.add(b)
                        changed = True
        res = frozenset(out)
        self._fclo_cache[key] = res
        return res

    # -- node computation --------------------------------------------------

    def tables_for(self, term: Term) -> Dict[int, _NodeTable]:
        hit = self._memo.get(term)
        if hit is not None:
            return hit
        tables = {i: _NodeTable() for i in self.spec.agents()}
        self._memo[term] = tables

        for i in self.spec.agents():
            self._leaf_assignments(i, term, tables[i])
            self._structural_assignments(i, term, tables[i])
        self._saturate_agent_change(term, tables)

        for i in self.spec.agents():
            if len(tables[i].items) > 1:
                self.branch_points += 1
        return tables

    def _leaf_assignments(self, agent: int, term: Term, table: _NodeTable):
        # assumption leaves
        for body, worlds in self._by_term.get((agent, term), {}).items():
            table.add(
                Assignment(
                    scheme=body,
                    worlds=self.f_close(agent, frozenset(worlds)),
                    used_terms=frozenset([term]),
                    used_assumptions=frozenset(
                        [StarExpression(agent, term, body)]
                    ),
                )
            )
        # constant-specification ladder: term = !^k c
        k, core = 0, term
        while isinstance(core, Bang):
            k += 1
            core = core.inner
        if not isinstance(core, Constant):
            return
        all_worlds = frozenset(self.frame.worlds)
        if k == 0:
            for sid in self.spec.cs.schemes_for(core.index, agent):
                table.add(
                    Assignment(
                        scheme=rename_scheme(scheme_of(sid)),
                        worlds=all_worlds,
                        used_terms=frozenset([term]),
                        used_assumptions=frozenset(),
                    )
                )
            return
        # inner agents of the ladder are free over [n]; the innermost one
        # must have a CS entry.  When the entry exists for every agent it
        # is represented by a metavariable, otherwise enumerated.
        entries = {}
        for (c, a, sid) in self.spec.cs.entries:
            if c == core.index:
                entries.setdefault(sid, set()).add(a)
        every = set(self.spec.agents())
        for sid, holders in entries.items():
            if holders == every:
                inner_agents: List[object] = [AgentMeta(fresh_name("J"))]
            else:
                inner_agents = sorted(holders)
            for a1 in inner_agents:
                body = Just(core, a1, rename_scheme(scheme_of(sid)))
                t = core
                for _ in range(k - 1):
                    body = Just(Bang(t), AgentMeta(fresh_name("J")), body)
                    t = Bang(t)
                table.add(
                    Assignment(
                        scheme=body,
                        worlds=all_worlds,
                        used_terms=frozenset([term]),
                        used_assumptions=frozenset(),
                    )
                )

    def _structural_assignments(self, agent: int, term: Term, table: _NodeTable):
        if isinstance(term, App):
            left = self.tables_for(term.left)[agent].items
            right = self.tables_for(term.right)[agent].items
            for p1 in left:
                for p2 in right:
                    s1 = rename_scheme(p1.scheme)
                    s2 = rename_scheme(p2.scheme)
                    out = syntax.FormulaMeta(fresh_name("R"))
                    sub = syntax.unify_schemes(s1, Implies(s2, out))
                    if sub is None:
                        continue
                    worlds = p1.worlds & p2.worlds
                    if not worlds:
                        continue
                    table.add(
                        Assignment(
                            scheme=sub.apply(out),
                            worlds=self.f_close(agent, frozenset(worlds)),
                            used_terms=p1.used_terms | p2.used_terms | {term},
                            used_assumptions=p1.used_assumptions
                            | p2.used_assumptions,
                        )
                    )
        elif isinstance(term, Sum):
            for side in (term.left, term.right):
                for p in self.tables_for(side)[agent].items:
                    table.add(
                        Assignment(
                            scheme=p.scheme,
                            worlds=self.f_close(agent, p.worlds),
                            used_terms=p.used_terms | {term},
                            used_assumptions=p.used_assumptions,
                        )
                    )
        elif isinstance(term, Bang):
            for (i, j) in self.spec.V:
                if j != agent:
                    continue
                for p in self.tables_for(term.inner)[i].items:
                    table.add(
                        Assignment(
                            scheme=Just(term.inner, i, p.scheme),
                            worlds=self.f_close(agent, p.worlds),
                            used_terms=p.used_terms | {term},
                            used_assumptions=p.used_assumptions,
                        )
                    )

    def _saturate_agent_change(self, term: Term, tables: Dict[int, _NodeTable]):
        changed = True
        while changed:
            changed = False
            for (i, j) in self.spec.C:
                for p in list(tables[i].items):
                    moved = Assignment(
                        scheme=p.scheme,
                        worlds=self.f_close(j, p.worlds),
                        used_terms=p.used_terms,
                        used_assumptions=p.used_assumptions,
                    )
                    if tables[j].add(moved):
                        changed = True

    # -- queries -----------------------------------------------------------

    def query(self, goal: PrefixedStar) -> Optional[Assignment]:
        """The witnessing root assignment for a derivable goal, or None."""
        if goal.world not in self.frame.worlds:
            raise ValueError(f"goal world {goal.world!r} outside frame")
        table = self.tables_for(goal.star.term).get(goal.star.agent)
        if table is None:
            raise ValueError(f"goal agent {goal.star.agent} outside [n]")
        best = None
        for a in table.items:
            if goal.world not in a.worlds:
                continue
            if syntax.match_scheme(a.scheme, goal.star.body) is None:
                continue
            if best is None or a.choice_len < best.choice_len:
                best = a
        if best is not None:
            self.max_choice_len = max(self.max_choice_len, best.choice_len)
        return best

    def derivable_worlds(self, agent: int, term: Term, body: Formula) -> FrozenSet:
        out = set()
        for a in self.tables_for(term).get(agent, _NodeTable()).items:
            if syntax.match_scheme(a.scheme, body) is not None:
                out |= a.worlds
        return frozenset(out)


def derivable(
    spec: LogicSpec,
    analysis: AgentAnalysis,
    frame: FiniteFrame,
    assumptions: Iterable[PrefixedStar],
    goal: PrefixedStar,
) -> bool:
    return StarEngine(spec, analysis, frame, assumptions).query(goal) is not None


def derives_any(
    spec: LogicSpec,
    analysis: AgentAnalysis,
    frame: FiniteFrame,
    assumptions: Iterable[PrefixedStar],
    targets: Iterable[PrefixedStar],
) -> Optional[PrefixedStar]:
    engine = StarEngine(spec, analysis, frame, assumptions)
    for t in sorted(targets, key=str):
        if engine.query(t) is not None:
            return t
    return None


def prove_justified(spec: LogicSpec, agent: int, term: Term, body: Formula) -> bool:
    """Theoremhood of [term]_agent body, via one-world derivability with
    no assumptions."""
    frame = one_world_frame(spec.n)
    return derivable(spec, None, frame, (), pstar("w", agent, term, body))


def prove_plus_free(spec: LogicSpec, agent: int, term: Term, body: Formula) -> bool:
    """Deterministic fast path for sum-free terms under a schematically
    injective CS."""
    verdict, _ = prove_plus_free_detail(spec, agent, term, body)
    return verdict


def prove_plus_free_detail(
    spec: LogicSpec, agent: int, term: Term, body: Formula
) -> Tuple[bool, int]:
    """prove_plus_free plus the branch point count: the number of nodes
    that kept more than one assignment, 0 on a fully deterministic run."""
    if any(isinstance(s, Sum) for s in syntax.subterms(term)):
        raise PlusFreeError("term contains '+'")
    if not spec.cs.is_schematically_injective():
        raise PlusFreeError("constant specification is not schematically injective")
    engine = StarEngine(spec, None, one_world_frame(spec.n), ())
    got = engine.query(pstar("w", agent, term, body))
    return got is not None, engine.branch_points


# ---------------------------------------------------------------------------
# Naive saturation oracle


def saturate_naive(
    spec: LogicSpec,
    analysis: AgentAnalysis,
    frame: FiniteFrame,
    assumptions: Iterable[PrefixedStar],
    universe: Iterable[PrefixedStar],
) -> FrozenSet[PrefixedStar]:
    """Least fixpoint of the calculus rules intersected with universe.
    Only expressions inside the universe are ever tracked, so the result
    matches full derivability exactly when the universe is closed under
    the rule shapes needed for its members."""
    universe = frozenset(universe)
    members = set()
    for ps in universe:
        if ps in assumptions or in_cl(spec, ps.star.agent, ps.star.term, ps.star.body):
            members.add(ps)

    def one_step(e: PrefixedStar) -> bool:
        w, s = e.world, e.star
        if isinstance(s.term, App):
            for m in members:
                ms = m.star
                if (
                    m.world == w
                    and ms.agent == s.agent
                    and ms.term == s.term.left
                    and isinstance(ms.body, Implies)
                    and ms.body.cons == s.body
                    and pstar(w, s.agent, s.term.right, ms.body.ant) in members
                ):
                    return True
        if isinstance(s.term, Sum):
            for side in (s.term.left, s.term.right):
                if pstar(w, s.agent, side, s.body) in members:
                    return True
        if isinstance(s.term, Bang) and isinstance(s.body, Just):
            b = s.body
            if (
                b.term == s.term.inner
                and (b.agent, s.agent) in spec.V
                and pstar(w, b.agent, b.term, b.body) in members
            ):
                return True
        for (i, j) in spec.C:
            if j == s.agent and pstar(w, i, s.term, s.body) in members:
                return True
        for (i, j) in spec.V:
            if i == s.agent:
                for (a, b) in frame.edges(j):
                    if b == w and pstar(a, i, s.term, s.body) in members:
                        return True
        return False

    changed = True
    while changed:
        changed = False
        for e in universe - members:
            if one_step(e):
                members.add(e)
                changed = True
    return frozenset(members)
