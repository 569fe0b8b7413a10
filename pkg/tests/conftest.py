"""Shared fixtures: the six logic instances used across the suite and
the seeded random corpus generators."""

import random

import pytest

from jusat.logic import LogicSpec, make_logic
from jusat.syntax import (
    FALSUM,
    App,
    Atom,
    Bang,
    Constant,
    Formula,
    Implies,
    Just,
    Sum,
    Term,
    Variable,
)


def lp_style() -> LogicSpec:
    return make_logic(1, F=(1,), V=((1, 1),), name="lp-style")


def two_pspace() -> LogicSpec:
    return make_logic(2, D=(1,), V=((1, 2),), C=((1, 2),), name="two-pspace")


def two_sigma2p() -> LogicSpec:
    return make_logic(2, F=(1, 2), V=((1, 1), (2, 2)), name="two-sigma2p")


def j1() -> LogicSpec:
    return make_logic(3, D=(1, 2), C=((3, 1), (3, 2)), name="j1")


def j2() -> LogicSpec:
    return make_logic(3, D=(1, 2), V=((3, 3),), C=((3, 1), (3, 2)), name="j2")


def three_f() -> LogicSpec:
    return make_logic(
        3, D=(2,), F=(1,), V=((1, 1),), C=((2, 1), (3, 2)), name="three-f"
    )


ALL_LOGICS = [lp_style, two_pspace, two_sigma2p, j1, j2, three_f]


def random_term(rng: random.Random, depth: int = 2) -> Term:
    if depth == 0 or rng.random() < 0.4:
        if rng.random() < 0.5:
            return Variable(rng.randint(1, 2))
        return Constant(rng.randint(1, 4))
    kind = rng.choice(("app", "sum", "bang"))
    if kind == "bang":
        return Bang(random_term(rng, depth - 1))
    left = random_term(rng, depth - 1)
    right = random_term(rng, depth - 1)
    return App(left, right) if kind == "app" else Sum(left, right)


def random_formula(rng: random.Random, spec: LogicSpec, depth: int = 4) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.1:
            return FALSUM
        return Atom(rng.randint(1, 3))
    if rng.random() < 0.35:
        return Just(
            random_term(rng, 2),
            rng.randint(1, spec.n),
            random_formula(rng, spec, depth - 1),
        )
    return Implies(
        random_formula(rng, spec, depth - 1),
        random_formula(rng, spec, depth - 1),
    )


def build_corpus(seed: int = 20240817, per_logic: int = 90):
    """(spec, formula) pairs: the shared satisfiability corpus."""
    out = []
    for mk in ALL_LOGICS:
        spec = mk()
        rng = random.Random(seed + spec.n * 1000 + len(spec.name))
        for _ in range(per_logic):
            out.append((spec, random_formula(rng, spec)))
    return out


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


# ---------------------------------------------------------------------------
# Randomized derivability instances (empty constant specification)
#
# The generator also computes, by a plain forward fixpoint independent
# of the engine under test, the full set of derivable expressions whose
# terms stay inside the goal term's subterm universe.  With an empty CS
# every derivation from the assumptions lives in that universe, so the
# fixpoint is an exact oracle.

from jusat.star import FiniteFrame, PrefixedStar, pstar  # noqa: E402
from jusat.syntax import StarExpression  # noqa: E402


def random_frame(rng, n, max_worlds=3):
    k = rng.randint(1, max_worlds)
    worlds = tuple(range(k))
    rel = {}
    for i in range(1, n + 1):
        pairs = set()
        for a in worlds:
            for b in worlds:
                if rng.random() < 0.3:
                    pairs.add((a, b))
        rel[i] = frozenset(pairs)
    return FiniteFrame(worlds, rel)


def _body_pool(rng):
    pool = [Atom(1), Atom(2), Implies(Atom(1), Atom(2)),
            Implies(Atom(2), Atom(1)), Implies(Atom(1), Implies(Atom(2), Atom(1))),
            FALSUM, Implies(Atom(1), FALSUM)]
    rng.shuffle(pool)
    return pool


def forward_closure(spec, frame, assumptions, terms):
    members = set(assumptions)
    changed = True
    while changed:
        changed = False
        snapshot = list(members)
        for ps in snapshot:
            w, s = ps.world, ps.star
            for t in terms:
                if isinstance(t, Sum) and s.term in (t.left, t.right):
                    new = pstar(w, s.agent, t, s.body)
                    if new not in members:
                        members.add(new); changed = True
                if isinstance(t, App) and t.left == s.term and isinstance(s.body, Implies):
                    for other in snapshot:
                        if (other.world == w and other.star.agent == s.agent
                                and other.star.term == t.right
                                and other.star.body == s.body.ant):
                            new = pstar(w, s.agent, t, s.body.cons)
                            if new not in members:
                                members.add(new); changed = True
                if isinstance(t, Bang) and t.inner == s.term:
                    for (i, j) in spec.V:
                        if i == s.agent:
                            new = pstar(w, j, t, Just(s.term, i, s.body))
                            if new not in members:
                                members.add(new); changed = True
            for (i, j) in spec.C:
                if i == s.agent:
                    new = pstar(w, j, s.term, s.body)
                    if new not in members:
                        members.add(new); changed = True
            for (i, j) in spec.V:
                if i == s.agent:
                    for (a, b) in frame.edges(j):
                        if a == w:
                            new = pstar(b, s.agent, s.term, s.body)
                            if new not in members:
                                members.add(new); changed = True
    return members


def derivability_instance(rng, spec):
    """(frame, assumptions, universe, closure) with |universe| <= 200."""
    from jusat.syntax import subterms

    for _ in range(50):
        goal_term = random_term(rng, 2)
        terms = subterms(goal_term)
        frame = random_frame(rng, spec.n)
        pool = _body_pool(rng)
        assumptions = set()
        for _ in range(rng.randint(1, 4)):
            assumptions.add(
                pstar(
                    rng.choice(frame.worlds),
                    rng.randint(1, spec.n),
                    rng.choice(sorted(terms, key=str)),
                    rng.choice(pool),
                )
            )
        closure = forward_closure(spec, frame, assumptions, terms)
        if len(closure) > 150:
            continue
        negatives = set()
        for _ in range(20):
            cand = pstar(
                rng.choice(frame.worlds),
                rng.randint(1, spec.n),
                rng.choice(sorted(terms, key=str)),
                rng.choice(pool),
            )
            if cand not in closure:
                negatives.add(cand)
        universe = closure | negatives
        if len(universe) <= 200:
            return frame, frozenset(assumptions), frozenset(universe), closure
    raise RuntimeError("could not generate a small instance")


def random_valid_model(rng, spec, analysis, max_worlds=4):
    """A model whose frame passes validate_frame, with seriality for the
    agents whose relations the logic forces serial, random valuation,
    and random evidence seeds."""
    from jusat.models import FModel, validate_frame

    k = rng.randint(1, max_worlds)
    worlds = tuple(range(k))
    rel = {i: set() for i in range(1, spec.n + 1)}
    for i in rel:
        for a in worlds:
            for b in worlds:
                if rng.random() < 0.35:
                    rel[i].add((a, b))
    for _ in range(40):
        changed = False
        for i in sorted(spec.F):
            for w in worlds:
                if (w, w) not in rel[i]:
                    rel[i].add((w, w)); changed = True
        for i in sorted(analysis.S):
            for w in worlds:
                if not any(a == w for (a, b) in rel[i]):
                    rel[i].add((w, w)); changed = True
        for (i, j) in sorted(spec.C):
            extra = rel[j] - rel[i]
            if extra:
                rel[i] |= extra; changed = True
        for (i, j) in sorted(spec.V):
            new = {
                (a, b)
                for (a, c) in rel[j]
                for (c2, b) in rel[i]
                if c2 == c and (a, b) not in rel[i]
            }
            if new:
                rel[i] |= new; changed = True
        if not changed:
            break
    frame = FiniteFrame(worlds, {i: frozenset(v) for i, v in rel.items()})
    assert validate_frame(frame, spec) == []
    valuation = {
        p: frozenset(w for w in worlds if rng.random() < 0.5)
        for p in (1, 2, 3)
    }
    seeds = set()
    for _ in range(rng.randint(0, 3)):
        seeds.add(
            pstar(
                rng.choice(worlds),
                rng.randint(1, spec.n),
                random_term(rng, 1),
                rng.choice(_body_pool(rng)),
            )
        )
    return FModel(spec, analysis, frame, valuation, frozenset(seeds))


from jusat.models import FModel  # noqa: E402

from jusat.syntax import AgentMeta, FormulaMeta, TermMeta  # noqa: E402


def instantiate_scheme(scheme, mapping, agent):
    """A concrete formula from an axiom scheme: metavariables through
    mapping, agent metavariables to the given agent."""
    if isinstance(scheme, (FormulaMeta, TermMeta)):
        return mapping[scheme]
    if isinstance(scheme, AgentMeta):
        return agent
    if isinstance(scheme, Implies):
        return Implies(
            instantiate_scheme(scheme.ant, mapping, agent),
            instantiate_scheme(scheme.cons, mapping, agent),
        )
    if isinstance(scheme, Just):
        a = scheme.agent
        if isinstance(a, AgentMeta):
            a = agent
        return Just(
            instantiate_scheme(scheme.term, mapping, agent),
            a,
            instantiate_scheme(scheme.body, mapping, agent),
        )
    if isinstance(scheme, Sum):
        return Sum(
            instantiate_scheme(scheme.left, mapping, agent),
            instantiate_scheme(scheme.right, mapping, agent),
        )
    if isinstance(scheme, App):
        return App(
            instantiate_scheme(scheme.left, mapping, agent),
            instantiate_scheme(scheme.right, mapping, agent),
        )
    if isinstance(scheme, Bang):
        return Bang(instantiate_scheme(scheme.inner, mapping, agent))
    return scheme
