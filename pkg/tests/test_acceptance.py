"""End-to-end acceptance gate.  Each test covers one release criterion
and prints a single pass/fail line."""

import itertools
import random
import time

import pytest

from conftest import (
    ALL_LOGICS,
    build_corpus,
    derivability_instance,
    instantiate_scheme,
    j1,
    j2,
    lp_style,
    random_term,
    random_valid_model,
    three_f,
    two_sigma2p,
)
from jusat.agents import ROOT, analyze, classify
from jusat.logic import P1, instantiates, make_logic, scheme_of
from jusat.models import brute_force_sat_detail, find_cluster
from jusat.star import (
    StarEngine,
    prove_justified,
    prove_plus_free_detail,
    saturate_naive,
)
from jusat.syntax import (
    App,
    Atom,
    Bang,
    Constant,
    FormulaMeta,
    Implies,
    Just,
    Sum,
    TermMeta,
    formula_size,
    subterms,
    term_size,
)
from jusat.tableau import Limits, Satisfiable, decide


def _report(num, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    tail = f" ({detail})" if detail else ""
    print(f"criterion {num}: {status}{tail}")
    assert ok, f"criterion {num} failed {tail}"


@pytest.fixture(scope="module")
def analyses():
    return {mk().name: analyze(mk()) for mk in ALL_LOGICS}


@pytest.fixture(scope="module")
def corpus():
    return build_corpus()


# ---------------------------------------------------------------------------
# Criterion 1: every satisfiable verdict over the corpus carries a model
# that the evaluator confirms at the root.


def test_criterion_1_soundness(corpus, analyses):
    start = time.monotonic()
    sat = unsat = 0
    for spec, f in corpus:
        got = decide(spec, f, analysis=analyses[spec.name])
        if isinstance(got, Satisfiable):
            sat += 1
            assert got.model.evaluate(ROOT, f), (spec.name, str(f))
        else:
            unsat += 1
    elapsed = time.monotonic() - start
    _report(
        1,
        sat + unsat == len(corpus) and len(corpus) >= 500 and elapsed < 300,
        f"{sat} SAT all verified, {unsat} other, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# Criterion 2: tableau agrees with the bounded brute-force oracle on
# every instance where the oracle is decisive.


def test_criterion_2_oracle_agreement(corpus, analyses):
    start = time.monotonic()
    decisive = 0
    for spec, f in corpus:
        an = analyses[spec.name]
        verdict = decide(spec, f, analysis=an).verdict
        model, exhausted = brute_force_sat_detail(spec, an, f, 3, budget=3000)
        if model is not None:
            decisive += 1
            assert verdict != "UNSAT", (spec.name, str(f))
        elif exhausted:
            decisive += 1
            assert verdict != "SAT", (spec.name, str(f))
    elapsed = time.monotonic() - start
    _report(
        2,
        decisive > 0 and elapsed < 600,
        f"{decisive}/{len(corpus)} decisive, all agree, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# Criterion 3: engine derivability coincides with the naive saturation
# fixpoint on 200 random instances.


def test_criterion_3_star_equivalence():
    rng = random.Random(90210)
    specs = [
        make_logic(s.n, s.D, s.F, s.V, s.C, cs="EMPTY", name=s.name)
        for s in (mk() for mk in ALL_LOGICS)
    ]
    instances = goals = 0
    while instances < 200:
        spec = specs[instances % len(specs)]
        an = analyze(spec)
        frame, assumptions, universe, closure = derivability_instance(rng, spec)
        sat = saturate_naive(spec, an, frame, assumptions, universe)
        assert sat == closure & universe
        engine = StarEngine(spec, an, frame, assumptions)
        for goal in sorted(universe, key=str):
            assert (engine.query(goal) is not None) == (goal in sat), (
                spec.name, goal,
            )
            goals += 1
        instances += 1
    _report(3, instances == 200, f"200 instances, {goals} membership checks")


# ---------------------------------------------------------------------------
# Criterion 4: constructed theorems are all derivable, constructed
# non-theorems are all underivable.


def _scheme_mapping(rng):
    pool = [Atom(1), Atom(2), Implies(Atom(1), Atom(2)),
            Implies(Atom(2), Implies(Atom(1), Atom(2)))]
    return {
        FormulaMeta("A"): rng.choice(pool),
        FormulaMeta("B"): rng.choice(pool),
        FormulaMeta("C"): rng.choice(pool),
        TermMeta("S"): random_term(rng, 1),
        TermMeta("T"): random_term(rng, 1),
    }


def build_theorems(rng, count=50):
    """Axiom instances justified by their constants, then randomly
    combined by application, sums, verification lifts, and conversions."""
    specs = [mk() for mk in ALL_LOGICS]
    out = []
    while len(out) < count:
        spec = rng.choice(specs)
        ids = spec.axiom_scheme_ids()
        agent = rng.randint(1, spec.n)
        k = rng.randint(1, len(ids))
        mapping = _scheme_mapping(rng)
        body = instantiate_scheme(scheme_of(ids[k - 1]), mapping, agent)
        term = Constant(k)
        for _ in range(rng.randint(0, 3)):
            op = rng.choice(("chain", "sum", "bang", "conv"))
            if op == "chain":
                # c justifies body -> (beta -> body), so application
                # yields a justification of beta -> body
                kp1 = ids.index(P1) + 1
                beta = rng.choice([Atom(3), Implies(Atom(1), Atom(3))])
                term = App(Constant(kp1), term)
                body = Implies(beta, body)
            elif op == "sum":
                other = random_term(rng, 1)
                term = Sum(term, other) if rng.random() < 0.5 else Sum(other, term)
            elif op == "bang":
                lifts = [j for (i, j) in spec.V if i == agent]
                if lifts:
                    body = Just(term, agent, body)
                    term = Bang(term)
                    agent = rng.choice(lifts)
            elif op == "conv":
                targets = [j for (i, j) in spec.C if i == agent]
                if targets:
                    agent = rng.choice(targets)
        out.append((spec, agent, term, body))
    return out


def build_non_theorems(rng, count=50):
    """Mutations that break the justification: the wrong constant, a
    mismatched inner term under !, an application whose conclusion no
    axiom reaches, and sums of broken parts."""
    specs = [mk() for mk in ALL_LOGICS]
    out = []

    def wrong_constant(spec):
        ids = spec.axiom_scheme_ids()
        for _ in range(40):
            k = rng.randint(1, len(ids))
            kp = rng.randint(1, len(ids))
            if k == kp:
                continue
            agent = rng.randint(1, spec.n)
            body = instantiate_scheme(
                scheme_of(ids[kp - 1]), _scheme_mapping(rng), agent
            )
            if not instantiates(scheme_of(ids[k - 1]), body):
                return (spec, agent, Constant(k), body)
        return None

    while len(out) < count:
        spec = rng.choice(specs)
        family = rng.choice(("const", "bang", "app", "sum"))
        if family == "const":
            got = wrong_constant(spec)
            if got is not None:
                out.append(got)
        elif family == "bang":
            base = wrong_constant(spec)
            if base is None:
                continue
            _, agent, const, body = base
            inner = Just(const, agent, body)
            out.append((spec, rng.randint(1, spec.n), Bang(const), inner))
        elif family == "app":
            # c1 justifies P1 instances only; the consequent of an
            # application of it must end in a justified formula, and a
            # bare unprovable atom cannot be one
            kp1 = spec.axiom_scheme_ids().index(P1) + 1
            body = Implies(Atom(9), Atom(8))
            out.append(
                (spec, rng.randint(1, spec.n),
                 App(Constant(kp1), Constant(kp1)), body)
            )
        else:
            a = wrong_constant(spec)
            b = wrong_constant(spec)
            if a is None or b is None:
                continue
            if a[3] != b[3]:
                continue
            out.append((spec, a[1], Sum(a[2], b[2]), a[3]))
    return out


@pytest.fixture(scope="module")
def bridge_cases():
    rng = random.Random(424242)
    return build_theorems(rng), build_non_theorems(rng)


def test_criterion_4_derivability_bridge(bridge_cases):
    theorems, non_theorems = bridge_cases
    for (spec, agent, term, body) in theorems:
        assert prove_justified(spec, agent, term, body), (
            spec.name, agent, str(term), str(body),
        )
    for (spec, agent, term, body) in non_theorems:
        assert not prove_justified(spec, agent, term, body), (
            spec.name, agent, str(term), str(body),
        )
    _report(
        4,
        len(theorems) == 50 and len(non_theorems) == 50,
        "50 theorems derivable, 50 mutations underivable",
    )


# ---------------------------------------------------------------------------
# Criterion 5: on the sum-free cases the deterministic procedure agrees
# with the general search and never branches.


def test_criterion_5_plus_free_fast_path(bridge_cases):
    checked = 0
    for (spec, agent, term, body) in itertools.chain(*bridge_cases):
        if any(isinstance(s, Sum) for s in subterms(term)):
            continue
        expected = prove_justified(spec, agent, term, body)
        verdict, branch_points = prove_plus_free_detail(spec, agent, term, body)
        assert verdict == expected, (spec.name, agent, str(term), str(body))
        assert branch_points == 0, (spec.name, agent, str(term), str(body))
        checked += 1
    _report(5, checked >= 30, f"{checked} sum-free cases, zero branch points")


# ---------------------------------------------------------------------------
# Criterion 6: the two-agent complexity table, exhaustively, plus the
# named three-agent patterns.


def _published_two_agent_rule(D, F, V, C):
    for (i, j) in ((1, 2), (2, 1)):
        if (
            i in D
            and i not in F
            and V
            and V <= {(i, j), (j, j)}
            and (i, j) in C
            and (j, i) not in C
        ):
            return "PSPACE-complete"
    return "Sigma2p"


def test_criterion_6_classifier_table():
    agents = (1, 2)
    pairs = [(a, b) for a in agents for b in agents]

    def powerset(xs):
        return [
            frozenset(c)
            for r in range(len(xs) + 1)
            for c in itertools.combinations(xs, r)
        ]

    count = 0
    for D in powerset(agents):
        for F in powerset(agents):
            for V in powerset(pairs):
                for C in powerset(pairs):
                    spec = make_logic(2, D=D, F=F, V=V, C=C, cs="EMPTY")
                    rep = classify(analyze(spec), spec)
                    assert rep.two_agent_class == _published_two_agent_rule(
                        D, F, V, C
                    ), (D, F, V, C)
                    count += 1
    r1 = classify(analyze(j1()), j1())
    r2 = classify(analyze(j2()), j2())
    flags = r1.j1_pattern and not r1.j2_pattern and r2.j2_pattern
    _report(6, count == 4096 and flags, "4096 combinations, J1/J2 flagged")


# ---------------------------------------------------------------------------
# Criterion 7: structural bounds on the tableau runs.


def test_criterion_7_structural_bounds(corpus, analyses):
    checked = violations = 0
    for spec, f in corpus:
        if spec.name == "j1":
            got = decide(spec, f, analysis=analyses[spec.name])
            checked += 1
            if got.stats.max_prefix_len > formula_size(f):
                violations += 1
        elif spec.name == "j2":
            got = decide(spec, f, analysis=analyses[spec.name])
            checked += 1
            if got.stats.max_boxes > 2:
                violations += 1
        elif spec.name == "two-sigma2p":
            got = decide(spec, f, mode="improved", analysis=analyses[spec.name])
            checked += 1
            if got.stats.max_prefix_len > 1:
                violations += 1
    _report(
        7,
        checked >= 250 and violations == 0,
        f"{checked} runs instrumented, {violations} violations",
    )


# ---------------------------------------------------------------------------
# Criterion 8: a cluster exists for every V-class at every world of a
# valid model.


def test_criterion_8_clusters():
    rng = random.Random(1914)
    models = probes = 0
    for mk in (lp_style, j2, two_sigma2p, three_f):
        spec = mk()
        an = analyze(spec)
        for _ in range(30):
            m = random_valid_model(rng, spec, an)
            models += 1
            for L in an.v_classes():
                for u in m.frame.worlds:
                    assert find_cluster(m, an, L, u) is not None, (
                        spec.name, L, u,
                    )
                    probes += 1
    _report(8, models >= 100 and probes > 0, f"{models} models, {probes} probes")


# ---------------------------------------------------------------------------
# Criterion 9: the witness choice sequence never exceeds the term size
# plus the assumption count.


def test_criterion_9_choice_bound(corpus, analyses, monkeypatch):
    records = []
    original = StarEngine.query

    def recording_query(self, goal):
        got = original(self, goal)
        if got is not None:
            records.append(
                (
                    got.choice_len,
                    term_size(goal.star.term) + len(self.assumptions),
                    goal,
                )
            )
        return got

    monkeypatch.setattr(StarEngine, "query", recording_query)
    for spec, f in corpus[::3]:
        decide(spec, f, analysis=analyses[spec.name])
    rng = random.Random(11)
    for mk in ALL_LOGICS:
        base = mk()
        spec = make_logic(base.n, base.D, base.F, base.V, base.C, cs="EMPTY")
        an = analyze(spec)
        for _ in range(4):
            frame, assumptions, universe, _ = derivability_instance(rng, spec)
            engine = StarEngine(spec, an, frame, assumptions)
            for goal in sorted(universe, key=str):
                engine.query(goal)
    bad = [r for r in records if r[0] > r[1]]
    _report(
        9,
        len(records) > 0 and not bad,
        f"{len(records)} witnessed queries within bound",
    )
