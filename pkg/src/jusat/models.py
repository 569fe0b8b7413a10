"""F-models: Kripke frames with admissible evidence, the truth
evaluator, frame validation, a bounded brute-force satisfiability
oracle, and the cluster finder for V-classes.

Evidence is never stored pointwise.  A model carries a seed set of
prefixed star-expressions; membership of a world in A_i(t, psi) is the
derivability of w *_i(t, psi) from the seeds, which by construction
yields the minimal admissible evidence function containing the seeds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from . import syntax
from .agents import AgentAnalysis, AgentClass
from .logic import LogicSpec
from .star import FiniteFrame, PrefixedStar, StarEngine, pstar
from .syntax import (
    Atom,
    Falsum,
    Formula,
    Implies,
    Just,
    StarExpression,
    Term,
    parse_formula,
    parse_term,
    print_formula,
    print_term,
)


class ModelError(ValueError):
    pass


@dataclass(eq=False)
class FModel:
    spec: LogicSpec
    analysis: AgentAnalysis
    frame: FiniteFrame
    valuation: Dict[int, FrozenSet]  # atom index -> set of worlds
    seeds: FrozenSet[PrefixedStar]
    _engine: Optional[StarEngine] = field(default=None, repr=False)
    _cache: Dict[Tuple[object, Formula], bool] = field(
        default_factory=dict, repr=False
    )

    @property
    def engine(self) -> StarEngine:
        if self._engine is None:
            self._engine = StarEngine(
                self.spec, self.analysis, self.frame, self.seeds
            )
        return self._engine

    def evidence(self, agent: int, term: Term, body: Formula) -> FrozenSet:
        return self.engine.derivable_worlds(agent, term, body)

    def successors(self, agent: int, world):
        return [b for (a, b) in self.frame.edges(agent) if a == world]

    def evaluate(self, world, f: Formula) -> bool:
        if world not in self.frame.worlds:
            raise ModelError(f"world {world!r} not in model")
        key = (world, f)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if isinstance(f, Falsum):
            out = False
        elif isinstance(f, Atom):
            out = world in self.valuation.get(f.index, frozenset())
        elif isinstance(f, Implies):
            out = (not self.evaluate(world, f.ant)) or self.evaluate(world, f.cons)
        elif isinstance(f, Just):
            out = world in self.evidence(f.agent, f.term, f.body) and all(
                self.evaluate(b, f.body) for b in self.successors(f.agent, world)
            )
        else:
            raise ModelError(f"cannot evaluate {f!r}")
        self._cache[key] = out
        return out


def check_strong_evidence(model: FModel, relevant) -> bool:
    """True when, on every relevant (world, agent, term, body) tuple,
    evidence membership already implies truth of the justified formula
    (all successors satisfy the body)."""
    for (w, i, t, body) in relevant:
        if w in model.evidence(i, t, body):
            if not all(model.evaluate(b, body) for b in model.successors(i, w)):
                return False
    return True


def relevant_expressions(model: FModel, f: Formula):
    out = []
    for g in syntax.subformulas(f):
        if isinstance(g, Just):
            for w in model.frame.worlds:
                out.append((w, g.agent, g.term, g.body))
    return out


def validate_frame(frame: FiniteFrame, spec: LogicSpec, analysis=None) -> List[str]:
    """Violations of the frame conditions: reflexivity on F, seriality
    on D, the V composition condition, and the C subset condition.  Each
    violation names witnesses."""
    out = []
    for i in sorted(spec.F):
        for w in frame.worlds:
            if (w, w) not in frame.edges(i):
                out.append(f"reflexivity: agent {i} lacks loop at {w!r}")
    for i in sorted(spec.D):
        edges = frame.edges(i)
        for w in frame.worlds:
            if not any(a == w for (a, b) in edges):
                out.append(f"seriality: agent {i} has no successor at {w!r}")
    for (i, j) in sorted(spec.V):
        ri, rj = frame.edges(i), frame.edges(j)
        for (a, b) in rj:
            for (b2, c) in ri:
                if b2 == b and (a, c) not in ri:
                    out.append(
                        f"V({i},{j}): {a!r} R_{j} {b!r} R_{i} {c!r} "
                        f"but not {a!r} R_{i} {c!r}"
                    )
    for (i, j) in sorted(spec.C):
        ri, rj = frame.edges(i), frame.edges(j)
        for e in rj - ri:
            out.append(f"C({i},{j}): edge {e!r} in R_{j} missing from R_{i}")
    return out


# ---------------------------------------------------------------------------
# Brute-force satisfiability oracle


def _all_relations(n: int, worlds) -> Iterable[Dict[int, FrozenSet]]:
    pairs = [(a, b) for a in worlds for b in worlds]
    per_agent = [
        [frozenset(c) for r in range(len(pairs) + 1)
         for c in itertools.combinations(pairs, r)]
        for _ in range(n)
    ]
    for combo in itertools.product(*per_agent):
        yield {i + 1: combo[i] for i in range(n)}


def brute_force_sat_detail(
    spec: LogicSpec,
    analysis: AgentAnalysis,
    f: Formula,
    max_worlds: int,
    budget: int = 200_000,
) -> Tuple[Optional[FModel], bool]:
    """Exhaustive search for a model of f with at most max_worlds worlds,
    valid frame, and the strong evidence property on f's justification
    subformulas.  Returns (model-or-None, exhausted); exhausted is False
    when the candidate budget ran out before the space was covered, in
    which case a None verdict is not conclusive."""
    atoms = sorted(syntax.atoms_of(f))
    justs = [g for g in syntax.subformulas(f) if isinstance(g, Just)]
    spent = 0
    for k in range(1, max_worlds + 1):
        worlds = tuple(range(k))
        seed_tuples = [
            (w, g.agent, g.term, g.body) for g in justs for w in worlds
        ]
        for rel in _all_relations(spec.n, worlds):
            spent += 1
            if spent > budget:
                return None, False
            frame = FiniteFrame(worlds, rel)
            if validate_frame(frame, spec):
                continue
            for val_bits in itertools.product(*[range(2 ** k)] * len(atoms)):
                valuation = {
                    p: frozenset(w for w in worlds if bits & (1 << w))
                    for p, bits in zip(atoms, val_bits)
                }
                for r in range(len(seed_tuples) + 1):
                    for chosen in itertools.combinations(seed_tuples, r):
                        spent += 1
                        if spent > budget:
                            return None, False
                        seeds = frozenset(
                            pstar(w, i, t, b) for (w, i, t, b) in chosen
                        )
                        model = FModel(spec, analysis, frame, valuation, seeds)
                        relevant = [
                            (w, g.agent, g.term, g.body)
                            for g in justs
                            for w in worlds
                        ]
                        if not check_strong_evidence(model, relevant):
                            continue
                        if model.evaluate(worlds[0], f):
                            return model, True
    return None, True


def brute_force_sat(
    spec: LogicSpec,
    analysis: AgentAnalysis,
    f: Formula,
    max_worlds: int,
    budget: int = 200_000,
) -> Optional[FModel]:
    model, _ = brute_force_sat_detail(spec, analysis, f, max_worlds, budget)
    return model


# ---------------------------------------------------------------------------
# Cluster finder


def find_cluster(
    model: FModel, analysis: AgentAnalysis, Pa: AgentClass, u
) -> Optional[Dict[int, object]]:
    """A Pa-cluster for u: worlds (a_i) for i in Pa with u R_i a_i, such
    that whenever a_i and b share an R_j successor, b R_j a_j.  Found by
    exhaustive search over world tuples."""
    if not analysis.is_v_class(Pa):
        raise ModelError(f"{set(Pa)} is not a V-class")
    members = sorted(Pa)
    W = model.frame.worlds
    for combo in itertools.product(W, repeat=len(members)):
        a = dict(zip(members, combo))
        if any((u, a[i]) not in model.frame.edges(i) for i in members):
            continue
        ok = True
        for i in members:
            for j in members:
                rj = model.frame.edges(j)
                for (x, v) in rj:
                    if x != a[i]:
                        continue
                    for (b, v2) in rj:
                        if v2 == v and (b, a[j]) not in rj:
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return a
    return None


# ---------------------------------------------------------------------------
# Serialization


def model_to_text(model: FModel) -> str:
    names = {w: f"w{k}" for k, w in enumerate(model.frame.worlds)}
    lines = []
    for w in model.frame.worlds:
        lines.append(f"world {names[w]}")
    for i in sorted(model.frame.rel):
        for (a, b) in sorted(model.frame.rel[i], key=lambda e: (str(e[0]), str(e[1]))):
            lines.append(f"edge {i} {names[a]} {names[b]}")
    for p in sorted(model.valuation):
        for w in model.frame.worlds:
            if w in model.valuation[p]:
                lines.append(f"val p{p} {names[w]}")
    for ps in sorted(model.seeds, key=str):
        lines.append(
            f"seed {names[ps.world]} {ps.star.agent} | "
            f"{print_term(ps.star.term)} | {print_formula(ps.star.body)}"
        )
    return "\n".join(lines) + "\n"


def model_from_text(text: str, spec: LogicSpec, analysis: AgentAnalysis) -> FModel:
    worlds: List[str] = []
    rel: Dict[int, set] = {}
    valuation: Dict[int, set] = {}
    seeds = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "world":
                worlds.append(parts[1])
            elif parts[0] == "edge":
                rel.setdefault(int(parts[1]), set()).add((parts[2], parts[3]))
            elif parts[0] == "val":
                if not parts[1].startswith("p"):
                    raise ModelError(f"line {lineno}: bad atom {parts[1]!r}")
                valuation.setdefault(int(parts[1][1:]), set()).add(parts[2])
            elif parts[0] == "seed":
                head, term_text, body_text = line.split("|")
                _, w, agent = head.split()
                seeds.add(
                    pstar(
                        w,
                        int(agent),
                        parse_term(term_text.strip()),
                        parse_formula(body_text.strip()),
                    )
                )
            else:
                raise ModelError(f"line {lineno}: unknown directive {parts[0]!r}")
        except (IndexError, ValueError) as e:
            if isinstance(e, ModelError):
                raise
            raise ModelError(f"line {lineno}: malformed entry {line!r}") from e
    frame = FiniteFrame(
        tuple(worlds), {i: frozenset(v) for i, v in rel.items()}
    )
    return FModel(
        spec,
        analysis,
        frame,
        {p: frozenset(v) for p, v in valuation.items()},
        frozenset(seeds),
    )
