"""Logic instances: the (n, D, F, V, C) parameters plus a schematic
constant specification, and lazy membership in the closure cl_n(CS).

Logic file format (line oriented, ``#`` comments):

    agents 3
    D 1 2
    F
    V 3 3          # one (i, j) pair per line
    C 3 1
    C 3 2
    CS TOTAL       # or explicit lines: CS c1 1 P1
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, Optional, Tuple

from . import syntax
from .syntax import (
    AgentMeta,
    Bang,
    Constant,
    FormulaMeta,
    Implies,
    Just,
    Scheme,
    TermMeta,
    FALSUM,
    match_scheme,
    rename_scheme,
)


# ---------------------------------------------------------------------------
# Axiom scheme identifiers


@dataclass(frozen=True)
class AxiomSchemeId:
    kind: str  # P1 | P2 | P3 | App | SumL | SumR | Fact | Cons | Ver | Conv
    i: Optional[int] = None
    j: Optional[int] = None

    def __str__(self):
        if self.kind in ("Fact", "Cons"):
            return f"{self.kind}({self.i})"
        if self.kind in ("Ver", "Conv"):
            return f"{self.kind}({self.i},{self.j})"
        return self.kind


P1 = AxiomSchemeId("P1")
P2 = AxiomSchemeId("P2")
P3 = AxiomSchemeId("P3")
APPLICATION = AxiomSchemeId("App")
SUM_LEFT = AxiomSchemeId("SumL")
SUM_RIGHT = AxiomSchemeId("SumR")


def factivity(i: int) -> AxiomSchemeId:
    return AxiomSchemeId("Fact", i)


def consistency(i: int) -> AxiomSchemeId:
    return AxiomSchemeId("Cons", i)


def verification(i: int, j: int) -> AxiomSchemeId:
    return AxiomSchemeId("Ver", i, j)


def conversion(i: int, j: int) -> AxiomSchemeId:
    return AxiomSchemeId("Conv", i, j)


_A = FormulaMeta("A")
_B = FormulaMeta("B")
_C = FormulaMeta("C")
_S = TermMeta("S")
_T = TermMeta("T")
_I = AgentMeta("I")


@lru_cache(maxsize=None)
def scheme_of(sid: AxiomSchemeId) -> Scheme:
    """The scheme named by an AxiomSchemeId, with formula metavariables
    A, B, C, term metavariables S, T, and the agent metavariable I for
    schemes quantified over all agents."""
    k = sid.kind
    if k == "P1":
        return Implies(_A, Implies(_B, _A))
    if k == "P2":
        return Implies(
            Implies(_A, Implies(_B, _C)),
            Implies(Implies(_A, _B), Implies(_A, _C)),
        )
    if k == "P3":
        return Implies(Implies(Implies(_A, FALSUM), FALSUM), _A)
    if k == "App":
        return Implies(
            Just(_S, _I, Implies(_A, _B)),
            Implies(Just(_T, _I, _A), Just(syntax.App(_S, _T), _I, _B)),
        )
    if k == "SumL":
        return Implies(Just(_S, _I, _A), Just(syntax.Sum(_S, _T), _I, _A))
    if k == "SumR":
        return Implies(Just(_S, _I, _A), Just(syntax.Sum(_T, _S), _I, _A))
    if k == "Fact":
        return Implies(Just(_T, sid.i, _A), _A)
    if k == "Cons":
        return Implies(Just(_T, sid.i, FALSUM), FALSUM)
    if k == "Ver":
        return Implies(
            Just(_T, sid.i, _A), Just(Bang(_T), sid.j, Just(_T, sid.i, _A))
        )
    if k == "Conv":
        return Implies(Just(_T, sid.i, _A), Just(_T, sid.j, _A))
    raise ValueError(f"unknown axiom scheme id {sid!r}")


class LogicError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Constant specifications


@dataclass(frozen=True)
class ConstantSpecification:
    entries: FrozenSet[Tuple[int, int, AxiomSchemeId]]  # (constant, agent, scheme)

    def schemes_for(self, constant: int, agent: int):
        return [s for (c, a, s) in self.entries if c == constant and a == agent]

    def is_schematically_injective(self) -> bool:
        seen = {}
        for c, a, s in self.entries:
            if seen.setdefault(c, s) != s:
                return False
        return True

    def appropriate_agents(self, valid_schemes) -> FrozenSet[int]:
        """Agents i such that every scheme in valid_schemes has a constant
        entry for i."""
        agents = set()
        by_agent = {}
        for c, a, s in self.entries:
            by_agent.setdefault(a, set()).add(s)
            agents.add(a)
        need = set(valid_schemes)
        return frozenset(a for a in agents if need <= by_agent[a])


@dataclass(frozen=True)
class LogicSpec:
    n: int
    D: FrozenSet[int]
    F: FrozenSet[int]
    V: FrozenSet[Tuple[int, int]]
    C: FrozenSet[Tuple[int, int]]
    cs: ConstantSpecification
    name: str = ""

    def __post_init__(self):
        agents = set(range(1, self.n + 1))
        if self.n < 1:
            raise LogicError("need at least one agent")
        if not self.D <= agents or not self.F <= agents:
            raise LogicError("D and F must be subsets of [n]")
        pairs = {(i, j) for i in agents for j in agents}
        if not self.V <= pairs or not self.C <= pairs:
            raise LogicError("V and C must be subsets of [n] x [n]")
        for c, a, s in self.cs.entries:
            if a not in agents:
                raise LogicError(f"CS entry for agent {a} outside [n]")
            if s not in self.axiom_scheme_ids():
                raise LogicError(f"CS entry names scheme {s} not in this logic")

    def agents(self):
        return range(1, self.n + 1)

    def axiom_scheme_ids(self):
        """All AxiomSchemeIds valid in this logic, in canonical order."""
        ids = [P1, P2, P3, APPLICATION, SUM_LEFT, SUM_RIGHT]
        ids += [factivity(i) for i in sorted(self.F)]
        ids += [consistency(i) for i in sorted(self.D)]
        ids += [verification(i, j) for (i, j) in sorted(self.V)]
        ids += [conversion(i, j) for (i, j) in sorted(self.C)]
        return ids

    def is_axiom_instance(self, f: syntax.Formula) -> Optional[AxiomSchemeId]:
        """The first axiom scheme that f instantiates, if any."""
        for sid in self.axiom_scheme_ids():
            if instantiates(scheme_of(sid), f):
                return sid
        return None

    def appropriate_for(self) -> FrozenSet[int]:
        return self.cs.appropriate_agents(self.axiom_scheme_ids())


def instantiates(scheme: Scheme, f) -> bool:
    """True when concrete formula f is an instance of the scheme (agent
    metavariables may take any concrete agent value)."""
    return match_scheme(rename_scheme(scheme), f) is not None


def total_cs(n: int, D, F, V, C) -> ConstantSpecification:
    """The TOTAL specification: constant c_k justifies the k-th scheme of
    the canonical scheme list, for every agent.  Axiomatically appropriate
    w.r.t. [n] and schematically injective."""
    probe = LogicSpec(
        n,
        frozenset(D),
        frozenset(F),
        frozenset(V),
        frozenset(C),
        ConstantSpecification(frozenset()),
    )
    entries = set()
    for k, sid in enumerate(probe.axiom_scheme_ids(), start=1):
        for a in range(1, n + 1):
            entries.add((k, a, sid))
    return ConstantSpecification(frozenset(entries))


def make_logic(n, D=(), F=(), V=(), C=(), cs="TOTAL", name="") -> LogicSpec:
    D, F = frozenset(D), frozenset(F)
    V = frozenset(tuple(p) for p in V)
    C = frozenset(tuple(p) for p in C)
    if cs == "TOTAL":
        cs = total_cs(n, D, F, V, C)
    elif cs == "EMPTY":
        cs = ConstantSpecification(frozenset())
    return LogicSpec(n, D, F, V, C, cs, name=name)


# ---------------------------------------------------------------------------
# cl_n(CS) membership


def in_cl(spec: LogicSpec, agent: int, term: syntax.Term, body) -> bool:
    """[term]_agent body in cl_n(cs)?  Decided lazily: either a direct CS
    instance (term a constant justifying a scheme that body instantiates),
    or term = !s with body = [s]_j psi and [s]_j psi in cl_n(cs); the !
    closure step admits any outer agent in [n]."""
    if agent not in spec.agents():
        return False
    if isinstance(term, Constant):
        for sid in spec.cs.schemes_for(term.index, agent):
            if instantiates(scheme_of(sid), body):
                return True
        return False
    if isinstance(term, Bang) and isinstance(body, Just):
        if body.term == term.inner:
            return in_cl(spec, body.agent, body.term, body.body)
    return False


# ---------------------------------------------------------------------------
# Logic file loading


def load_logic(text: str, name: str = "") -> LogicSpec:
    n = None
    D, F = set(), set()
    V, C = set(), set()
    cs_entries = set()
    cs_total = False
    scheme_names = {}

    def parse_scheme_name(tok: str, lineno: int) -> AxiomSchemeId:
        base = {"P1": P1, "P2": P2, "P3": P3, "App": APPLICATION,
                "SumL": SUM_LEFT, "SumR": SUM_RIGHT}
        if tok in base:
            return base[tok]
        for kind in ("Fact", "Cons", "Ver", "Conv"):
            if tok.startswith(kind + "(") and tok.endswith(")"):
                args = tok[len(kind) + 1:-1].split(",")
                try:
                    nums = [int(x) for x in args]
                except ValueError:
                    raise LogicError(f"line {lineno}: bad scheme {tok!r}")
                if kind in ("Fact", "Cons") and len(nums) == 1:
                    return AxiomSchemeId(kind, nums[0])
                if kind in ("Ver", "Conv") and len(nums) == 2:
                    return AxiomSchemeId(kind, nums[0], nums[1])
        raise LogicError(f"line {lineno}: unknown scheme {tok!r}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        try:
            if key == "agents":
                n = int(parts[1])
            elif key == "D":
                D.update(int(x) for x in parts[1:])
            elif key == "F":
                F.update(int(x) for x in parts[1:])
            elif key in ("V", "C"):
                if parts[1:]:
                    if len(parts) != 3:
                        raise LogicError(
                            f"line {lineno}: {key} takes one pair per line"
                        )
                    (V if key == "V" else C).add((int(parts[1]), int(parts[2])))
            elif key == "CS":
                if parts[1:] == ["TOTAL"]:
                    cs_total = True
                else:
                    if len(parts) != 4 or not parts[1].startswith("c"):
                        raise LogicError(f"line {lineno}: malformed CS entry")
                    cs_entries.add(
                        (int(parts[1][1:]), int(parts[2]),
                         parse_scheme_name(parts[3], lineno))
                    )
            else:
                raise LogicError(f"line {lineno}: unknown directive {key!r}")
        except (IndexError, ValueError) as e:
            if isinstance(e, LogicError):
                raise
            raise LogicError(f"line {lineno}: malformed entry {line!r}") from e

    if n is None:
        raise LogicError("missing 'agents' line")
    if cs_total:
        cs = total_cs(n, D, F, V, C)
    else:
        cs = ConstantSpecification(frozenset(cs_entries))
    return LogicSpec(
        n, frozenset(D), frozenset(F), frozenset(V), frozenset(C), cs, name=name
    )


def load_logic_file(path, name=None) -> LogicSpec:
    with open(path) as fh:
        text = fh.read()
    return load_logic(text, name=name if name is not None else str(path))
