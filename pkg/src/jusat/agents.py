"""Derived agent sets, interaction relations, equivalence classes, the
prefix-collapse rewrite system, visibility of V-classes, and the
complexity classifier.

Conventions: agent classes are frozensets of agent ids; a world prefix is
a tuple of classes (the root is the empty tuple); an agent string is a
tuple of symbols, each either a plain agent id or ("bar", id).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Tuple

from .logic import LogicSpec

AgentClass = FrozenSet[int]
Prefix = Tuple[AgentClass, ...]

ROOT: Prefix = ()


def _closure_pairs(pairs, domain):
    """Reflexive-transitive closure of a pair relation over domain."""
    reach = {x: {x} for x in domain}
    for (a, b) in pairs:
        if a in reach:
            reach[a].add(b)
    changed = True
    while changed:
        changed = False
        for x in domain:
            new = set()
            for y in reach[x]:
                new |= reach.get(y, {y})
            if not new <= reach[x]:
                reach[x] |= new
                changed = True
    return {(a, b) for a in domain for b in reach[a]}


@dataclass(frozen=True)
class ClassificationReport:
    sigma2p_condition: bool
    sigma2p_witness: Optional[AgentClass]
    two_agent_class: Optional[str]  # "PSPACE-complete" | "Sigma2p" (n == 2 only)
    j1_pattern: bool
    j2_pattern: bool
    nexp_note: str

    def as_dict(self):
        return {
            "sigma2p_condition": self.sigma2p_condition,
            "sigma2p_witness": sorted(self.sigma2p_witness)
            if self.sigma2p_witness is not None
            else None,
            "two_agent_class": self.two_agent_class,
            "j1_pattern": self.j1_pattern,
            "j2_pattern": self.j2_pattern,
            "nexp_note": self.nexp_note,
        }


@dataclass(frozen=True, eq=False)
class AgentAnalysis:
    spec: LogicSpec
    S: FrozenSet[int]
    R: FrozenSet[int]
    C_F: FrozenSet[Tuple[int, int]]
    C_F_star: FrozenSet[Tuple[int, int]]  # over [n]
    Q: FrozenSet[Tuple[int, int]]  # reflexive-transitive, over S
    P_C: Tuple[AgentClass, ...]
    P: Tuple[AgentClass, ...]  # P_VC
    chi: Dict[int, AgentClass]
    Pclass: Dict[int, AgentClass]
    leqC: FrozenSet[Tuple[AgentClass, AgentClass]]
    leqVC: FrozenSet[Tuple[AgentClass, AgentClass]]
    leqV: FrozenSet[Tuple[AgentClass, AgentClass]]
    MC: Dict[AgentClass, Tuple[AgentClass, ...]]
    N: Dict[int, FrozenSet[int]]
    vclass_flags: Dict[AgentClass, str]  # "V-class" | "C-class"
    bar_rep: Dict[AgentClass, int]

    # -- rewrite system ----------------------------------------------------

    def reach(self, a: int) -> FrozenSet[int]:
        """Symbols reachable from a by single-symbol rewriting: the rule
        a -> b applies when b C_F a, so reach(a) = {b | b C_F* a}."""
        return frozenset(b for (b, a2) in self.C_F_star if a2 == a)

    def coreach(self, a: int) -> FrozenSet[int]:
        return frozenset(b for (a2, b) in self.C_F_star if a2 == a)

    def is_v_class(self, L: AgentClass) -> bool:
        return self.vclass_flags.get(L) == "V-class"

    def v_classes(self):
        return [L for L in self.P if self.is_v_class(L)]


def analyze(spec: LogicSpec) -> AgentAnalysis:
    n = spec.n
    agents = set(range(1, n + 1))
    C_star = _closure_pairs(spec.C, agents)

    S = frozenset(i for i in agents if any((i, j) in C_star for j in spec.D | spec.F))
    R = frozenset(i for i in agents if any((i, j) in C_star for j in spec.F))

    C_F = frozenset(spec.C | {(i, j) for (i, j) in spec.V if i in R and j in S})
    C_F_star = frozenset(_closure_pairs(C_F, agents))

    VS = {(i, j) for (i, j) in spec.V if i in S and j in S}
    CS_ = {(i, j) for (i, j) in spec.C if i in S and j in S}
    Q = frozenset(_closure_pairs(VS | CS_, S))

    eqC = {(i, j) for (i, j) in C_F_star if (j, i) in C_F_star and i in S and j in S}
    eqVC = {(i, j) for (i, j) in Q if (j, i) in Q}

    def classes_of(eq, universe):
        seen, out = set(), []
        for i in sorted(universe):
            if i in seen:
                continue
            cls = frozenset(j for j in universe if (i, j) in eq)
            seen |= cls
            out.append(cls)
        return tuple(out)

    P_C = classes_of(eqC, S)
    P = classes_of(eqVC, S)
    chi = {i: L for L in P_C for i in L}
    Pclass = {i: L for L in P for i in L}

    leqC = frozenset(
        (L1, L2)
        for L1 in P_C
        for L2 in P_C
        if any((x, y) in C_F_star for x in L1 for y in L2)
    )
    leqVC = frozenset(
        (L1, L2)
        for L1 in P_C
        for L2 in P_C
        if any((x, y) in Q for x in L1 for y in L2)
    )
    # L1 <=_V L2 iff some x in L1, y in L2 with x Q V Q y
    QVQ = set()
    for (x, a) in Q:
        for (a2, b) in spec.V:
            if a2 == a:
                for (b2, y) in Q:
                    if b2 == b:
                        QVQ.add((x, y))
    leqV = frozenset(
        (L1, L2)
        for L1 in P_C
        for L2 in P_C
        if any((x, y) in QVQ for x in L1 for y in L2)
    )

    def lt(rel, L1, L2):
        return (L1, L2) in rel and (L2, L1) not in rel

    maximal = [L for L in P_C if not any(lt(leqC, L, L2) for L2 in P_C)]
    MC = {
        L: tuple(L2 for L2 in maximal if (L, L2) in leqC)
        for L in P_C
    }

    vclass_flags = {}
    for L in P:
        if any((x, y) in spec.V for x in L for y in L):
            vclass_flags[L] = "V-class"
        else:
            vclass_flags[L] = "C-class"

    # i in N(j) iff exist i', i'' in S \ R with i' ==_VC i'', i'' V C_F* j,
    # and chi(i) in M_C(i').
    VCFstar = {
        (a, j)
        for (a, b) in spec.V
        for (b2, j) in C_F_star
        if b2 == b
    }
    N = {}
    for j in sorted(S):
        members = set()
        for i in S:
            ok = False
            for i2 in S - R:  # i''
                if (i2, j) not in VCFstar:
                    continue
                for i1 in S - R:  # i'
                    if (i1, i2) in eqVC and chi[i] in MC[chi[i1]]:
                        ok = True
                        break
                if ok:
                    break
            if ok:
                members.add(i)
        N[j] = frozenset(members)

    bar_rep = {L: min(L) for L in P_C}

    return AgentAnalysis(
        spec=spec,
        S=S,
        R=R,
        C_F=C_F,
        C_F_star=C_F_star,
        Q=Q,
        P_C=P_C,
        P=P,
        chi=chi,
        Pclass=Pclass,
        leqC=leqC,
        leqVC=leqVC,
        leqV=leqV,
        MC=MC,
        N=N,
        vclass_flags=vclass_flags,
        bar_rep=bar_rep,
    )


# ---------------------------------------------------------------------------
# The collapse rewrite system on agent strings
#
# Rules: x -> y when y C_F x (single-symbol rewriting), and x y -> y when
# y V x (the left symbol of an adjacent pair is deleted).  Deletion never
# removes the rightmost symbol, so a full collapse is a forest of
# absorptions rooted at the last symbol; the interval DP below follows
# that structure.  An overlined symbol ("bar", x) stands for any string
# that collapses to x and is handled through host-state fixpoints instead
# of expansion.


def host_states(analysis: AgentAnalysis, target: int) -> FrozenSet[int]:
    """States that can absorb a symbol while the surrounding string can
    still collapse to target: the survivor's own trajectory states
    (coreach of target) plus dedicated hosts that are themselves
    absorbable toward the target (least fixpoint)."""
    H = set(analysis.coreach(target))
    changed = True
    while changed:
        changed = False
        for v in analysis.S:
            if v not in H and _absorbable_state(analysis, v, H):
                H.add(v)
                changed = True
    return frozenset(H)


def _absorbable_state(analysis: AgentAnalysis, v: int, hosts) -> bool:
    """Can a symbol currently in state v be deleted by some host state?
    Deletion of a by host h requires h V a."""
    V = analysis.spec.V
    for v2 in analysis.reach(v):
        if any((h, v2) in V for h in hosts):
            return True
    return False


def _absorbable_symbols(analysis: AgentAnalysis, hosts) -> FrozenSet[int]:
    return frozenset(
        a for a in analysis.S if _absorbable_state(analysis, a, hosts)
    )


def _base_states(analysis: AgentAnalysis, sym) -> FrozenSet[int]:
    """States a single symbol can evolve to on its own.  A plain symbol a
    reaches reach(a); an overlined symbol may first expand to any z with
    target in reach(z), then evolve."""
    if isinstance(sym, tuple) and sym[0] == "bar":
        x = sym[1]
        out = set()
        for z in analysis.coreach(x):
            out |= analysis.reach(z)
        return frozenset(out)
    return analysis.reach(sym)


def _segment_table(analysis: AgentAnalysis, word) -> dict:
    """best[(p, q)] = states t such that word[p..q] can collapse to a
    single symbol in state t (descended from word[q]); all sets are
    reach-closed.  Overlined roots additionally absorb left material via
    their internal host states."""
    V = analysis.spec.V
    k = len(word)
    best = {}
    for q in range(k):
        root = word[q]
        root_states = _base_states(analysis, root)
        bar_abs = None
        if isinstance(root, tuple) and root[0] == "bar":
            bar_abs = _absorbable_symbols(
                analysis, host_states(analysis, root[1])
            )
        # A[j] = achievable root states after absorbing word[j..q-1]
        A = {q: frozenset(root_states)}
        for j in range(q - 1, -1, -1):
            states = set()
            for p in range(j, q):
                seg = best.get((j, p))
                nxt = A.get(p + 1)
                if not seg or not nxt:
                    continue
                for t in nxt:
                    if any((t, a) in V for a in seg):
                        states.add(t)
                if bar_abs is not None and seg & bar_abs:
                    # the root's own expansion swallows this segment
                    states |= nxt
            A[j] = frozenset(states)
        for j in range(q, -1, -1):
            best[(j, q)] = A[j]
    return best


def _to_word(analysis: AgentAnalysis, symbols):
    word = []
    for s in symbols:
        a = s[1] if isinstance(s, tuple) else s
        if a not in analysis.S:
            raise ValueError(f"agent {a} outside S")
        word.append(s)
    return tuple(word)


def collapses_to(analysis: AgentAnalysis, symbols, target: int) -> bool:
    """Does the agent string rewrite to the single symbol target?"""
    word = _to_word(analysis, symbols)
    if target not in analysis.S:
        raise ValueError(f"agent {target} outside S")
    if not word:
        return False
    best = _segment_table(analysis, word)
    return target in best[(0, len(word) - 1)]


def absorbed_toward(analysis: AgentAnalysis, symbols, target: int) -> bool:
    """Is there some alpha in S* with (symbols + alpha) ->* target?

    True when the word collapses to target on its own, or when it splits
    into consecutive segments each absorbable by host states toward the
    target (the appended alpha supplies the final survivor)."""
    word = _to_word(analysis, symbols)
    if not word:
        return True  # alpha = target
    best = _segment_table(analysis, word)
    k = len(word)
    abs_syms = _absorbable_symbols(analysis, host_states(analysis, target))
    ok = [False] * (k + 1)
    ok[0] = True
    for q in range(1, k + 1):
        for p in range(q):
            if ok[p] and best[(p, q - 1)] & abs_syms:
                ok[q] = True
                break
    if ok[k]:
        return True
    # alternatively the last segment itself becomes the survivor
    for p in range(k):
        if ok[p] and target in best[(p, k - 1)]:
            return True
    return False


def brute_force_collapses(analysis: AgentAnalysis, symbols, target: int,
                          max_len: Optional[int] = None) -> bool:
    """Oracle: exhaustive search over plain-rule rewriting.  Plain rules
    never increase length, so the state space is finite."""
    word = tuple(symbols)
    if any(isinstance(s, tuple) for s in word):
        raise ValueError("brute force only handles plain symbols")
    V, goal = analysis.spec.V, (target,)
    seen = {word}
    frontier = [word]
    while frontier:
        w = frontier.pop()
        if w == goal:
            return True
        for idx, a in enumerate(w):
            for b in analysis.S:
                if (b, a) in analysis.C_F and b != a:
                    nw = w[:idx] + (b,) + w[idx + 1:]
                    if nw not in seen:
                        seen.add(nw)
                        frontier.append(nw)
            if idx + 1 < len(w) and (w[idx + 1], a) in V:
                nw = w[:idx] + w[idx + 1:]
                if nw not in seen:
                    seen.add(nw)
                    frontier.append(nw)
    return goal in seen


# ---------------------------------------------------------------------------
# Visibility


def visible(analysis: AgentAnalysis, L: AgentClass, sigma: Prefix) -> Optional[Prefix]:
    """The L-view from sigma, or None.  L is visible from sigma when
    sigma splits as tau + (chi(i),) + rest with chi(i) a subset of L and
    the overlined rest followed by some agent string collapsing to i."""
    if L not in analysis.P:
        raise ValueError("L must be a P-class of the analysis")
    for cut in range(len(sigma) - 1, -1, -1):
        cls = sigma[cut]
        if not cls <= L:
            continue
        rest = sigma[cut + 1:]
        word = [("bar", analysis.bar_rep[c]) for c in rest]
        for i in sorted(cls):
            if absorbed_toward(analysis, word, i):
                return sigma[: cut + 1]
    return None


# ---------------------------------------------------------------------------
# Classifier


def classify(analysis: AgentAnalysis, spec: LogicSpec) -> ClassificationReport:
    # Sigma2p condition: some V-class L such that every i in S \ R has an
    # i' in L with i C_F* i'.
    witness = None
    for L in analysis.v_classes():
        if all(
            any((i, i2) in analysis.C_F_star for i2 in L)
            for i in analysis.S - analysis.R
        ):
            witness = L
            break

    two_agent = None
    if spec.n == 2:
        two_agent = "Sigma2p"
        for (i, j) in ((1, 2), (2, 1)):
            if (
                i in spec.D - spec.F
                and spec.V
                and spec.V <= {(i, j), (j, j)}
                and (i, j) in spec.C
                and (j, i) not in spec.C
            ):
                two_agent = "PSPACE-complete"
                break

    # J1 pattern: branching prefix classes with no V-class (prefix-tree
    # branching drives PSPACE-hardness); J2 pattern: same branching plus a
    # self-verifying agent feeding the branching classes (EXP-hardness).
    branching = any(len(mc) >= 2 for mc in analysis.MC.values())
    has_v_class = bool(analysis.v_classes())
    j1_pattern = branching and not has_v_class
    j2_pattern = branching and has_v_class and witness is None

    return ClassificationReport(
        sigma2p_condition=witness is not None,
        sigma2p_witness=witness,
        two_agent_class=two_agent,
        j1_pattern=j1_pattern,
        j2_pattern=j2_pattern,
        nexp_note=(
            "satisfiability is in NEXP for schematic CS axiomatically "
            "appropriate w.r.t. D"
        ),
    )


def render_analysis(analysis: AgentAnalysis, report: ClassificationReport) -> str:
    def cls_str(L):
        return "{" + ",".join(str(i) for i in sorted(L)) + "}"

    lines = []
    lines.append(f"S = {sorted(analysis.S)}")
    lines.append(f"R = {sorted(analysis.R)}")
    lines.append(f"C_F = {sorted(analysis.C_F)}")
    lines.append("P_C = [" + ", ".join(cls_str(L) for L in analysis.P_C) + "]")
    lines.append(
        "P = ["
        + ", ".join(
            f"{cls_str(L)} ({analysis.vclass_flags[L]})" for L in analysis.P
        )
        + "]"
    )
    for L in analysis.P_C:
        lines.append(
            f"M_C({cls_str(L)}) = [" + ", ".join(cls_str(x) for x in analysis.MC[L]) + "]"
        )
    for j in sorted(analysis.N):
        lines.append(f"N({j}) = {sorted(analysis.N[j])}")
    lines.append("")
    lines.append(f"sigma2p condition: {report.sigma2p_condition}")
    if report.sigma2p_witness is not None:
        lines.append(f"  witness V-class: {cls_str(report.sigma2p_witness)}")
    if report.two_agent_class is not None:
        lines.append(f"two-agent classification: {report.two_agent_class}")
    lines.append(f"J1-style PSPACE pattern: {report.j1_pattern}")
    lines.append(f"J2-style EXP pattern: {report.j2_pattern}")
    lines.append(f"note: {report.nexp_note}")
    return "\n".join(lines)
