"""Justification terms, formulas, schemes, and the concrete grammar.

Grammar (ASCII):

    formula   := implication
    implication := unary ("->" implication)?          right-associative
    unary     := "~" unary | "[" term "]_" AGENT unary | primary
    primary   := "pK" | "false" | "(" formula ")" | METAVAR
    term      := sum
    sum       := app ("+" app)*                       left-associative
    app       := bang ("." bang)*                     left-associative
    bang      := "!" bang | "cK" | "xK" | "(" term ")" | METAVAR

``~f`` is sugar for ``f -> false``; ``f & g`` and ``f | g`` are accepted
as sugar for ``(f -> (g -> false)) -> false`` and ``(f -> false) -> g``.
Metavariables (uppercase identifiers such as ``A``, ``B2``) are only
meaningful when parsing schemes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Union


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Constant:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("constant index must be >= 1")


@dataclass(frozen=True)
class Variable:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("variable index must be >= 1")


@dataclass(frozen=True)
class Sum:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class App:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Bang:
    inner: "Term"


@dataclass(frozen=True)
class TermMeta:
    """Term metavariable; only occurs inside schemes."""

    name: str


Term = Union[Constant, Variable, Sum, App, Bang, TermMeta]


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Atom:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("atom index must be >= 1")


@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Implies:
    ant: "Formula"
    cons: "Formula"


@dataclass(frozen=True)
class Just:
    term: Term
    agent: "Agent"
    body: "Formula"


@dataclass(frozen=True)
class FormulaMeta:
    """Formula metavariable; only occurs inside schemes."""

    name: str


@dataclass(frozen=True)
class AgentMeta:
    """Agent metavariable ranging over [n]; only occurs inside schemes."""

    name: str


Agent = Union[int, AgentMeta]
Formula = Union[Atom, Falsum, Implies, Just, FormulaMeta]

FALSUM = Falsum()


@dataclass(frozen=True)
class StarExpression:
    agent: int
    term: Term
    body: Formula


def neg(f: Formula) -> Formula:
    return Implies(f, FALSUM)


def conj(a: Formula, b: Formula) -> Formula:
    return Implies(Implies(a, Implies(b, FALSUM)), FALSUM)


def disj(a: Formula, b: Formula) -> Formula:
    return Implies(Implies(a, FALSUM), b)


# A Scheme is just a formula tree that may contain FormulaMeta / TermMeta /
# AgentMeta leaves.  Concrete formulas are schemes without metavariables.
Scheme = Formula


def is_concrete(node) -> bool:
    """True when no metavariable occurs in the tree."""
    if isinstance(node, (FormulaMeta, TermMeta, AgentMeta)):
        return False
    if isinstance(node, (Atom, Falsum, Constant, Variable, int)):
        return True
    if isinstance(node, Implies):
        return is_concrete(node.ant) and is_concrete(node.cons)
    if isinstance(node, Just):
        return (
            is_concrete(node.term)
            and is_concrete(node.agent)
            and is_concrete(node.body)
        )
    if isinstance(node, (Sum, App)):
        return is_concrete(node.left) and is_concrete(node.right)
    if isinstance(node, Bang):
        return is_concrete(node.inner)
    raise TypeError(f"not a formula/term node: {node!r}")


# ---------------------------------------------------------------------------
# Size / traversal helpers


def term_size(t: Term) -> int:
    if isinstance(t, (Constant, Variable, TermMeta)):
        return 1
    if isinstance(t, Bang):
        return 1 + term_size(t.inner)
    return 1 + term_size(t.left) + term_size(t.right)


def formula_size(f: Formula) -> int:
    if isinstance(f, (Atom, Falsum, FormulaMeta)):
        return 1
    if isinstance(f, Implies):
        return 1 + formula_size(f.ant) + formula_size(f.cons)
    if isinstance(f, Just):
        return 1 + term_size(f.term) + formula_size(f.body)
    raise TypeError(f"not a formula: {f!r}")


def subterms(t: Term) -> set:
    out = {t}
    if isinstance(t, Bang):
        out |= subterms(t.inner)
    elif isinstance(t, (Sum, App)):
        out |= subterms(t.left)
        out |= subterms(t.right)
    return out


def subformulas(f: Formula) -> set:
    """All formula subtrees of f, including f itself."""
    out = {f}
    if isinstance(f, Implies):
        out |= subformulas(f.ant)
        out |= subformulas(f.cons)
    elif isinstance(f, Just):
        out |= subformulas(f.body)
    return out


def modal_depth(f: Formula) -> int:
    if isinstance(f, (Atom, Falsum)):
        return 0
    if isinstance(f, Implies):
        return max(modal_depth(f.ant), modal_depth(f.cons))
    if isinstance(f, Just):
        return 1 + modal_depth(f.body)
    raise TypeError(f"not a concrete formula: {f!r}")


def atoms_of(f: Formula) -> set:
    return {g.index for g in subformulas(f) if isinstance(g, Atom)}


def justified_subformulas(f: Formula) -> set:
    """All Just subformulas of f (the relevant evidence expressions)."""
    return {g for g in subformulas(f) if isinstance(g, Just)}


# ---------------------------------------------------------------------------
# Printing


_TERM_PREC = {"sum": 0, "app": 1, "bang": 2}


def print_term(t: Term) -> str:
    return _pt(t, 0)


def _pt(t: Term, prec: int) -> str:
    if isinstance(t, Constant):
        return f"c{t.index}"
    if isinstance(t, Variable):
        return f"x{t.index}"
    if isinstance(t, TermMeta):
        return t.name
    if isinstance(t, Bang):
        return "!" + _pt(t.inner, 2)
    if isinstance(t, App):
        s = f"{_pt(t.left, 1)} . {_pt(t.right, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, Sum):
        s = f"{_pt(t.left, 0)} + {_pt(t.right, 1)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not a term: {t!r}")


def print_formula(f: Formula) -> str:
    return _pf(f, top=True)


def _agent_str(a: Agent) -> str:
    return a.name if isinstance(a, AgentMeta) else str(a)


def _pf(f: Formula, top: bool) -> str:
    if isinstance(f, Atom):
        return f"p{f.index}"
    if isinstance(f, Falsum):
        return "false"
    if isinstance(f, FormulaMeta):
        return f.name
    if isinstance(f, Just):
        body = _pf(f.body, top=False)
        return f"[{print_term(f.term)}]_{_agent_str(f.agent)} {body}"
    if isinstance(f, Implies):
        ant = _pf(f.ant, top=True)
        if isinstance(f.ant, (Implies, Just)):
            ant = f"({ant})"
        cons = _pf(f.cons, top=True)
        s = f"{ant} -> {cons}"
        return s if top else f"({s})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_PUNCT = ["->", "]_", "(", ")", "[", "+", ".", "!", "~", "&", "|"]


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append((p, i))
                i += len(p)
                break
        else:
            if ch.isalnum() or ch == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                tokens.append((text[i:j], i))
                i = j
            else:
                raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("<eof>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_meta: bool):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.allow_meta = allow_meta

    def peek(self):
        return self.tokens[self.pos][0]

    def here(self):
        return self.tokens[self.pos][1]

    def take(self, expected: Optional[str] = None) -> str:
        tok, at = self.tokens[self.pos]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", at)
        self.pos += 1
        return tok

    # formulas -------------------------------------------------------------

    def formula(self) -> Formula:
        left = self.unary()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.formula())
        if self.peek() == "&":
            self.take()
            return conj(left, self.formula())
        if self.peek() == "|":
            self.take()
            return disj(left, self.formula())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return neg(self.unary())
        if tok == "[":
            self.take()
            t = self.term()
            self.take("]_")
            agent_tok, at = self.tokens[self.pos]
            self.pos += 1
            if not agent_tok.isdigit() or int(agent_tok) < 1:
                raise ParseError(f"bad agent id {agent_tok!r}", at)
            return Just(t, int(agent_tok), self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok, at = self.tokens[self.pos]
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok == "false":
            self.take()
            return FALSUM
        if tok.startswith("p") and tok[1:].isdigit() and int(tok[1:]) >= 1:
            self.take()
            return Atom(int(tok[1:]))
        if self.allow_meta and tok[:1].isupper() and tok.isalnum():
            self.take()
            return FormulaMeta(tok)
        raise ParseError(f"expected a formula, found {tok!r}", at)

    # terms ----------------------------------------------------------------

    def term(self) -> Term:
        left = self.app()
        while self.peek() == "+":
            self.take()
            left = Sum(left, self.app())
        return left

    def app(self) -> Term:
        left = self.bang()
        while self.peek() == ".":
            self.take()
            left = App(left, self.bang())
        return left

    def bang(self) -> Term:
        tok, at = self.tokens[self.pos]
        if tok == "!":
            self.take()
            return Bang(self.bang())
        if tok == "(":
            self.take()
            t = self.term()
            self.take(")")
            return t
        if tok.startswith("c") and tok[1:].isdigit() and int(tok[1:]) >= 1:
            self.take()
            return Constant(int(tok[1:]))
        if tok.startswith("x") and tok[1:].isdigit() and int(tok[1:]) >= 1:
            self.take()
            return Variable(int(tok[1:]))
        if self.allow_meta and tok[:1].isupper() and tok.isalnum():
            self.take()
            return TermMeta(tok)
        raise ParseError(f"expected a term, found {tok!r}", at)


def parse_formula(text: str) -> Formula:
    p = _Parser(text, allow_meta=False)
    f = p.formula()
    p.take("<eof>")
    return f


def parse_term(text: str) -> Term:
    p = _Parser(text, allow_meta=False)
    t = p.term()
    p.take("<eof>")
    return t


def parse_scheme(text: str) -> Scheme:
    """Like parse_formula but uppercase identifiers become metavariables."""
    p = _Parser(text, allow_meta=True)
    f = p.formula()
    p.take("<eof>")
    return f


# ---------------------------------------------------------------------------
# Scheme unification (Robinson, triangular substitutions, memoized on shared
# subtrees so DAG-shaped schemes unify in polynomial time)


class Substitution:
    """Triangular substitution: bindings are resolved lazily via walk()."""

    def __init__(self, bindings=None):
        self.bindings = dict(bindings or {})

    def walk(self, node):
        while isinstance(node, (FormulaMeta, TermMeta, AgentMeta)):
            if node in self.bindings:
                node = self.bindings[node]
            else:
                return node
        return node

    def bind(self, meta, value) -> None:
        self.bindings[meta] = value

    def apply(self, node):
        """Fully resolve node under the substitution (memoized)."""
        memo = {}

        def go(x):
            x = self.walk(x)
            key = id(x)
            if key in memo:
                return memo[key]
            if isinstance(x, Implies):
                r = Implies(go(x.ant), go(x.cons))
            elif isinstance(x, Just):
                r = Just(go(x.term), go(x.agent), go(x.body))
            elif isinstance(x, Sum):
                r = Sum(go(x.left), go(x.right))
            elif isinstance(x, App):
                r = App(go(x.left), go(x.right))
            elif isinstance(x, Bang):
                r = Bang(go(x.inner))
            else:
                r = x
            memo[key] = r
            return r

        return go(node)


def _occurs(meta, node, subst: Substitution) -> bool:
    node = subst.walk(node)
    if node == meta:
        return True
    if isinstance(node, Implies):
        return _occurs(meta, node.ant, subst) or _occurs(meta, node.cons, subst)
    if isinstance(node, Just):
        return (
            _occurs(meta, node.term, subst)
            or _occurs(meta, node.agent, subst)
            or _occurs(meta, node.body, subst)
        )
    if isinstance(node, (Sum, App)):
        return _occurs(meta, node.left, subst) or _occurs(meta, node.right, subst)
    if isinstance(node, Bang):
        return _occurs(meta, node.inner, subst)
    return False


def _unify(a, b, subst: Substitution) -> bool:
    a = subst.walk(a)
    b = subst.walk(b)
    if a == b:
        return True
    if isinstance(a, FormulaMeta) or isinstance(a, TermMeta) or isinstance(a, AgentMeta):
        if _occurs(a, b, subst):
            return False
        subst.bind(a, b)
        return True
    if isinstance(b, (FormulaMeta, TermMeta, AgentMeta)):
        if _occurs(b, a, subst):
            return False
        subst.bind(b, a)
        return True
    if isinstance(a, Implies) and isinstance(b, Implies):
        return _unify(a.ant, b.ant, subst) and _unify(a.cons, b.cons, subst)
    if isinstance(a, Just) and isinstance(b, Just):
        return (
            _unify(a.agent, b.agent, subst)
            and _unify(a.term, b.term, subst)
            and _unify(a.body, b.body, subst)
        )
    if isinstance(a, Sum) and isinstance(b, Sum):
        return _unify(a.left, b.left, subst) and _unify(a.right, b.right, subst)
    if isinstance(a, App) and isinstance(b, App):
        return _unify(a.left, b.left, subst) and _unify(a.right, b.right, subst)
    if isinstance(a, Bang) and isinstance(b, Bang):
        return _unify(a.inner, b.inner, subst)
    return False


def unify_schemes(a: Scheme, b: Scheme) -> Optional[Substitution]:
    """Most-general unifier of two schemes, or None on clash/occurs failure.

    Metavariable namespaces of a and b must be disjoint; use
    rename_scheme() before calling if they might overlap.
    """
    subst = Substitution()
    if _unify(a, b, subst):
        return subst
    return None


def match_scheme(pattern: Scheme, concrete) -> Optional[Substitution]:
    """One-sided unification: metavariables may occur only in pattern."""
    if not is_concrete(concrete):
        raise ValueError("match_scheme target must be concrete")
    return unify_schemes(pattern, concrete)


_fresh_counter = itertools.count(1)


def fresh_name(prefix: str = "M") -> str:
    return f"{prefix}#{next(_fresh_counter)}"


def rename_scheme(s: Scheme, suffix: Optional[str] = None) -> Scheme:
    """Rename every metavariable in s apart from all other schemes."""
    if suffix is None:
        suffix = f"#{next(_fresh_counter)}"
    memo = {}

    def go(x):
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, FormulaMeta):
            r = FormulaMeta(x.name + suffix)
        elif isinstance(x, TermMeta):
            r = TermMeta(x.name + suffix)
        elif isinstance(x, AgentMeta):
            r = AgentMeta(x.name + suffix)
        elif isinstance(x, Implies):
            r = Implies(go(x.ant), go(x.cons))
        elif isinstance(x, Just):
            r = Just(go(x.term), go(x.agent), go(x.body))
        elif isinstance(x, Sum):
            r = Sum(go(x.left), go(x.right))
        elif isinstance(x, App):
            r = App(go(x.left), go(x.right))
        elif isinstance(x, Bang):
            r = Bang(go(x.inner))
        else:
            r = x
        memo[key] = r
        return r

    return go(s)


def canonical_scheme(s: Scheme) -> Scheme:
    """Rename metavariables in first-visit order; equal results mean the
    schemes are identical up to renaming."""
    mapping = {}

    def go(x):
        if isinstance(x, (FormulaMeta, TermMeta, AgentMeta)):
            if x not in mapping:
                mapping[x] = type(x)(f"_{len(mapping)}")
            return mapping[x]
        if isinstance(x, Implies):
            return Implies(go(x.ant), go(x.cons))
        if isinstance(x, Just):
            return Just(go(x.term), go(x.agent), go(x.body))
        if isinstance(x, Sum):
            return Sum(go(x.left), go(x.right))
        if isinstance(x, App):
            return App(go(x.left), go(x.right))
        if isinstance(x, Bang):
            return Bang(go(x.inner))
        return x

    return go(s)
