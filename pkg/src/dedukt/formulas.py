"""Formulas of the two-operator epistemic language and their term encoding.

The core connectives are ``Not``, ``And``, ``Know`` (implicit knowledge),
``XKnow`` (explicit, deduction-based knowledge) and ``Obs`` (observation of a
ground term).  Disjunction, implication, ``true`` and ``false`` are
abbreviations expanded at parse time.  ``Or`` and ``L`` (the dual of ``Know``)
only appear in negation normal form output.
"""

from dataclasses import dataclass

from .errors import ParseError, SignatureError, TranslationError
from .syntax import Lexer
from .terms import (
    KD_SHARED,
    App,
    Signature,
    TermReader,
    Var,
    apply_substitution,
    is_kd_symbol,
    iter_subterms,
    kd_name,
    parse_kd_name,
    print_term,
)


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return print_formula(self)


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    term: object

    def __repr__(self):
        return f"Atom({print_term(self.term)})"


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Know(Formula):
    agent: int
    sub: Formula


@dataclass(frozen=True)
class L(Formula):
    agent: int
    sub: Formula


@dataclass(frozen=True)
class XKnow(Formula):
    agent: int
    sub: Formula


@dataclass(frozen=True, repr=False)
class Obs(Formula):
    agent: int
    term: object

    def __repr__(self):
        return f"Obs({self.agent}, {print_term(self.term)})"


@dataclass(frozen=True)
class Meta(Formula):
    """A formula metavariable (only in axiom schemas)."""

    name: str


@dataclass(frozen=True)
class Lit(Formula):
    """``true`` or ``false`` kept literally (only in axiom schemas)."""

    value: bool


@dataclass(frozen=True)
class Imp(Formula):
    """Implication kept literally (only in axiom schemas)."""

    left: Formula
    right: Formula


def Or_(a, b):
    """Disjunction by abbreviation: ``!(!a & !b)``."""
    return Not(And(Not(a), Not(b)))


def Implies(a, b):
    """Implication by abbreviation: ``!a | b``."""
    return Or_(Not(a), b)


def Iff(a, b):
    return And(Implies(a, b), Implies(b, a))


def conj(items):
    items = list(items)
    if not items:
        raise ValueError("empty conjunction")
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def tautology(sig):
    """The fixed tautology ``!(p0 & !p0)`` with ``p0`` the first base constant."""
    base = sig.base() if sig is not None else None
    consts = base.constants() if base is not None else []
    if not consts:
        raise SignatureError("`true`/`false` need a signature with at least one constant")
    p0 = Atom(App(consts[0], ()))
    return Not(And(p0, Not(p0)))


def subformulas(phi):
    out = []
    stack = [phi]
    while stack:
        f = stack.pop()
        out.append(f)
        if isinstance(f, (Not, Know, L, XKnow)):
            stack.append(f.sub)
        elif isinstance(f, (And, Or, Imp)):
            stack.append(f.right)
            stack.append(f.left)
    return out


def formula_size(phi):
    """Symbol count, with each term symbol and each operator counted once."""
    if isinstance(phi, Atom):
        return phi.term.size
    if isinstance(phi, Obs):
        return 1 + phi.term.size
    if isinstance(phi, (Meta, Lit)):
        return 1
    if isinstance(phi, (Not, Know, L, XKnow)):
        return 1 + formula_size(phi.sub)
    return 1 + formula_size(phi.left) + formula_size(phi.right)


def agents_of(phi):
    return {f.agent for f in subformulas(phi) if isinstance(f, (Know, L, XKnow, Obs))}


# -- parsing -------------------------------------------------------------

def _split_operator(name):
    for prefix in ("Ob", "K", "X", "L"):
        if name.startswith(prefix):
            rest = name[len(prefix):]
            if rest == "":
                return prefix, None
            if rest.isdigit() and not rest.startswith("0"):
                return prefix, int(rest)
    return None


class _FormulaParser:
    def __init__(self, text, sig, agents):
        self.lx = Lexer(text)
        self.sig = sig
        self.agents = agents
        self.inferred = {} if sig is None else None
        self.terms = TermReader(self.lx, sig, self.inferred, allow_vars=False)
        self.used_true = []

    def parse(self):
        f = self.implication()
        self.lx.expect_eof()
        return f

    def implication(self):
        left = self.disjunction()
        if self.lx.accept("=>"):
            right = self.implication()
            return Implies(left, right)
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.lx.accept("|"):
            left = Or_(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.lx.accept("&"):
            left = And(left, self.unary())
        return left

    def _agent(self, index, tok):
        if index is None:
            return 1
        if not 1 <= index <= self.agents:
            raise self.lx.error(f"agent index {index} out of range 1..{self.agents}", tok)
        return index

    def unary(self):
        lx = self.lx
        if lx.accept("!"):
            return Not(self.unary())
        if lx.accept("("):
            f = self.implication()
            lx.expect(")")
            return f
        tok = lx.peek()
        if tok.kind != "ident":
            raise lx.error(f"expected a formula, found {tok.text or 'end of input'!r}")
        op = _split_operator(tok.text)
        if op is not None and not (self.sig is not None and tok.text in self.sig):
            kind, index = op
            if kind == "L":
                raise lx.error("the dual modality L is output-only and not accepted in input", tok)
            if kind == "Ob":
                lx.next()
                agent = self._agent(index, tok)
                lx.expect("(")
                start = lx.peek()
                term = self.terms.read()
                lx.expect(")")
                bad = sorted({u.symbol for u in iter_subterms(term) if is_kd_symbol(u.symbol)})
                if bad:
                    raise lx.error(f"Ob applies to base terms only; found {', '.join(bad)}", start)
                return Obs(agent, term)
            lx.next()
            agent = self._agent(index, tok)
            sub = self.unary()
            return Know(agent, sub) if kind == "K" else XKnow(agent, sub)
        if tok.text in ("true", "false") and lx.peek(1).text != "(":
            lx.next()
            self.used_true.append(tok)
            return tok.text
        term = self.terms.read()
        if is_kd_symbol(term.symbol):
            raise ParseError(
                f"{term.symbol} is a logical constructor; use the formula syntax instead",
                lx.text,
                tok.pos,
            )
        return Atom(term)


def parse_formula(text, sig=None, agents=1):
    """Parse ``text``; with ``sig=None`` symbol arities are inferred."""
    p = _FormulaParser(text, sig, agents)
    raw = p.parse()
    if p.used_true:
        if sig is None:
            sig_for_true = Signature({k: v for k, v in p.inferred.items() if not is_kd_symbol(k)})
        else:
            sig_for_true = sig
        try:
            taut = tautology(sig_for_true)
        except SignatureError as e:
            raise ParseError(str(e), text, p.used_true[0].pos) from None
        raw = _resolve_truth(raw, taut)
    return raw


def _resolve_truth(f, taut):
    if f == "true":
        return taut
    if f == "false":
        return Not(taut)
    if isinstance(f, Not):
        return Not(_resolve_truth(f.sub, taut))
    if isinstance(f, And):
        return And(_resolve_truth(f.left, taut), _resolve_truth(f.right, taut))
    if isinstance(f, Know):
        return Know(f.agent, _resolve_truth(f.sub, taut))
    if isinstance(f, XKnow):
        return XKnow(f.agent, _resolve_truth(f.sub, taut))
    return f


# -- printing ------------------------------------------------------------

_PREC = {Imp: 0, Or: 1, And: 2}


def _op(name, agent, indexed):
    return f"{name}{agent}" if indexed or agent != 1 else name


def print_formula(phi, agents=1):
    """Concrete syntax accepted by :func:`parse_formula` (except for ``L``)."""
    indexed = agents > 1

    def go(f, ctx):
        if isinstance(f, Atom):
            return print_term(f.term)
        if isinstance(f, Meta):
            return "?" + f.name
        if isinstance(f, Lit):
            return "true" if f.value else "false"
        if isinstance(f, Obs):
            return f"{_op('Ob', f.agent, indexed)}({print_term(f.term)})"
        if isinstance(f, Not):
            return "!" + go(f.sub, 3)
        if isinstance(f, (Know, L, XKnow)):
            name = {Know: "K", L: "L", XKnow: "X"}[type(f)]
            return f"{_op(name, f.agent, indexed)} {go(f.sub, 3)}"
        prec = _PREC[type(f)]
        if isinstance(f, Imp):
            text = go(f.left, prec + 1) + " => " + go(f.right, prec)
        else:
            sym = " & " if isinstance(f, And) else " | "
            text = go(f.left, prec) + sym + go(f.right, prec + 1)
        return f"({text})" if ctx > prec else text

    return go(phi, 0)


# -- the term encoding ---------------------------------------------------


def to_term(phi):
    """Encode a formula as a ground term over the extended signature."""
    if isinstance(phi, Atom):
        return phi.term
    if isinstance(phi, Not):
        return App("not", (to_term(phi.sub),))
    if isinstance(phi, And):
        return App("and", (to_term(phi.left), to_term(phi.right)))
    if isinstance(phi, Know):
        return App(kd_name("know", phi.agent), (to_term(phi.sub),))
    if isinstance(phi, XKnow):
        return App(kd_name("xknow", phi.agent), (to_term(phi.sub),))
    if isinstance(phi, Obs):
        return App(kd_name("ob", phi.agent), (phi.term,))
    raise TranslationError(f"{type(phi).__name__} has no term encoding; expand it first")


def _is_base_term(t):
    """No logical constructors anywhere (variables are allowed)."""
    return not any(isinstance(u, App) and is_kd_symbol(u.symbol) for u in iter_subterms(t))


def from_term(t, sig=None):
    """Read a term back as a formula.

    Logical constructors are only interpreted above base symbols; anything
    headed by a base symbol is a primitive proposition.  A bare variable is a
    formula metavariable.  ``true``/``false`` become the fixed tautology of
    ``sig`` and its negation, or literal :class:`Lit` nodes when ``sig`` is
    ``None``.
    """
    if isinstance(t, Var):
        return Meta(t.name)
    sym = t.symbol
    if sym in KD_SHARED:
        if sym == "not":
            return Not(from_term(t.args[0], sig))
        if sym == "and":
            return And(from_term(t.args[0], sig), from_term(t.args[1], sig))
        if sig is None:
            return Lit(sym == "true")
        taut = tautology(sig)
        return taut if sym == "true" else Not(taut)
    parsed = parse_kd_name(sym)
    if parsed is None:
        return Atom(t)
    kind, agent = parsed
    (arg,) = t.args
    if kind == "know":
        return Know(agent, from_term(arg, sig))
    if kind == "xknow":
        return XKnow(agent, from_term(arg, sig))
    if not _is_base_term(arg):
        raise TranslationError(f"{sym} applied to a non-base term: {print_term(t)}")
    return Obs(agent, arg)


def substitute_terms(phi, rho):
    """Apply a term substitution inside atoms and observations."""
    if isinstance(phi, Atom):
        return Atom(apply_substitution(phi.term, rho))
    if isinstance(phi, Obs):
        return Obs(phi.agent, apply_substitution(phi.term, rho))
    if isinstance(phi, (Meta, Lit)):
        return phi
    if isinstance(phi, Not):
        return Not(substitute_terms(phi.sub, rho))
    if isinstance(phi, (Know, L, XKnow)):
        return type(phi)(phi.agent, substitute_terms(phi.sub, rho))
    return type(phi)(substitute_terms(phi.left, rho), substitute_terms(phi.right, rho))


def substitute_meta(phi, binding):
    """Replace formula metavariables by formulas."""
    if isinstance(phi, Meta):
        if phi.name not in binding:
            raise KeyError(phi.name)
        return binding[phi.name]
    if isinstance(phi, (Atom, Obs, Lit)):
        return phi
    if isinstance(phi, Not):
        return Not(substitute_meta(phi.sub, binding))
    if isinstance(phi, (Know, L, XKnow)):
        return type(phi)(phi.agent, substitute_meta(phi.sub, binding))
    return type(phi)(substitute_meta(phi.left, binding), substitute_meta(phi.right, binding))


# -- normal forms --------------------------------------------------------


def nnf(phi):
    """Push negations down to atoms, observations and X subformulas.

    The argument of an X is left untouched: explicit knowledge is sensitive to
    the syntactic form of what is known.
    """
    if isinstance(phi, Not):
        return _neg(phi.sub)
    if isinstance(phi, And):
        return And(nnf(phi.left), nnf(phi.right))
    if isinstance(phi, Or):
        return Or(nnf(phi.left), nnf(phi.right))
    if isinstance(phi, Know):
        return Know(phi.agent, nnf(phi.sub))
    if isinstance(phi, L):
        return L(phi.agent, nnf(phi.sub))
    return phi


def _neg(phi):
    if isinstance(phi, Not):
        return nnf(phi.sub)
    if isinstance(phi, And):
        return Or(_neg(phi.left), _neg(phi.right))
    if isinstance(phi, Or):
        return And(_neg(phi.left), _neg(phi.right))
    if isinstance(phi, Know):
        return L(phi.agent, _neg(phi.sub))
    if isinstance(phi, L):
        return Know(phi.agent, _neg(phi.sub))
    return Not(phi)


def expand_derived(phi, sig=None):
    """Rewrite ``Or``, ``L``, ``Imp`` and ``Lit`` into the core connectives.

    ``sig`` supplies the fixed tautology for literals."""
    if isinstance(phi, Lit):
        taut = tautology(sig)
        return taut if phi.value else Not(taut)
    if isinstance(phi, Imp):
        return Implies(expand_derived(phi.left, sig), expand_derived(phi.right, sig))
    if isinstance(phi, Or):
        return Or_(expand_derived(phi.left, sig), expand_derived(phi.right, sig))
    if isinstance(phi, L):
        return Not(Know(phi.agent, Not(expand_derived(phi.sub, sig))))
    if isinstance(phi, Not):
        return Not(expand_derived(phi.sub, sig))
    if isinstance(phi, And):
        return And(expand_derived(phi.left, sig), expand_derived(phi.right, sig))
    if isinstance(phi, Know):
        return Know(phi.agent, expand_derived(phi.sub, sig))
    if isinstance(phi, XKnow):
        return XKnow(phi.agent, expand_derived(phi.sub, sig))
    return phi


def is_nnf(phi):
    """Negations outside X scopes apply only to atoms, observations and X."""
    if isinstance(phi, Not):
        return isinstance(phi.sub, (Atom, Obs, XKnow))
    if isinstance(phi, (And, Or)):
        return is_nnf(phi.left) and is_nnf(phi.right)
    if isinstance(phi, (Know, L)):
        return is_nnf(phi.sub)
    return True


def top_level_x_positive(phi):
    """Every X occurrence outside the scope of another X is under an even
    number of negations.  ``L`` and ``Or`` count as their expansions, which
    add two negations each and so keep the parity."""

    def go(f, negs):
        if isinstance(f, XKnow):
            return negs % 2 == 0
        if isinstance(f, Not):
            return go(f.sub, negs + 1)
        if isinstance(f, (And, Or)):
            return go(f.left, negs) and go(f.right, negs)
        if isinstance(f, (Know, L)):
            return go(f.sub, negs)
        return True

    return go(phi, 0)
