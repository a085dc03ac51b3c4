"""Axiom schemas: the base system for ``n`` agents and the axioms read off a
deductive system's rules.

A rule ``t1, ..., tk -> t`` of agent ``i`` yields the schema
``X_i t1' & ... & X_i tk' => X_i t'`` where ``'`` reads a term back as a
formula.  Term variables of the rule stay as metavariables of the schema.
"""

from dataclasses import dataclass, field
from typing import Optional

from .errors import DeduktError, TranslationError
from .formulas import (
    And,
    Atom,
    Imp,
    Know,
    Lit,
    Meta,
    Not,
    Obs,
    XKnow,
    expand_derived,
    from_term,
    print_formula,
    subformulas,
    substitute_meta,
    substitute_terms,
    to_term,
)
from .terms import App, Var, is_kd_symbol, iter_subterms, print_term, variables


@dataclass(frozen=True)
class AxiomSchema:
    """``template`` is ``None`` for inference rules and ``Taut``, which are
    listed for completeness but have no single-formula instance."""

    name: str
    origin: str
    template: Optional[object]
    agent: int = 1
    rule: Optional[str] = None
    description: str = ""
    agents: int = field(default=1, compare=False)

    @property
    def instantiable(self):
        return self.template is not None

    def text(self):
        if self.template is None:
            return self.description
        return print_formula(self.template, self.agents)

    def metavariables(self):
        """Names of formula metavariables and of term variables."""
        return sorted(_formula_metas(self.template) | _term_vars(self.template))

    def as_dict(self):
        out = {"name": self.name, "origin": self.origin, "template": self.text()}
        if self.origin == "rule":
            out["rule"] = self.rule
        out["agent"] = self.agent
        out["instantiable"] = self.instantiable
        return out


def _formula_metas(phi):
    if phi is None:
        return set()
    return {f.name for f in subformulas(phi) if isinstance(f, Meta)}


def _term_vars(phi):
    if phi is None:
        return set()
    out = set()
    for f in subformulas(phi):
        if isinstance(f, (Atom, Obs)):
            out |= variables(f.term)
    return out


def _name(base, agent, agents):
    return base if agents == 1 else f"{base}_{agent}"


def base_axioms(n=1):
    """Taut, MP, K1-K5 and X1-X3 for every agent ``1..n``."""
    if n < 1:
        raise DeduktError("agent count must be positive")
    phi, psi = Meta("phi"), Meta("psi")
    p = Var("p")
    out = [
        AxiomSchema("Taut", "base", None, description="every substitution instance of a classical tautology", agents=n),
        AxiomSchema("MP", "base", None, description="from ?phi and ?phi => ?psi infer ?psi", agents=n),
    ]
    for i in range(1, n + 1):
        K = lambda f, i=i: Know(i, f)  # noqa: E731
        X = lambda f, i=i: XKnow(i, f)  # noqa: E731
        ob = Obs(i, p)
        k_name = "K" if n == 1 else f"K{i}"
        entries = [
            ("K1", Imp(And(K(phi), K(Imp(phi, psi))), K(psi))),
            ("K2", None),
            ("K3", Imp(K(phi), phi)),
            ("K4", Imp(K(phi), K(K(phi)))),
            ("K5", Imp(Not(K(phi)), K(Not(K(phi))))),
            ("X1", Imp(X(phi), K(X(phi)))),
            ("X2", Imp(ob, X(ob))),
            ("X3", Imp(ob, K(ob))),
        ]
        for name, template in entries:
            desc = f"from ?phi infer {k_name} ?phi" if template is None else ""
            out.append(AxiomSchema(_name(name, i, n), "base", template, i, description=desc, agents=n))
    return out


def _read_back(t):
    try:
        return from_term(t)
    except TranslationError as e:
        raise TranslationError(str(e)) from None


def rule_axiom(rule, agent=1, agents=1):
    """The schema for a single rule."""
    try:
        premises = [XKnow(agent, _read_back(p)) for p in rule.premises]
        conclusion = XKnow(agent, _read_back(rule.conclusion))
    except TranslationError as e:
        raise TranslationError(f"rule {rule.name}: {e}") from None
    if premises:
        lhs = premises[0]
        for f in premises[1:]:
            lhs = And(lhs, f)
    else:
        lhs = Lit(True)
    name = f"{rule.name}" if agents == 1 else f"{rule.name}_{agent}"
    return AxiomSchema(name, "rule", Imp(lhs, conclusion), agent, rule=rule.name, agents=agents)


def rule_axioms(system, agent=1, agents=None):
    """One schema per rule of ``system``, in rule order."""
    agents = max(agent, system.agent_count) if agents is None else agents
    return [rule_axiom(r, agent, agents) for r in system.rules]


def all_axioms(systems):
    """The base axioms plus the rule axioms of every agent's system."""
    n = len(systems)
    out = base_axioms(n)
    for i, d in enumerate(systems, start=1):
        out.extend(rule_axioms(d, i, n))
    return out


def _as_term(value, name):
    if isinstance(value, (App, Var)):
        if not value.ground:
            raise DeduktError(f"binding for ?{name} is not ground: {value}")
        return value
    try:
        return to_term(value)
    except TranslationError as e:
        raise DeduktError(f"binding for ?{name} has no term reading: {e}") from None


def instantiate(schema, rho, sig=None):
    """A concrete formula from ``schema``.

    ``rho`` maps metavariable names to formulas or ground terms.  Formula
    metavariables accept either (a term ``t`` is read back as a formula);
    variables inside terms need terms (a formula ``f`` is encoded as a term).
    ``sig`` fixes the tautology used for ``true``/``false``; it defaults to
    the symbols occurring in the instance.
    """
    if schema.template is None:
        raise DeduktError(f"{schema.name} is an inference rule and has no instances")
    missing = [v for v in schema.metavariables() if v not in rho]
    if missing:
        raise DeduktError(f"unbound metavariable(s): {', '.join('?' + m for m in missing)}")
    term_rho = {}
    for v in _term_vars(schema.template):
        term_rho[v] = _as_term(rho[v], v)
    phi = substitute_terms(schema.template, term_rho)
    binding = {}
    for v in _formula_metas(schema.template):
        value = rho[v]
        if isinstance(value, (App, Var)):
            value = from_term(_as_term(value, v), sig)
        binding[v] = value
    phi = substitute_meta(phi, binding)
    for f in subformulas(phi):
        if isinstance(f, Obs) and any(is_kd_symbol(u.symbol) for u in iter_subterms(f.term)):
            raise TranslationError(f"Ob applied to a non-base term: {print_term(f.term)}")
    if sig is None and any(isinstance(f, Lit) for f in subformulas(phi)):
        sig = _symbols_signature(phi)
    return expand_derived(phi, sig)


def _symbols_signature(phi):
    from .terms import Signature

    symbols = {}
    for f in subformulas(phi):
        if isinstance(f, (Atom, Obs)):
            for u in iter_subterms(f.term):
                if not is_kd_symbol(u.symbol):
                    symbols[u.symbol] = len(u.args)
    return Signature(symbols)
