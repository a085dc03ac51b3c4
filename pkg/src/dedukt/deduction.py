"""Rule-based deduction over ground terms.

A deductive system is a finite set of rules ``t1, ..., tk |> t``.  The
deciding procedure is forward saturation restricted to a finite universe of
ground terms; with the *local* universe (every proper subterm of a derived
term already occurs in the goal, in the premises, or in a rule) it is sound
for every system and complete for local systems.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from .errors import DeduktError
from .terms import (
    App,
    Signature,
    apply_substitution,
    infer_signature,
    is_kd_symbol,
    iter_subterms,
    match,
    subterms,
    variables,
)


@dataclass(frozen=True)
class Rule:
    premises: Tuple
    conclusion: object
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))

    @property
    def free_conclusion_vars(self):
        """Variables of the conclusion that no premise binds."""
        bound = set()
        for p in self.premises:
            bound |= variables(p)
        return variables(self.conclusion) - bound

    def terms(self):
        return self.premises + (self.conclusion,)

    def __str__(self):
        from .terms import print_term

        if not self.premises:
            return f"|- {print_term(self.conclusion)}"
        lhs = ", ".join(print_term(p) for p in self.premises)
        return f"{lhs} -> {print_term(self.conclusion)}"


class DeductiveSystem:
    """A finite, ordered set of named rules over a signature.

    Rules without a name are called ``r1``, ``r2``, ... by position.  When no
    signature is given it is inferred from the rules.  The signature is always
    extended with the logical constructors for ``agent_count`` agents.
    """

    def __init__(self, rules=(), signature=None, agent_count=1):
        named = []
        seen = set()
        for k, r in enumerate(rules, start=1):
            if not r.name:
                r = Rule(r.premises, r.conclusion, f"r{k}")
            if r.name in seen:
                raise DeduktError(f"duplicate rule name {r.name!r}")
            seen.add(r.name)
            named.append(r)
        if agent_count < 1:
            raise DeduktError("agent_count must be positive")
        if signature is None:
            inferred = infer_signature([t for r in named for t in r.terms()])
            signature = Signature({k: v for k, v in inferred.symbols.items() if not is_kd_symbol(k)})
        if signature.agents < agent_count:
            signature = signature.with_kd(agent_count)
        self.signature = signature
        self.agent_count = agent_count
        self.rules = tuple(named)
        self._by_name = {r.name: r for r in self.rules}
        for r in self.rules:
            for t in r.terms():
                signature.check(t)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __repr__(self):
        return f"DeductiveSystem({len(self.rules)} rules, agents={self.agent_count})"

    def rule(self, name):
        return self._by_name.get(name)

    def extended(self, rules, signature=None):
        """A new system with ``rules`` appended (renamed on clashes)."""
        sig = self.signature if signature is None else self.signature.merge(signature)
        out = list(self.rules)
        taken = set(self._by_name)
        n = len(out)
        for r in rules:
            name = r.name
            if not name or name in taken:
                n += 1
                name = f"r{n}"
                while name in taken:
                    n += 1
                    name = f"r{n}"
            taken.add(name)
            out.append(Rule(r.premises, r.conclusion, name))
        return DeductiveSystem(out, sig, self.agent_count)

    def ground_subterms(self):
        out = set()
        for r in self.rules:
            for t in r.terms():
                for u in iter_subterms(t):
                    if u.ground:
                        out.add(u)
        return out


@dataclass(frozen=True)
class Strategy:
    """``local`` saturates in the local universe; ``bounded`` grows it.

    ``growth`` is the number of times the bounded strategy may enlarge the
    universe with the terms that were blocked in the previous round.
    """

    kind: str = "local"
    growth: int = 0

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if text == "local":
            return LOCAL
        if text.startswith("bounded:"):
            try:
                n = int(text.split(":", 1)[1])
            except ValueError:
                n = -1
            if n >= 0:
                return cls("bounded", n)
        raise ValueError(f"bad strategy {text!r} (expected local or bounded:N)")

    def __str__(self):
        return "local" if self.kind == "local" else f"bounded:{self.growth}"


LOCAL = Strategy()


def Bounded(growth):
    return Strategy("bounded", growth)


@dataclass(frozen=True)
class FromGamma:
    source: object
    rho: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class ByRule:
    rule: str
    rho: Mapping
    premises: Tuple[int, ...]


@dataclass(frozen=True)
class Step:
    term: object
    justification: object


@dataclass(frozen=True)
class Deduction:
    steps: Tuple[Step, ...]

    @property
    def goal(self):
        return self.steps[-1].term

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class Derivable:
    deduction: Deduction
    status = "derivable"

    def as_bool(self):
        return True


@dataclass(frozen=True)
class NotDerivable:
    status = "not-derivable"

    def as_bool(self):
        return False


@dataclass(frozen=True)
class Unknown:
    bound: str = ""
    status = "unknown"

    def as_bool(self):
        return None


class LocalUniverse:
    """Ground terms all of whose proper subterms lie in ``base``.

    ``base`` must be closed under subterms.  Membership is what the saturation
    uses to filter derived terms; ``candidates`` is the finite pool used to
    instantiate variables that no premise binds.
    """

    def __init__(self, base, extra=()):
        self.base = frozenset(base)
        self.extra = tuple(extra)

    def __contains__(self, t):
        base = self.base
        return all(a in base for a in t.args)

    def candidates(self):
        seen = set()
        for t in sorted(self.base, key=lambda u: (u.size, str(u))):
            seen.add(t)
            yield t
        for t in self.extra:
            if t not in seen:
                seen.add(t)
                yield t


class _Saturation:
    def __init__(self):
        self.just = {}
        self.blocked = set()
        self.open_ended = False


class _FactIndex:
    """Processed facts indexed by head symbol and first-argument symbol."""

    def __init__(self):
        self.all = []
        self.members = set()
        self.by_head = {}
        self.by_head_arg = {}

    def add(self, t):
        self.all.append(t)
        self.members.add(t)
        self.by_head.setdefault(t.symbol, []).append(t)
        if t.args and isinstance(t.args[0], App):
            self.by_head_arg.setdefault((t.symbol, t.args[0].symbol), []).append(t)

    def candidates(self, pattern):
        if not isinstance(pattern, App):
            return self.all
        if pattern.args and isinstance(pattern.args[0], App):
            return self.by_head_arg.get((pattern.symbol, pattern.args[0].symbol), ())
        return self.by_head.get(pattern.symbol, ())


def _triggers(rules):
    by_head = {}
    anything = []
    for r in rules:
        for j, p in enumerate(r.premises):
            if isinstance(p, App):
                by_head.setdefault(p.symbol, []).append((r, j))
            else:
                anything.append((r, j))
    return by_head, anything


def _assignments(pattern, pool):
    """Bindings for the variables of ``pattern`` drawn from ``pool``.

    Two kinds are produced: those making ``pattern`` itself a member of
    ``pool`` and those making each of its arguments a member.  The second
    kind reaches terms whose arguments all lie in a subterm-closed pool,
    which is exactly what a local universe admits.
    """
    seen = []
    for cand in pool:
        rho = match(pattern, cand)
        if rho is not None and rho not in seen:
            seen.append(rho)
            yield rho
    if not isinstance(pattern, App) or not pattern.args:
        return

    def join(k, rho):
        if k == len(pattern.args):
            yield rho
            return
        arg = pattern.args[k]
        if arg.ground:
            yield from join(k + 1, rho)
            return
        for cand in pool:
            ext = match(arg, cand, dict(rho))
            if ext is not None:
                yield from join(k + 1, ext)

    for rho in join(0, {}):
        if rho not in seen:
            seen.append(rho)
            yield rho


def _saturate(rules, gamma, universe, goal=None):
    sat = _Saturation()
    just = sat.just
    queue = deque()
    found = [False]

    def add(t, j):
        if t in just:
            return
        just[t] = j
        queue.append(t)
        if goal is not None and t == goal:
            found[0] = True

    candidates = None

    def pool():
        nonlocal candidates
        if candidates is None:
            if hasattr(universe, "candidates"):
                candidates = list(universe.candidates())
            else:
                candidates = sorted(universe, key=lambda u: (u.size, str(u)))
            if goal is not None and goal not in candidates:
                candidates.append(goal)
        return candidates

    def conclude(rule, rho, premise_facts):
        c = apply_substitution(rule.conclusion, rho)
        if c.ground:
            if c in just:
                return
            if c in universe:
                add(c, (rule, rho, premise_facts))
            else:
                sat.blocked.add(c)
            return
        sat.open_ended = True
        for extra in _assignments(c, pool()):
            t = apply_substitution(c, extra)
            if t not in just and t in universe:
                full = dict(rho)
                full.update(extra)
                add(t, (rule, full, premise_facts))

    for g in gamma:
        if g.ground:
            add(g, ("gamma", g, {}))
    for g in gamma:
        if not g.ground:
            sat.open_ended = True
            for rho in _assignments(g, pool()):
                t = apply_substitution(g, rho)
                if t in universe:
                    add(t, ("gamma", g, rho))
    for r in rules:
        if not r.premises:
            conclude(r, {}, ())

    by_head, anything = _triggers(rules)
    index = _FactIndex()
    while queue and not found[0]:
        f = queue.popleft()
        index.add(f)
        triggered = by_head.get(f.symbol, [])
        if anything:
            triggered = triggered + anything
        for rule, j in triggered:
            rho = match(rule.premises[j], f)
            if rho is None:
                continue
            others = [k for k in range(len(rule.premises)) if k != j]
            _join(rule, others, 0, rho, {j: f}, index, conclude)
            if found[0]:
                break
    return sat


def _join(rule, others, pos, rho, chosen, index, conclude):
    if pos == len(others):
        facts = tuple(chosen[k] for k in range(len(rule.premises)))
        conclude(rule, rho, facts)
        return
    k = others[pos]
    pattern = apply_substitution(rule.premises[k], rho)
    if pattern.ground:
        if pattern in index.members:
            chosen[k] = pattern
            _join(rule, others, pos + 1, rho, chosen, index, conclude)
            del chosen[k]
        return
    for fact in list(index.candidates(pattern)):
        ext = match(pattern, fact)
        if ext is None:
            continue
        rho2 = dict(rho)
        rho2.update(ext)
        chosen[k] = fact
        _join(rule, others, pos + 1, rho2, chosen, index, conclude)
        del chosen[k]


def _reconstruct(just, goal):
    index = {}
    steps = []
    stack = [(goal, False)]
    while stack:
        t, expanded = stack.pop()
        if t in index:
            continue
        j = just[t]
        if j[0] == "gamma":
            index[t] = len(steps)
            steps.append(Step(t, FromGamma(j[1], dict(j[2]))))
            continue
        rule, rho, premise_facts = j
        if expanded:
            refs = tuple(index[p] for p in premise_facts)
            index[t] = len(steps)
            steps.append(Step(t, ByRule(rule.name, dict(rho), refs)))
        else:
            stack.append((t, True))
            for p in reversed(premise_facts):
                if p not in index:
                    stack.append((p, False))
    return Deduction(tuple(steps))


def local_base(system, gamma, goal=None):
    """Subterm-closed base of the local universe for a query."""
    base = set(system.ground_subterms())
    if goal is not None:
        base |= subterms(goal)
    for g in gamma:
        if g.ground:
            base |= subterms(g)
        else:
            base |= {u for u in iter_subterms(g) if u.ground}
    return base


def _validate(system, gamma, goal):
    if goal is not None:
        if not goal.ground:
            raise DeduktError(f"goal must be ground: {goal}")
        system.signature.check(goal)
    for g in gamma:
        system.signature.check(g)


def closure(system, gamma, universe):
    """Least set of ground terms closed under the rules within ``universe``.

    ``universe`` is any container of ground terms; a plain set works, as does
    a :class:`LocalUniverse`.  Ground members of ``gamma`` are always included.
    """
    gamma = list(gamma)
    return set(_saturate(system.rules, gamma, universe).just)


def derive(system, gamma, goal, strategy=LOCAL):
    """Decide whether ``gamma`` derives ``goal`` in ``system``.

    Returns :class:`Derivable` (with a checked deduction), :class:`NotDerivable`
    or, for the bounded strategy only, :class:`Unknown`.
    """
    gamma = list(dict.fromkeys(gamma))
    _validate(system, gamma, goal)
    base = local_base(system, gamma, goal)
    if strategy.kind == "local":
        sat = _saturate(system.rules, gamma, LocalUniverse(base, (goal,)), goal)
        if goal in sat.just:
            return Derivable(_reconstruct(sat.just, goal))
        return NotDerivable()
    if strategy.kind != "bounded":
        raise ValueError(f"unknown strategy {strategy.kind!r}")
    for _ in range(strategy.growth + 1):
        sat = _saturate(system.rules, gamma, LocalUniverse(base, (goal,)), goal)
        if goal in sat.just:
            return Derivable(_reconstruct(sat.just, goal))
        if not sat.blocked and not sat.open_ended:
            return NotDerivable()
        for b in sat.blocked:
            base |= subterms(b)
    return Unknown(f"universe grown {strategy.growth} time(s) beyond the local one")


def check_deduction(system, gamma, deduction, goal=None):
    """True iff every step is a Γ instance or a rule instance over earlier steps."""
    gamma = set(gamma)
    steps = deduction.steps
    if not steps:
        return False
    if goal is not None and steps[-1].term != goal:
        return False
    for i, step in enumerate(steps):
        t = step.term
        j = step.justification
        if not isinstance(t, App) or not t.ground:
            return False
        if any(not getattr(v, "ground", False) for v in j.rho.values()):
            return False
        if isinstance(j, FromGamma):
            if j.source not in gamma or apply_substitution(j.source, j.rho) != t:
                return False
        elif isinstance(j, ByRule):
            rule = system.rule(j.rule)
            if rule is None or len(j.premises) != len(rule.premises):
                return False
            for k, idx in enumerate(j.premises):
                if not (0 <= idx < i):
                    return False
                if apply_substitution(rule.premises[k], j.rho) != steps[idx].term:
                    return False
            if apply_substitution(rule.conclusion, j.rho) != t:
                return False
        else:
            return False
    return True


def is_monotone_witness(system, gamma, gamma_sup, goal, strategy=LOCAL):
    """Derivability from ``gamma`` carries over to the superset ``gamma_sup``."""
    gamma = set(gamma)
    gamma_sup = set(gamma_sup)
    if not gamma <= gamma_sup:
        raise ValueError("gamma must be a subset of gamma_sup")
    if isinstance(derive(system, gamma, goal, strategy), Derivable):
        return isinstance(derive(system, gamma_sup, goal, strategy), Derivable)
    return True


def derivable(system, gamma, goal, strategy=LOCAL) -> Optional[bool]:
    """Three-valued shorthand: True, False, or None when unknown."""
    return derive(system, gamma, goal, strategy).as_bool()

