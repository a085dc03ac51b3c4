"""Deductive algorithmic knowledge structures and the model checker.

A state carries one finite observation set per agent and an opaque
environment label.  Agent ``i`` cannot tell two states apart when their
``i``-th observation sets coincide.  Explicit knowledge ``X_i psi`` holds when
``psi`` (as a term) is derivable from the ``ob_i``-wrapped observations in the
agent's deductive system.

Truth values are three-valued: ``True``, ``False`` or ``None`` for unknown.
``None`` only arises when a bounded deduction strategy gives up.
"""

import threading
from dataclasses import dataclass

from .deduction import LOCAL, derive
from .errors import ModelError, SignatureError
from .formulas import And, Atom, Know, L, Not, Obs, Or, XKnow, to_term
from .terms import App, Signature, infer_signature, is_kd_symbol, iter_subterms, kd_name


@dataclass(frozen=True)
class State:
    name: str
    obs: tuple = ()
    env: str = ""

    def __post_init__(self):
        object.__setattr__(self, "obs", tuple(frozenset(o) for o in self.obs))

    def observations(self, agent):
        return self.obs[agent - 1]


class Structure:
    """States, a valuation and one deductive system per agent.

    ``valuation`` maps a state name to the set of base ground terms that are
    true there; every other term is false.  With ``reliable_obs`` every
    observation must also be true at its state.
    """

    def __init__(self, states, valuation, systems, reliable_obs=False, signature=None):
        states = list(states)
        if not states:
            raise ModelError("a structure needs at least one state")
        systems = list(systems)
        if not systems:
            raise ModelError("a structure needs at least one agent")
        n = len(systems)
        self.agents = n
        self.states = {}
        for s in states:
            if s.name in self.states:
                raise ModelError(f"duplicate state name {s.name!r}")
            if len(s.obs) != n:
                raise ModelError(f"state {s.name!r} has {len(s.obs)} observation set(s), expected {n}")
            for o in s.obs:
                for p in o:
                    _check_base_ground(p, f"observation at state {s.name!r}")
            self.states[s.name] = s
        self.valuation = {}
        for name in self.states:
            true = frozenset(valuation.get(name, ()))
            for p in true:
                # encoded formulas may be atoms, so constructors are allowed here
                _check_base_ground(p, f"valuation of state {name!r}", allow_kd=True)
            self.valuation[name] = true
        for name in valuation:
            if name not in self.states:
                raise ModelError(f"valuation mentions unknown state {name!r}")
        self.reliable_obs = bool(reliable_obs)
        if self.reliable_obs:
            for s in self.states.values():
                for i, o in enumerate(s.obs, start=1):
                    missing = sorted(str(p) for p in o - self.valuation[s.name])
                    if missing:
                        raise ModelError(
                            f"reliable observations: agent {i} observes {', '.join(missing)} "
                            f"at {s.name!r} but it is not true there"
                        )
        sig = Signature()
        for d in systems:
            sig = sig.merge(d.signature.base())
        terms = [p for s in self.states.values() for o in s.obs for p in o]
        terms += [p for v in self.valuation.values() for p in v]
        inferred = infer_signature(terms).symbols
        sig = sig.merge(Signature({k: v for k, v in inferred.items() if not is_kd_symbol(k)}))
        if signature is not None:
            sig = sig.merge(signature.base())
        self.signature = sig
        full = sig.with_kd(n)
        self.systems = tuple(d.extended((), full) for d in systems)
        self._cache = {}
        self._lock = threading.Lock()
        self._classes = None

    def __repr__(self):
        return f"Structure({len(self.states)} states, agents={self.agents})"

    def state(self, name):
        try:
            return self.states[name]
        except KeyError:
            raise ModelError(f"unknown state {name!r}") from None

    def indistinguishable(self, s, t, agent):
        return self.state(s).observations(agent) == self.state(t).observations(agent)

    def classes(self, agent):
        """Partition of state names by agent ``agent``'s observations."""
        if self._classes is None:
            table = []
            for i in range(1, self.agents + 1):
                groups = {}
                for name, st in self.states.items():
                    groups.setdefault(st.observations(i), []).append(name)
                table.append(groups)
            self._classes = table
        return list(self._classes[agent - 1].values())

    def class_of(self, name, agent):
        self.classes(agent)
        return self._classes[agent - 1][self.state(name).observations(agent)]

    def explicit(self, agent, obs, goal, strategy=LOCAL):
        """Memoized ``derive`` for agent ``agent`` from observations ``obs``."""
        key = (agent, obs, goal, strategy)
        hit = self._cache.get(key)
        if hit is not None or key in self._cache:
            return hit
        ob = kd_name("ob", agent)
        gamma = [App(ob, (p,)) for p in sorted(obs, key=str)]
        value = derive(self.systems[agent - 1], gamma, goal, strategy).as_bool()
        with self._lock:
            self._cache.setdefault(key, value)
        return value

    def check_formula_signature(self, phi):
        full = self.signature.with_kd(self.agents)
        stack = [phi]
        while stack:
            f = stack.pop()
            if isinstance(f, (Know, L, XKnow, Obs)) and not 1 <= f.agent <= self.agents:
                raise ModelError(f"agent index {f.agent} out of range 1..{self.agents}")
            if isinstance(f, Atom):
                full.check(f.term)
            elif isinstance(f, Obs):
                full.check(f.term)
            elif isinstance(f, (Not, Know, L, XKnow)):
                stack.append(f.sub)
            elif isinstance(f, (And, Or)):
                stack.extend((f.left, f.right))


def _check_base_ground(p, where, allow_kd=False):
    if not isinstance(p, App) or not p.ground:
        raise ModelError(f"{where}: {p} is not a ground term")
    if allow_kd:
        return
    bad = sorted({u.symbol for u in iter_subterms(p) if is_kd_symbol(u.symbol)})
    if bad:
        raise ModelError(f"{where}: {p} uses logical constructor(s) {', '.join(bad)}")


def _and3(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def _not3(a):
    return None if a is None else not a


def _all3(values):
    out = True
    for v in values:
        if v is False:
            return False
        if v is None:
            out = None
    return out


def check(model, state, phi, strategy=LOCAL):
    """Truth of ``phi`` at ``state``: ``True``, ``False`` or ``None`` (unknown)."""
    model.state(state)
    try:
        model.check_formula_signature(phi)
    except SignatureError as e:
        raise ModelError(f"formula does not fit the structure: {e}") from None
    return _eval(model, state, phi, strategy, {})


def _eval(model, s, f, strategy, memo):
    key = (s, f)
    if key in memo:
        return memo[key]
    if isinstance(f, Atom):
        v = f.term in model.valuation[s]
    elif isinstance(f, Obs):
        v = f.term in model.states[s].observations(f.agent)
    elif isinstance(f, Not):
        v = _not3(_eval(model, s, f.sub, strategy, memo))
    elif isinstance(f, And):
        left = _eval(model, s, f.left, strategy, memo)
        v = False if left is False else _and3(left, _eval(model, s, f.right, strategy, memo))
    elif isinstance(f, Or):
        left = _not3(_eval(model, s, f.left, strategy, memo))
        if left is False:
            v = True
        else:
            v = _not3(_and3(left, _not3(_eval(model, s, f.right, strategy, memo))))
    elif isinstance(f, Know):
        v = _all3(_eval(model, t, f.sub, strategy, memo) for t in model.class_of(s, f.agent))
    elif isinstance(f, L):
        v = _not3(
            _all3(_not3(_eval(model, t, f.sub, strategy, memo)) for t in model.class_of(s, f.agent))
        )
    elif isinstance(f, XKnow):
        obs = model.states[s].observations(f.agent)
        v = model.explicit(f.agent, obs, to_term(f.sub), strategy)
    else:
        raise ModelError(f"cannot evaluate {type(f).__name__}")
    memo[key] = v
    return v


def valid_in(model, phi, strategy=LOCAL):
    """Three-valued conjunction of :func:`check` over every state."""
    model.check_formula_signature(phi)
    memo = {}
    return _all3(_eval(model, s, phi, strategy, memo) for s in model.states)


def satisfying_states(model, phi, strategy=LOCAL):
    memo = {}
    return [s for s in model.states if _eval(model, s, phi, strategy, memo) is True]


def build_dy_model(intercepts, names=None, envs=None):
    """The adversary structure over per-state sets of intercepted messages.

    Each intercept is ``recv(t)`` with ``t`` free of ``has``.  At each state
    ``has(t)`` is true exactly when ``t`` is a part of some intercepted
    message, and the adversary reasons with the observation-aware
    Dolev-Yao system.
    """
    from .presets import load_preset, message_parts

    sig, system = load_preset("DY_PRIME")
    intercepts = [list(group) for group in intercepts]
    names = names or [f"s{k}" for k in range(1, len(intercepts) + 1)]
    envs = envs or [""] * len(intercepts)
    if len(names) != len(intercepts) or len(envs) != len(intercepts):
        raise ModelError("names/envs must match the number of intercept sets")
    states = []
    valuation = {}
    extra = []
    for name, env, group in zip(names, envs, intercepts):
        true = set()
        for r in group:
            if not (isinstance(r, App) and r.ground and r.symbol == "recv" and len(r.args) == 1):
                raise ModelError(f"intercepts must be ground recv(t) terms, got {r}")
            if any(u.symbol == "has" for u in iter_subterms(r.args[0])):
                raise ModelError(f"intercepted message {r.args[0]} mentions has")
            extra.append(r)
            true |= {App("has", (t,)) for t in message_parts(r.args[0])}
        states.append(State(name, (frozenset(group),), env))
        valuation[name] = true
    msig = sig.merge(infer_signature(extra)) if extra else sig
    return Structure(states, valuation, [system], reliable_obs=False, signature=msig)


__all__ = [
    "State",
    "Structure",
    "check",
    "valid_in",
    "satisfying_states",
    "build_dy_model",
]
