"""Satisfiability for the epistemic language.

The general procedure replaces every term ``t`` by an atom ``p_t``, every
top-level ``X psi`` by ``q_psi`` and every top-level ``Ob(t)`` by ``r_t``,
adds the frame conditions tying these atoms to ``K``, and decides the
resulting single-modality S5 formula over models whose accessibility
relation is universal.  A satisfying S5 model is turned back into a
structure with a tailor-made deductive system and replayed through the
model checker.

For a fixed deductive system all states may share one observation set, so
the search enumerates candidate observation sets, settles every ``X`` and
``Ob`` subformula by deduction, and decides what is left in S5.
"""

import itertools
from dataclasses import dataclass

from .deduction import LOCAL, DeductiveSystem, Rule, derive
from .errors import DeduktError, TranslationError
from .formulas import (
    And,
    Atom,
    Know,
    L,
    Lit,
    Not,
    Obs,
    Or,
    XKnow,
    expand_derived,
    print_formula,
    subformulas,
    to_term,
)
from .models import State, Structure, check
from .terms import App, Signature, iter_subterms, is_kd_symbol, kd_name, print_term


# -- the single-modality target language ---------------------------------


class ModalFormula:
    __slots__ = ()

    def __str__(self):
        return print_modal(self)


@dataclass(frozen=True)
class MAtom(ModalFormula):
    """``kind`` is ``p`` (term), ``q`` (explicit knowledge), ``r``
    (observation) or ``v`` (a plain named proposition)."""

    kind: str
    obj: object
    agent: int = 1


@dataclass(frozen=True)
class MNot(ModalFormula):
    sub: ModalFormula


@dataclass(frozen=True)
class MAnd(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True)
class MK(ModalFormula):
    sub: ModalFormula
    agent: int = 1


@dataclass(frozen=True)
class MConst(ModalFormula):
    value: bool


def m_or(a, b):
    return MNot(MAnd(MNot(a), MNot(b)))


def m_implies(a, b):
    return MNot(MAnd(a, MNot(b)))


def m_iff(a, b):
    return MAnd(m_implies(a, b), m_implies(b, a))


def m_conj(items):
    items = list(items)
    out = items[0]
    for f in items[1:]:
        out = MAnd(out, f)
    return out


def _atom_label(a, agents=1):
    sup = f"{a.agent}" if agents > 1 else ""
    if a.kind == "v":
        return str(a.obj)
    if a.kind == "q":
        return f"q{sup}[{print_formula(a.obj, agents)}]"
    return f"{a.kind}{sup}[{print_term(a.obj)}]"


def print_modal(f, agents=1):
    def go(g, ctx):
        if isinstance(g, MConst):
            return "T" if g.value else "F"
        if isinstance(g, MAtom):
            return _atom_label(g, agents)
        if isinstance(g, MNot):
            return "!" + go(g.sub, 3)
        if isinstance(g, MK):
            op = f"K{g.agent}" if agents > 1 else "K"
            return f"{op} {go(g.sub, 3)}"
        text = go(g.left, 2) + " & " + go(g.right, 3)
        return f"({text})" if ctx > 2 else text

    return go(f, 0)


def modal_size(f):
    if isinstance(f, (MAtom, MConst)):
        return 1
    if isinstance(f, (MNot, MK)):
        return 1 + modal_size(f.sub)
    return 1 + modal_size(f.left) + modal_size(f.right)


def modal_atoms(f):
    out = []
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, MAtom):
            if g not in seen:
                seen.add(g)
                out.append(g)
        elif isinstance(g, (MNot, MK)):
            stack.append(g.sub)
        elif isinstance(g, MAnd):
            stack.append(g.right)
            stack.append(g.left)
    return out


# -- verdicts ------------------------------------------------------------


@dataclass(frozen=True)
class Sat:
    """``witness`` is a :class:`Structure` (or, for pure S5 input, a list of
    worlds given as sets of true atoms); ``state`` is the designated state."""

    witness: object
    state: object
    status = "sat"

    def as_bool(self):
        return True


@dataclass(frozen=True)
class Unsat:
    scope: str = "all structures"
    status = "unsat"

    def as_bool(self):
        return False


@dataclass(frozen=True)
class UnknownAtBound:
    bound: str
    status = "unknown"

    def as_bool(self):
        return None


# -- translation into the single-modality language -------------------------


def _core(phi):
    """Drop the display-only connectives so only the core ones remain."""
    if any(isinstance(f, (Or, L)) for f in _outer(phi)):
        phi = expand_derived(phi)
    if any(isinstance(f, Lit) for f in subformulas(phi)):
        raise TranslationError("expand true/false before translating")
    return phi


def _outer(phi):
    """Subformulas outside the scope of any X."""
    stack = [phi]
    while stack:
        f = stack.pop()
        yield f
        if isinstance(f, (Not, Know, L)):
            stack.append(f.sub)
        elif isinstance(f, (And, Or)):
            stack.extend((f.left, f.right))


def outer_observations(phi):
    """``(agent, term)`` for each Ob occurring outside X scopes, in order."""
    out = []
    for f in _outer(phi):
        if isinstance(f, Obs) and (f.agent, f.term) not in out:
            out.append((f.agent, f.term))
    return out


def outer_x(phi):
    """The X subformulas occurring outside X scopes, in order."""
    out = []
    for f in _outer(phi):
        if isinstance(f, XKnow) and f not in out:
            out.append(f)
    return out


def _replace(phi):
    if isinstance(phi, Atom):
        return MAtom("p", phi.term)
    if isinstance(phi, Obs):
        return MAtom("r", phi.term, phi.agent)
    if isinstance(phi, XKnow):
        return MAtom("q", phi.sub, phi.agent)
    if isinstance(phi, Not):
        return MNot(_replace(phi.sub))
    if isinstance(phi, And):
        return MAnd(_replace(phi.left), _replace(phi.right))
    if isinstance(phi, Know):
        return MK(_replace(phi.sub), phi.agent)
    raise TranslationError(f"cannot translate {type(phi).__name__}")


def frame_conditions(phi):
    """The conjuncts tying observation and explicit-knowledge atoms to K."""
    phi = _core(phi)
    out = []
    q_done = []
    for agent, t in outer_observations(phi):
        r = MAtom("r", t, agent)
        q = MAtom("q", Obs(agent, t), agent)
        out.append(m_iff(r, MK(r, agent)))
        out.append(m_implies(r, q))
        if q not in q_done:
            q_done.append(q)
    for x in outer_x(phi):
        q = MAtom("q", x.sub, x.agent)
        if q not in q_done:
            q_done.append(q)
    for q in q_done:
        out.append(m_iff(q, MK(q, q.agent)))
    return out


def _frame_guard(phi, frames):
    agents = sorted({getattr(f, "agent", 1) for f in subformulas(phi) if hasattr(f, "agent")} or {1})
    body = m_conj(frames)
    return m_conj([MK(body, a) for a in agents])


def translate_tilde(phi):
    """The S5 image of ``phi`` together with its frame conditions.

    The frame conditions must hold at every world, not just the one where
    the image is evaluated, so they appear under K.  With one agent that
    reaches the whole model; ``sat_multi`` enforces them everywhere itself.
    """
    phi = _core(phi)
    frames = frame_conditions(phi)
    if not frames:
        return _replace(phi)
    return MAnd(_replace(phi), _frame_guard(phi, frames))


def _tower(seed, n):
    out = []
    t = seed
    for _ in range(n):
        out.append(t)
        t = App("not", (t,))
    return out


def embed_modal(f, seed=None):
    """Encode a plain S5 formula as an epistemic formula.

    The ``k``-th proposition (in sorted order) becomes the atom
    ``not^(k-1)(seed)``; ``seed`` defaults to the constant ``true``.
    """
    seed = App("true", ()) if seed is None else seed
    if not (isinstance(seed, App) and seed.ground):
        raise DeduktError("the tower needs a ground seed term")
    names = sorted({a.obj for a in modal_atoms(f) if a.kind == "v"}, key=str)
    for a in modal_atoms(f):
        if a.kind != "v":
            raise TranslationError("embed_modal expects plain propositions only")
    code = dict(zip(names, _tower(seed, len(names))))

    def go(g):
        if isinstance(g, MAtom):
            return Atom(code[g.obj])
        if isinstance(g, MNot):
            return Not(go(g.sub))
        if isinstance(g, MAnd):
            return And(go(g.left), go(g.right))
        return Know(g.agent, go(g.sub))

    return go(f)


# -- deciding single-modality S5 -----------------------------------------


class _Compiled:
    """A formula DAG with shared subformulas, children before parents.

    Nodes are ``(op, a, b)``: ``("atom", i, _)``, ``("const", value, _)``,
    ``("not", child, _)``, ``("and", left, right)``, ``("K", child, agent)``.
    """

    def __init__(self, f):
        self.nodes = []
        self.index = {}
        self.atoms = []
        self.atom_index = {}
        self.k_nodes = []
        self.root = self._add(f)

    def _add(self, f):
        hit = self.index.get(f)
        if hit is not None:
            return hit
        if isinstance(f, MAtom):
            if f not in self.atom_index:
                self.atom_index[f] = len(self.atoms)
                self.atoms.append(f)
            node = ("atom", self.atom_index[f], None)
        elif isinstance(f, MConst):
            node = ("const", f.value, None)
        elif isinstance(f, MNot):
            node = ("not", self._add(f.sub), None)
        elif isinstance(f, MAnd):
            node = ("and", self._add(f.left), self._add(f.right))
        else:
            node = ("K", self._add(f.sub), f.agent)
        idx = len(self.nodes)
        self.nodes.append(node)
        self.index[f] = idx
        if node[0] == "K":
            self.k_nodes.append(idx)
        return idx


def _atom_masks(n):
    """Bit ``v`` of mask ``i`` is set when valuation ``v`` makes atom ``i`` true."""
    size = 1 << n
    full = (1 << size) - 1
    masks = []
    for i in range(n):
        half = 1 << i
        pattern = ((1 << half) - 1) << half
        length = half << 1
        while length < size:
            pattern |= pattern << length
            length <<= 1
        masks.append(pattern & full)
    return masks, full


def _fill(comp, masks, full, vals, start, stop):
    """Evaluate nodes ``start..stop-1``; K nodes keep their assigned value."""
    nodes = comp.nodes
    for idx in range(start, stop):
        op, a, b = nodes[idx]
        if op == "atom":
            vals[idx] = masks[a]
        elif op == "not":
            vals[idx] = full & ~vals[a]
        elif op == "and":
            vals[idx] = vals[a] & vals[b]
        elif op == "const":
            vals[idx] = full if a else 0


_MAX_ATOMS = 22


def sat_s5(f):
    """Decide ``f`` over S5 models with a universal relation.

    Every ``K g`` has the same truth at all worlds, so the search guesses
    those truths innermost first.  A guess of true narrows the admissible
    worlds to those satisfying ``g``; a guess of false needs one admissible
    world refuting ``g``.  The witness is a list of worlds, each the set of
    atoms true there, with the designated world first.
    """
    comp = _Compiled(f)
    n = len(comp.atoms)
    if n > _MAX_ATOMS:
        return UnknownAtBound(f"{n} propositions exceed the search limit of {_MAX_ATOMS}")
    masks, full = _atom_masks(n)
    vals = [0] * len(comp.nodes)
    found = _search(comp, masks, full, vals)
    if found is None:
        return Unsat("S5 models with a universal relation")
    allowed, refuted = found
    worlds = [_lowest(vals[comp.root] & allowed)]
    for mask in refuted:
        w = _lowest(mask & allowed)
        if w not in worlds:
            worlds.append(w)
    decoded = [frozenset(a for i, a in enumerate(comp.atoms) if (w >> i) & 1) for w in worlds]
    return Sat(decoded, 0)


def _lowest(mask):
    return (mask & -mask).bit_length() - 1


def _search(comp, masks, full, vals):
    """Depth-first over K guesses, innermost first.

    When a K node is reached every K below it is already guessed, so the
    value of its argument is final.  ``allowed`` (the admissible worlds)
    only shrinks along a branch; ``refuted`` holds, for each K guessed
    false, the worlds refuting its argument, one of which must stay allowed.
    """
    k_nodes = comp.k_nodes
    total = len(comp.nodes)

    def rec(pos, start, allowed, refuted):
        if pos == len(k_nodes):
            _fill(comp, masks, full, vals, start, total)
            if vals[comp.root] & allowed:
                return allowed, refuted
            return None
        idx = k_nodes[pos]
        _fill(comp, masks, full, vals, start, idx)
        g = vals[comp.nodes[idx][1]]
        narrowed = allowed & g
        if narrowed and all(m & narrowed for m in refuted):
            vals[idx] = full
            found = rec(pos + 1, idx + 1, narrowed, refuted)
            if found is not None:
                return found
        counter = allowed & ~g
        if counter:
            vals[idx] = 0
            found = rec(pos + 1, idx + 1, allowed, refuted + [counter & full])
            if found is not None:
                return found
        return None

    return rec(0, 0, full, [])


# -- witnesses -----------------------------------------------------------


def _formula_terms(phi):
    """Every ground term written anywhere in ``phi`` (inside X included)."""
    out = set()
    for f in subformulas(phi):
        if isinstance(f, (Atom, Obs)):
            out |= set(iter_subterms(f.term))
    return out


def _formula_signature(phi):
    symbols = {}
    for t in sorted(_formula_terms(phi), key=print_term):
        if not is_kd_symbol(t.symbol):
            symbols[t.symbol] = len(t.args)
    return Signature(dict(sorted(symbols.items())))


def fresh_tags(phi, count):
    """``count`` base ground terms no ``Ob`` of ``phi`` mentions.

    A unary symbol of the formula is iterated over one of its constants when
    possible; otherwise fresh constants ``tag1``, ``tag2``, ... are used.
    """
    used = {f.term for f in subformulas(phi) if isinstance(f, Obs)}
    sig = _formula_signature(phi)
    consts = sig.constants()
    unary = sorted(k for k, v in sig.symbols.items() if v == 1)
    out = []
    if consts and unary:
        t = App(consts[0], ())
        while len(out) < count:
            t = App(unary[0], (t,))
            if t not in used:
                out.append(t)
        return out
    names = set(sig.symbols)
    k = 0
    while len(out) < count:
        k += 1
        name = f"tag{k}"
        if name not in names:
            out.append(App(name, ()))
    return out


def _rebuild(phi, worlds, classes, agents):
    """A structure from S5 worlds (sets of true atoms) and per-agent classes.

    ``classes[i][w]`` is the class index of world ``w`` for agent ``i+1``.
    Each class gets its own tag observation; the agent's system holds one
    rule ``ob_i(tag) -> psi^T`` per explicit-knowledge atom true there.
    """
    n_tags = sum(len(set(c)) for c in classes)
    tags = fresh_tags(phi, n_tags)
    tag_of = []
    k = 0
    for c in classes:
        table = {}
        for cls in sorted(set(c)):
            table[cls] = tags[k]
            k += 1
        tag_of.append(table)
    rules = [[] for _ in range(agents)]
    seen = [set() for _ in range(agents)]
    states = []
    valuation = {}
    for w, true in enumerate(worlds):
        obs = []
        for i in range(agents):
            tag = tag_of[i][classes[i][w]]
            o = {tag}
            for a in true:
                if a.kind == "r" and a.agent == i + 1:
                    o.add(a.obj)
                if a.kind == "q" and a.agent == i + 1:
                    ob = App(kd_name("ob", i + 1), (tag,))
                    key = (tag, a.obj)
                    if key not in seen[i]:
                        seen[i].add(key)
                        rules[i].append(Rule([ob], to_term(a.obj)))
            obs.append(frozenset(o))
        name = f"w{w}"
        states.append(State(name, tuple(obs)))
        valuation[name] = {a.obj for a in true if a.kind == "p"}
    sig = _formula_signature(phi)
    for t in tags:
        sig = sig.merge(Signature({u.symbol: len(u.args) for u in iter_subterms(t)}))
    for i in range(agents):
        rules[i].sort(key=lambda r: (print_term(r.premises[0]), print_term(r.conclusion)))
    full = sig.with_kd(agents)
    systems = []
    for i in range(agents):
        systems.append(DeductiveSystem(rules[i], _extend_for(full, rules[i]), agents))
    return Structure(states, valuation, systems, reliable_obs=False, signature=sig)


def _extend_for(sig, rules):
    extra = {}
    for r in rules:
        for t in r.terms():
            for u in iter_subterms(t):
                if u.symbol not in sig:
                    extra[u.symbol] = len(u.args)
    if not extra:
        return sig
    return sig.merge(Signature(extra, sig.agents))


def _replay(model, state, phi):
    value = check(model, state, phi)
    if value is not True:
        raise AssertionError(f"witness does not replay: {print_formula(phi)} is {value} at {state}")


def sat_general(phi, witness=True):
    """Satisfiability over all structures (any deductive system), one agent."""
    phi = _core(phi)
    if any(getattr(f, "agent", 1) != 1 for f in subformulas(phi)):
        raise DeduktError("sat_general handles one agent; use sat_multi for more")
    f = translate_tilde(phi)
    res = sat_s5(f)
    if not isinstance(res, Sat):
        if isinstance(res, Unsat):
            return Unsat("all structures")
        return res
    if not witness:
        return Sat(None, None)
    worlds = res.witness
    model = _rebuild(phi, worlds, [[0] * len(worlds)], 1)
    _replay(model, "w0", phi)
    return Sat(model, "w0")


# -- fixed deductive system ----------------------------------------------


def default_pool(phi):
    """Base ground subterms of every term written in ``phi``."""
    pool = {t for t in _formula_terms(phi) if not any(is_kd_symbol(u.symbol) for u in iter_subterms(t))}
    return sorted(pool, key=lambda t: (t.size, print_term(t)))


def _settle(phi, values):
    """Replace top-level X/Ob subformulas by their decided truth."""
    if isinstance(phi, (XKnow, Obs)):
        return MConst(values[phi])
    if isinstance(phi, Atom):
        return MAtom("p", phi.term)
    if isinstance(phi, Not):
        return MNot(_settle(phi.sub, values))
    if isinstance(phi, And):
        return MAnd(_settle(phi.left, values), _settle(phi.right, values))
    if isinstance(phi, Know):
        return MK(_settle(phi.sub, values), phi.agent)
    raise TranslationError(f"cannot translate {type(phi).__name__}")


def sat_fixed_d(phi, system, max_obs_size=None, candidate_pool=None, strategy=LOCAL, witness=True):
    """Satisfiability over structures using ``system``, one agent.

    All states of the searched structures share one observation set drawn
    from ``candidate_pool`` (default :func:`default_pool`) with at most
    ``max_obs_size`` members.  Unsat is relative to that pool.
    """
    phi = _core(phi)
    if any(getattr(f, "agent", 1) != 1 for f in subformulas(phi)):
        raise DeduktError("sat_fixed_d handles one agent")
    pool = default_pool(phi) if candidate_pool is None else list(candidate_pool)
    for t in pool:
        if not (isinstance(t, App) and t.ground) or any(is_kd_symbol(u.symbol) for u in iter_subterms(t)):
            raise DeduktError(f"pool terms must be ground base terms: {t}")
    limit = len(pool) if max_obs_size is None else min(max_obs_size, len(pool))
    xs = outer_x(phi)
    obs_lits = [Obs(a, t) for a, t in outer_observations(phi)]
    sig = _formula_signature(phi)
    for t in pool:
        sig = sig.merge(Signature({u.symbol: len(u.args) for u in iter_subterms(t)}))
    full = sig.merge(system.signature.base()).with_kd(max(1, system.agent_count))
    d = system.extended((), full)
    gave_up = False
    for size in range(limit + 1):
        for chosen in itertools.combinations(pool, size):
            obs = frozenset(chosen)
            gamma = [App("ob", (p,)) for p in chosen]
            values = {}
            for lit in obs_lits:
                values[lit] = lit.term in obs
            unknown = False
            for x in xs:
                v = derive(d, gamma, to_term(x.sub), strategy).as_bool()
                if v is None:
                    unknown = True
                    break
                values[x] = v
            if unknown:
                gave_up = True
                continue
            res = sat_s5(_settle(phi, values))
            if isinstance(res, Sat):
                if not witness:
                    return Sat(None, None)
                states = []
                valuation = {}
                for k, true in enumerate(res.witness):
                    name = f"w{k}"
                    states.append(State(name, (obs,)))
                    valuation[name] = {a.obj for a in true if a.kind == "p"}
                model = Structure(states, valuation, [d], signature=sig)
                value = check(model, "w0", phi, strategy)
                if value is not True:
                    raise AssertionError(f"witness does not replay: {value}")
                return Sat(model, "w0")
            if isinstance(res, UnknownAtBound):
                gave_up = True
    scope = f"observation sets of at most {limit} term(s) from a pool of {len(pool)}"
    if gave_up:
        return UnknownAtBound(f"{scope}; some deduction queries were undecided")
    return Unsat(scope)


# -- several agents: bounded search ----------------------------------------


def _partitions(n):
    """Restricted growth strings: every set partition of ``range(n)``."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(top + 2):
            yield from rec(prefix + [c], max(top, c))

    yield from rec([0], 0)


def sat_multi(phi, agents, max_states=3, max_cells=20):
    """Bounded search for a model of a multi-agent formula.

    Structures with up to ``max_states`` states and every choice of
    indistinguishability partitions are tried.  Finding none proves
    nothing, so the verdict is then :class:`UnknownAtBound`.
    """
    phi = _core(phi)
    for f in subformulas(phi):
        a = getattr(f, "agent", None)
        if a is not None and not 1 <= a <= agents:
            raise DeduktError(f"agent index {a} out of range 1..{agents}")
    f = translate_tilde(phi)
    frames = m_conj(frame_conditions(phi) or [MConst(True)])
    comp = _Compiled(MAnd(f, frames))
    root, frame_root = comp.index[f], comp.index[frames]
    atoms = comp.atoms
    na = len(atoms)
    for w in range(1, max_states + 1):
        if na * w > max_cells:
            return UnknownAtBound(f"stopped at {w - 1} state(s): {na} propositions per state")
        parts = list(_partitions(w))
        for classes in itertools.product(parts, repeat=agents):
            for bits in range(1 << (na * w)):
                truth = [[(bits >> (k * na + i)) & 1 for i in range(na)] for k in range(w)]
                vals = _eval_multi(comp, truth, classes)
                if vals[0][root] and all(v[frame_root] for v in vals):
                    worlds = [frozenset(a for i, a in enumerate(atoms) if truth[k][i]) for k in range(w)]
                    model = _rebuild(phi, worlds, [list(c) for c in classes], agents)
                    _replay(model, "w0", phi)
                    return Sat(model, "w0")
    return UnknownAtBound(f"no model with at most {max_states} state(s)")


def _eval_multi(comp, truth, classes):
    w = len(truth)
    vals = [[False] * len(comp.nodes) for _ in range(w)]
    for idx, (op, a, b) in enumerate(comp.nodes):
        if op == "K":
            part = classes[b - 1]
            for k in range(w):
                vals[k][idx] = all(vals[j][a] for j in range(w) if part[j] == part[k])
            continue
        for k in range(w):
            if op == "atom":
                vals[k][idx] = bool(truth[k][a])
            elif op == "not":
                vals[k][idx] = not vals[k][a]
            elif op == "and":
                vals[k][idx] = vals[k][a] and vals[k][b]
            else:
                vals[k][idx] = a
    return vals


def is_valid(phi):
    """Validity over all structures, via unsatisfiability of the negation."""
    return isinstance(sat_general(Not(phi), witness=False), Unsat)
