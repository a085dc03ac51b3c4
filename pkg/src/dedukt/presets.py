"""Bundled deductive systems and rule transformers.

``DY``         the Dolev-Yao adversary: receive, decrypt, split.
``DY_CONSTR``  DY plus message construction (``constr``).
``DY_PRIME``   DY plus a rule turning observed receipts into receipts.
``BOOL``       a fast, incomplete fragment of propositional reasoning.
``SELF_X``     the agent knows what it explicitly knows.
"""

from .deduction import DeductiveSystem, Rule
from .errors import DeduktError
from .terms import App, Var, kd_name, parse_kd_name

_DY_SIG = """sig {
  recv/1;
  has/1;
  encr/2;
  conc/2;
  inv/1;
  m/0;
  k1/0;
  k2/0;
}
"""

_DY_RULES = """  recv(?m) -> has(?m);
  has(inv(?k)), has(encr(?m,?k)) -> has(?m);
  has(conc(?m1,?m2)) -> has(?m1);
  has(conc(?m1,?m2)) -> has(?m2);
"""

_PROP_SIG = """sig {
  p/0;
  q/0;
  r/0;
}
"""

PRESET_TEXT = {
    "DY": _DY_SIG + "rules {\n" + _DY_RULES + "}\n",
    "DY_CONSTR": _DY_SIG.replace("  inv/1;\n", "  inv/1;\n  constr/1;\n")
    + "rules {\n"
    + _DY_RULES
    + """  has(?m) -> constr(?m);
  constr(?k), constr(?m) -> constr(encr(?m,?k));
  constr(?m1), constr(?m2) -> constr(conc(?m1,?m2));
}
""",
    "DY_PRIME": _DY_SIG + "rules {\n" + _DY_RULES + "  ob(recv(?t)) -> recv(?t);\n}\n",
    "BOOL": _PROP_SIG
    + """rules {
  ?t -> not(not(?t));
  not(not(?t)) -> ?t;
  ?t -> not(and(not(?t),not(?t2)));
  ?t2 -> not(and(not(?t),not(?t2)));
  not(and(?t,not(?t2))), ?t -> ?t2;
  not(and(?t,not(?t2))), not(?t2) -> not(?t);
  ?t, ?t2 -> and(?t,?t2);
  and(?t,?t2) -> ?t;
  and(?t,?t2) -> ?t2;
  ?t, not(?t) -> false;
  false -> ?t;
}
""",
    "SELF_X": _PROP_SIG + "rules {\n  ?t -> xknow(?t);\n}\n",
}

PRESETS = tuple(PRESET_TEXT)

DESCRIPTIONS = {
    "DY": "Dolev-Yao adversary: receive, decrypt with known inverse keys, split pairs",
    "DY_CONSTR": "DY plus construction of encryptions and pairs",
    "DY_PRIME": "DY plus ob(recv(t)) -> recv(t), so intercepts feed the adversary",
    "BOOL": "linear-time fragment of propositional inference",
    "SELF_X": "t -> xknow(t): explicit knowledge of one's own explicit knowledge",
}

_cache = {}


def load_preset(name, agents=1):
    """``(signature, system)`` for a catalog entry; the signature is the base one."""
    from .files import parse_rules

    key = name.upper()
    if key not in PRESET_TEXT:
        raise DeduktError(f"unknown preset {name!r} (available: {', '.join(PRESETS)})")
    if (key, agents) not in _cache:
        _cache[(key, agents)] = parse_rules(PRESET_TEXT[key], agents=agents)
    return _cache[(key, agents)]


def message_parts(t):
    """All ``u`` with ``u`` ⊑ ``t``: descend through both halves of a pair and
    into the plaintext (never the key) of an encryption."""
    out = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if u in out:
            continue
        out.add(u)
        if isinstance(u, App):
            if u.symbol == "conc" and len(u.args) == 2:
                stack.extend(u.args)
            elif u.symbol == "encr" and len(u.args) == 2:
                stack.append(u.args[0])
    return out


def subterm_rel(t, u):
    """``t`` ⊑ ``u``."""
    return t in message_parts(u)


def relabel_term(t, agent):
    """Move every agent-1 constructor in ``t`` to agent ``agent``."""
    if isinstance(t, Var):
        return t
    sym = t.symbol
    parsed = parse_kd_name(sym)
    if parsed is not None and parsed[1] == 1:
        sym = kd_name(parsed[0], agent)
    return App(sym, [relabel_term(a, agent) for a in t.args])


def relabel(system, agent):
    """A copy of a single-agent system speaking about agent ``agent``."""
    rules = [
        Rule([relabel_term(p, agent) for p in r.premises], relabel_term(r.conclusion, agent), r.name)
        for r in system.rules
    ]
    agents = max(system.agent_count, agent)
    return DeductiveSystem(rules, system.signature.base().with_kd(agents), agents)


def simulative_extension(d_i, d_j, j):
    """``d_i`` extended so that its owner can replay agent ``j``'s reasoning.

    Adds ``ob_j(?t) -> xknow_j(ob_j(?t))`` and, for every rule of ``d_j``, the
    same rule with each term wrapped in ``xknow_j``.
    """
    xk = kd_name("xknow", j)
    ob = kd_name("ob", j)
    t = Var("t")
    added = [Rule([App(ob, (t,))], App(xk, (App(ob, (t,)),)), "sim_ob")]
    for r in d_j.rules:
        added.append(
            Rule([App(xk, (p,)) for p in r.premises], App(xk, (r.conclusion,)), f"sim_{r.name}")
        )
    agents = max(d_i.agent_count, d_j.agent_count, j)
    sig = d_i.signature.base().merge(d_j.signature.base()).with_kd(agents)
    base = DeductiveSystem(d_i.rules, sig, agents)
    return base.extended(added)

