"""Reading and writing rules files and model files.

Rules file::

    sig { recv/1; has/1; m/0; }
    rules {
      recv(?m) -> has(?m);
      split: has(conc(?a,?b)) -> has(?a);
      |- has(m);
    }

Model file::

    model {
      agents: 1;
      reliable_obs: no;
      sig { ... }
      system[1]: "preset:DY_PRIME";
      state s1 { obs[1]: recv(m); true: has(m); env: "e1"; }
    }

``system[i]`` is either a quoted rules-file path (relative to the model file),
``"preset:NAME"``, or an inline ``{ sig {...} rules {...} }`` block.
"""

import os

from .deduction import DeductiveSystem, Rule
from .errors import DeduktError, ParseError
from .models import State, Structure
from .syntax import Lexer, quote, unquote
from .terms import Signature, TermReader, infer_signature, is_kd_symbol, parse_kd_name, print_term


def _max_agent(symbols):
    n = 1
    for name in symbols:
        parsed = parse_kd_name(name)
        if parsed is not None:
            n = max(n, parsed[1])
    return n


def _read_sig_body(lx, symbols):
    lx.expect("{")
    while not lx.accept("}"):
        tok = lx.expect_kind("ident", "symbol name")
        lx.expect("/")
        arity = int(lx.expect_kind("int", "arity").text)
        if symbols.get(tok.text, arity) != arity:
            raise lx.error(f"symbol {tok.text!r} declared twice with different arities", tok)
        if is_kd_symbol(tok.text):
            raise lx.error(f"{tok.text} is a reserved logical constructor", tok)
        symbols[tok.text] = arity
        lx.expect(";")


def _read_rules_body(lx, reader, rules):
    lx.expect("{")
    while not lx.accept("}"):
        name = ""
        if lx.peek().kind == "ident" and lx.peek(1).text == ":":
            name = lx.next().text
            lx.next()
        if lx.accept("|-"):
            premises = []
        else:
            premises = reader.read_list(terminators=("->",))
            lx.expect("->")
        conclusion = reader.read()
        lx.expect(";")
        rules.append(Rule(premises, conclusion, name))


def _read_system_sections(lx, reader, symbols, rules, closing=None):
    while True:
        if closing is not None and lx.at(closing):
            return
        if lx.peek().kind == "eof":
            if closing is not None:
                raise lx.error(f"expected {closing!r}")
            return
        if lx.accept("sig"):
            _read_sig_body(lx, symbols)
        elif lx.accept("rules"):
            _read_rules_body(lx, reader, rules)
        else:
            raise lx.error(f"expected 'sig' or 'rules', found {lx.peek().text or 'end of input'!r}")


def parse_rules(text, agents=1, signature=None):
    """Parse a rules file into ``(base signature, system)``.

    The agent count is the larger of ``agents`` and the highest agent index
    used by a logical constructor in the rules.  Without a ``sig`` section
    (and without ``signature``) symbols and arities are inferred.
    """
    # first pass: collect symbols to size the constructor set
    lx = Lexer(text)
    symbols = {}
    rules = []
    inferred = {}
    _read_system_sections(lx, TermReader(lx, None, inferred), symbols, rules)
    n = max(agents, _max_agent(inferred))
    declared = bool(symbols) or signature is not None
    base = Signature(symbols)
    if signature is not None:
        base = base.merge(signature.base())
    if declared:
        full = base.with_kd(n)
        lx = Lexer(text)
        rules = []
        _read_system_sections(lx, TermReader(lx, full), {}, rules)
    else:
        base = Signature({k: v for k, v in inferred.items() if not is_kd_symbol(k)})
        full = base.with_kd(n)
    try:
        system = DeductiveSystem(rules, full, n)
    except DeduktError as e:
        raise ParseError(str(e), text, 0) from None
    return base, system


def load_rules(path, agents=1, signature=None):
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read(), agents, signature)


def load_system(spec, agents=1, signature=None, base_dir="."):
    """A system from ``preset:NAME``, a bare preset name, or a rules-file path."""
    from .presets import PRESET_TEXT, load_preset

    if spec.startswith("preset:"):
        return load_preset(spec[len("preset:"):], agents)
    path = spec if os.path.isabs(spec) else os.path.join(base_dir, spec)
    if not os.path.exists(path) and spec.upper() in PRESET_TEXT:
        return load_preset(spec, agents)
    return load_rules(path, agents, signature)


def print_signature(sig, sort=False):
    lines = ["sig {"]
    items = sig.base().symbols.items()
    for name, arity in sorted(items) if sort else items:
        lines.append(f"  {name}/{arity};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_rule(rule, position=None):
    prefix = ""
    if rule.name and rule.name != f"r{position}":
        prefix = f"{rule.name}: "
    return f"{prefix}{rule}"


def print_rules_block(system, indent=""):
    lines = [f"{indent}rules {{"]
    for k, r in enumerate(system.rules, start=1):
        lines.append(f"{indent}  {print_rule(r, k)};")
    lines.append(f"{indent}}}")
    return "\n".join(lines) + "\n"


def print_system(system, signature=None):
    """Rules-file text for ``system`` (its base signature, then its rules)."""
    sig = signature if signature is not None else system.signature
    return print_signature(sig) + print_rules_block(system)


# -- model files ---------------------------------------------------------


def _index(lx):
    lx.expect("[")
    tok = lx.expect_kind("int", "agent index")
    lx.expect("]")
    return int(tok.text), tok


def parse_model(text, base_dir="."):
    """Parse a model file into a :class:`Structure`."""
    lx = Lexer(text)
    inferred = {}
    reader = TermReader(lx, None, inferred, allow_vars=False)
    rule_reader = TermReader(lx, None, {}, allow_vars=True)
    lx.expect("model")
    lx.expect("{")
    agents = None
    reliable = False
    symbols = {}
    system_specs = {}
    states = []
    valuation = {}
    while not lx.accept("}"):
        tok = lx.peek()
        if lx.accept("agents"):
            lx.expect(":")
            agents = int(lx.expect_kind("int", "agent count").text)
            if agents < 1:
                raise lx.error("agent count must be positive", tok)
            lx.expect(";")
        elif lx.accept("reliable_obs"):
            lx.expect(":")
            val = lx.expect_kind("ident", "yes or no")
            if val.text not in ("yes", "no"):
                raise lx.error("reliable_obs must be yes or no", val)
            reliable = val.text == "yes"
            lx.expect(";")
        elif lx.accept("sig"):
            _read_sig_body(lx, symbols)
        elif lx.accept("system"):
            i, itok = _index(lx)
            if i in system_specs:
                raise lx.error(f"system[{i}] given twice", itok)
            if lx.accept(":"):
                spec = unquote(lx.expect_kind("string", "quoted path"))
                lx.expect(";")
                system_specs[i] = ("ref", spec, itok)
            else:
                lx.expect("{")
                inline_syms = {}
                rules = []
                _read_system_sections(lx, rule_reader, inline_syms, rules, closing="}")
                lx.expect("}")
                system_specs[i] = ("inline", (inline_syms, rules), itok)
        elif lx.accept("state"):
            name = lx.expect_kind("ident", "state name")
            if any(s[0] == name.text for s in states):
                raise lx.error(f"duplicate state {name.text!r}", name)
            lx.expect("{")
            obs = {}
            true = []
            env = ""
            while not lx.accept("}"):
                item = lx.peek()
                if lx.accept("obs"):
                    i = 1
                    if lx.at("["):
                        i, _ = _index(lx)
                    lx.expect(":")
                    obs.setdefault(i, []).extend(reader.read_list())
                elif lx.accept("true"):
                    lx.expect(":")
                    true.extend(reader.read_list())
                elif lx.accept("env"):
                    lx.expect(":")
                    env = unquote(lx.expect_kind("string", "quoted label"))
                else:
                    raise lx.error(f"expected obs, true or env, found {item.text or 'end of input'!r}")
                lx.expect(";")
            states.append((name.text, obs, env, name))
            valuation[name.text] = true
        else:
            raise lx.error(f"unexpected {tok.text or 'end of input'!r} in model")
    lx.expect_eof()

    if agents is None:
        agents = max([1, *system_specs, *(i for s in states for i in s[1])])
    for name, obs, _, tok in states:
        for i in obs:
            if not 1 <= i <= agents:
                raise ParseError(f"obs[{i}] at state {name!r}: agent out of range 1..{agents}", text, tok.pos)
    base = Signature(symbols)
    systems = []
    for i in range(1, agents + 1):
        if i not in system_specs:
            raise ParseError(f"no system given for agent {i}", text, 0)
        kind, payload, tok = system_specs[i]
        try:
            if kind == "ref":
                _, d = load_system(payload, agents, base if symbols else None, base_dir)
            else:
                inline_syms, rules = payload
                used = infer_signature([t for r in rules for t in r.terms()])
                used = Signature({k: v for k, v in used.symbols.items() if not is_kd_symbol(k)})
                sig = base.merge(Signature(inline_syms)).merge(used)
                d = DeductiveSystem(rules, sig.with_kd(agents), agents)
            if d.agent_count < agents:
                d = DeductiveSystem(d.rules, d.signature.base().with_kd(agents), agents)
        except (OSError, DeduktError) as e:
            raise ParseError(f"system[{i}]: {e}", text, tok.pos) from None
        systems.append(d)
    built = [
        State(name, tuple(frozenset(obs.get(i, ())) for i in range(1, agents + 1)), env)
        for name, obs, env, _ in states
    ]
    try:
        return Structure(built, valuation, systems, reliable, base if symbols else None)
    except DeduktError as e:
        raise ParseError(str(e), text, 0) from None


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_model(text, os.path.dirname(os.path.abspath(path)))


def _terms(items):
    return ", ".join(sorted(print_term(t) for t in items))


def dump_model(model):
    """Model-file text for ``model``; systems are written inline."""
    out = ["model {", f"  agents: {model.agents};"]
    out.append(f"  reliable_obs: {'yes' if model.reliable_obs else 'no'};")
    out.append("  " + print_signature(model.signature, sort=True).rstrip("\n").replace("\n", "\n  "))
    for i, d in enumerate(model.systems, start=1):
        out.append(f"  system[{i}] {{")
        out.append(print_rules_block(d, indent="    ").rstrip("\n"))
        out.append("  }")
    for s in model.states.values():
        out.append(f"  state {s.name} {{")
        for i in range(1, model.agents + 1):
            label = "obs" if model.agents == 1 else f"obs[{i}]"
            out.append(f"    {label}: {_terms(s.observations(i))};")
        out.append(f"    true: {_terms(model.valuation[s.name])};")
        if s.env:
            out.append(f"    env: {quote(s.env)};")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"
