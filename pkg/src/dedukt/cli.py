"""Command-line front end.

Exit codes: 0 derivable / true / valid / satisfiable / success, 1 the
negative verdict, 2 unknown, 64 usage error, 65 malformed input.
"""

import argparse
import json
import os
import sys

from . import __version__
from .axioms import base_axioms, rule_axioms
from .deduction import ByRule, Deduction, FromGamma, Step, Strategy, derive
from .errors import DeduktError, ModelError, ParseError, SignatureError, TranslationError
from .files import dump_model, load_model, load_rules, load_system, parse_rules
from .formulas import from_term, nnf, parse_formula, print_formula, to_term
from .models import check, valid_in
from .presets import DESCRIPTIONS, PRESET_TEXT, PRESETS, load_preset
from .sat import Sat, Unsat, print_modal, sat_fixed_d, sat_general, sat_multi, translate_tilde
from .terms import parse_term, parse_terms, print_term

JSON_FORMAT = 1

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- output helpers --------------------------------------------------------


def _color_enabled(stream):
    flag = os.environ.get("DEDUKT_COLOR")
    if flag is not None:
        return flag.strip() == "1"
    return hasattr(stream, "isatty") and stream.isatty()


_COLORS = {"good": "32", "bad": "31", "unknown": "33"}


def _paint(text, tone, stream):
    if not _color_enabled(stream):
        return text
    return f"\x1b[{_COLORS[tone]}m{text}\x1b[0m"


def _rho_text(rho):
    if not rho:
        return ""
    inner = ", ".join(f"?{k}={print_term(v)}" for k, v in sorted(rho.items()))
    return f" {{{inner}}}"


def emit_trace(deduction):
    """Text rendering of a deduction, one numbered line per step."""
    lines = []
    width = len(str(len(deduction.steps)))
    for i, step in enumerate(deduction.steps, start=1):
        j = step.justification
        if isinstance(j, FromGamma):
            why = f"given {print_term(j.source)}{_rho_text(j.rho)}"
        else:
            refs = ", ".join(str(k + 1) for k in j.premises)
            why = f"rule {j.rule}{_rho_text(j.rho)}" + (f" from {refs}" if refs else "")
        lines.append(f"{i:>{width}}. {print_term(step.term)}    [{why}]")
    return "\n".join(lines)


def trace_to_json(deduction):
    steps = []
    for i, step in enumerate(deduction.steps):
        j = step.justification
        rho = {k: print_term(v) for k, v in sorted(j.rho.items())}
        if isinstance(j, FromGamma):
            just = {"kind": "gamma", "source": print_term(j.source), "rho": rho}
        else:
            just = {"kind": "rule", "rule": j.rule, "rho": rho, "premises": list(j.premises)}
        steps.append({"index": i, "term": print_term(step.term), "justification": just})
    return {"steps": steps}


def trace_from_json(data, sig=None):
    """Inverse of :func:`trace_to_json` (indices are 0-based)."""
    steps = []
    for item in data["steps"]:
        j = item["justification"]
        rho = {k: parse_term(v, sig) for k, v in j["rho"].items()}
        if j["kind"] == "gamma":
            just = FromGamma(parse_term(j["source"], sig), rho)
        else:
            just = ByRule(j["rule"], rho, tuple(j["premises"]))
        steps.append(Step(parse_term(item["term"], sig), just))
    return Deduction(tuple(steps))


def _dump(obj, out):
    obj = {"format": JSON_FORMAT, **obj}
    out.write(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _tv(value):
    return {True: "true", False: "false", None: "unknown"}[value]


def _exit_for(value):
    return {True: EXIT_OK, False: EXIT_NO, None: EXIT_UNKNOWN}[value]


# -- argument plumbing -----------------------------------------------------


def _strategy(args):
    try:
        return Strategy.parse(args.strategy)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _extra_sig(args):
    if not getattr(args, "sig", None):
        return None
    base, _ = load_rules(args.sig)
    return base


def _system(args, required=True):
    agents = getattr(args, "agents", None) or 1
    sig = _extra_sig(args)
    if args.preset and args.system:
        raise UsageError("give either --preset or --system, not both")
    if args.preset:
        base, d = load_preset(args.preset, agents)
        if sig is not None:
            full = base.merge(sig).with_kd(d.agent_count)
            d = d.extended((), full)
            base = full.base()
        return base, d
    if args.system:
        return load_system(args.system, agents, sig)
    if required:
        raise UsageError("a deductive system is required (--preset NAME or --system FILE)")
    return None


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, ""):
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _add_system_flags(p):
    p.add_argument("--preset", help="bundled system: " + ", ".join(PRESETS))
    p.add_argument("--system", help="rules file")
    p.add_argument("--sig", help="file with an extra sig section")
    p.add_argument("--agents", type=int, help="number of agents")


def build_parser():
    parser = _Parser(prog="dedukt", description="Deductive algorithmic knowledge toolkit.")
    parser.add_argument("--version", action="version", version=f"dedukt {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("derive", help="decide whether a goal term is derivable")
    _add_system_flags(p)
    p.add_argument("--from", dest="gamma", default="", help="comma separated premise terms")
    p.add_argument("--goal", help="ground goal term")
    p.add_argument("--strategy", default="local", help="local or bounded:N")
    p.add_argument("--json", action="store_true")

    for name, text in (("check", "evaluate a formula at a state"), ("valid", "evaluate a formula at every state")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--model", help="model file")
        if name == "check":
            p.add_argument("--state", help="state name")
        p.add_argument("--formula", help="formula")
        p.add_argument("--strategy", default="local", help="local or bounded:N")
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("sat", help="decide satisfiability of a formula")
    _add_system_flags(p)
    p.add_argument("--formula", help="formula")
    p.add_argument("--max-obs", type=int, help="largest observation set tried with a fixed system")
    p.add_argument("--pool", help="candidate observation terms (comma separated)")
    p.add_argument("--max-states", type=int, default=3, help="state bound for several agents")
    p.add_argument("--strategy", default="local", help="local or bounded:N")
    p.add_argument("--witness", help="write a satisfying model file here")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("axioms", help="print axiom schemas")
    _add_system_flags(p)
    p.add_argument("--agent", type=int, default=1, help="agent whose rules are translated")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("nnf", help="negation normal form of a formula")
    p.add_argument("--formula", help="formula")
    p.add_argument("--agents", type=int, default=1)
    p.add_argument("--sig", help="file with a sig section")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("translate", help="formula to term, term to formula, or the S5 image")
    p.add_argument("--formula", help="formula to encode as a term")
    p.add_argument("--term", help="term to read back as a formula")
    p.add_argument("--tilde", action="store_true", help="print the S5 image of --formula")
    p.add_argument("--agents", type=int, default=1)
    p.add_argument("--sig", help="file with a sig section")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("presets", help="list bundled systems or print one")
    p.add_argument("name", nargs="?")
    p.add_argument("--json", action="store_true")
    return parser


# -- commands ------------------------------------------------------------


def cmd_derive(args, out):
    _need(args, "goal")
    _, d = _system(args)
    strategy = _strategy(args)
    gamma = parse_terms(args.gamma, d.signature)
    goal = parse_term(args.goal, d.signature, allow_vars=False)
    verdict = derive(d, gamma, goal, strategy)
    if args.json:
        doc = {"command": "derive", "status": verdict.status, "goal": print_term(goal), "strategy": str(strategy)}
        if verdict.status == "derivable":
            doc["deduction"] = trace_to_json(verdict.deduction)
        if verdict.status == "unknown":
            doc["bound"] = verdict.bound
        _dump(doc, out)
    else:
        tone = {"derivable": "good", "not-derivable": "bad", "unknown": "unknown"}[verdict.status]
        out.write(_paint(verdict.status, tone, out) + "\n")
        if verdict.status == "derivable":
            out.write(emit_trace(verdict.deduction) + "\n")
        elif verdict.status == "unknown":
            out.write(f"bound: {verdict.bound}\n")
    return _exit_for(verdict.as_bool())


def _formula_for_model(args, model):
    return parse_formula(args.formula, model.signature, model.agents)


def cmd_check(args, out):
    _need(args, "model", "state", "formula")
    model = load_model(args.model)
    phi = _formula_for_model(args, model)
    value = check(model, args.state, phi, _strategy(args))
    if args.json:
        _dump({"command": "check", "state": args.state, "formula": print_formula(phi, model.agents), "value": _tv(value)}, out)
    else:
        tone = {True: "good", False: "bad", None: "unknown"}[value]
        out.write(_paint(_tv(value), tone, out) + "\n")
    return _exit_for(value)


def cmd_valid(args, out):
    _need(args, "model", "formula")
    model = load_model(args.model)
    phi = _formula_for_model(args, model)
    strategy = _strategy(args)
    per_state = {s: check(model, s, phi, strategy) for s in model.states}
    value = valid_in(model, phi, strategy)
    if args.json:
        _dump(
            {
                "command": "valid",
                "formula": print_formula(phi, model.agents),
                "value": _tv(value),
                "states": {s: _tv(v) for s, v in per_state.items()},
            },
            out,
        )
    else:
        word = {True: "valid", False: "not valid", None: "unknown"}[value]
        tone = {True: "good", False: "bad", None: "unknown"}[value]
        out.write(_paint(word, tone, out) + "\n")
        for s, v in per_state.items():
            out.write(f"  {s}: {_tv(v)}\n")
    return _exit_for(value)


def _formula_sig(args):
    if getattr(args, "sig", None):
        base, _ = load_rules(args.sig)
        return base
    return None


def cmd_sat(args, out):
    _need(args, "formula")
    agents = args.agents or 1
    loaded = _system(args, required=False)
    if loaded is not None:
        base, d = loaded
        phi = parse_formula(args.formula, base, agents)
        pool = None
        if args.pool is not None:
            pool = parse_terms(args.pool, base, allow_vars=False)
        if args.max_obs is not None and args.max_obs < 0:
            raise UsageError("--max-obs must be non-negative")
        verdict = sat_fixed_d(phi, d, args.max_obs, pool, _strategy(args))
    else:
        if args.pool is not None or args.max_obs is not None:
            raise UsageError("--pool and --max-obs need a fixed system (--preset or --system)")
        phi = parse_formula(args.formula, _formula_sig(args), agents)
        if agents == 1:
            verdict = sat_general(phi)
        else:
            verdict = sat_multi(phi, agents, args.max_states)
    if isinstance(verdict, Sat) and args.witness:
        with open(args.witness, "w", encoding="utf-8") as fh:
            fh.write(f"# satisfies {print_formula(phi, agents)} at state {verdict.state}\n")
            fh.write(dump_model(verdict.witness))
    if args.json:
        doc = {"command": "sat", "formula": print_formula(phi, agents), "status": verdict.status}
        if isinstance(verdict, Sat):
            doc["state"] = verdict.state
            doc["states"] = len(verdict.witness.states)
            if args.witness:
                doc["witness"] = args.witness
        elif isinstance(verdict, Unsat):
            doc["scope"] = verdict.scope
        else:
            doc["bound"] = verdict.bound
        _dump(doc, out)
    else:
        tone = {"sat": "good", "unsat": "bad", "unknown": "unknown"}[verdict.status]
        out.write(_paint(verdict.status, tone, out) + "\n")
        if isinstance(verdict, Sat):
            out.write(f"state: {verdict.state} of {len(verdict.witness.states)}\n")
            if args.witness:
                out.write(f"witness: {args.witness}\n")
        elif isinstance(verdict, Unsat):
            out.write(f"scope: {verdict.scope}\n")
        else:
            out.write(f"bound: {verdict.bound}\n")
    return _exit_for(verdict.as_bool())


def cmd_axioms(args, out):
    loaded = _system(args, required=False)
    if loaded is None:
        n = args.agents or 1
        schemas = base_axioms(n)
    else:
        _, d = loaded
        n = max(args.agents or 1, d.agent_count, args.agent)
        if not 1 <= args.agent <= n:
            raise UsageError(f"--agent must be in 1..{n}")
        schemas = base_axioms(n) + rule_axioms(d, args.agent, n)
    if args.json or args.format == "json":
        _dump({"command": "axioms", "agents": n, "axioms": [s.as_dict() for s in schemas]}, out)
    else:
        width = max(len(s.name) for s in schemas)
        for s in schemas:
            note = "" if s.instantiable else "  (inference rule)" if s.name != "Taut" else "  (schema family)"
            out.write(f"{s.name:<{width}}  {s.text()}{note}\n")
    return EXIT_OK


def cmd_nnf(args, out):
    _need(args, "formula")
    phi = parse_formula(args.formula, _formula_sig(args), args.agents)
    result = nnf(phi)
    text = print_formula(result, args.agents)
    if args.json:
        _dump({"command": "nnf", "formula": print_formula(phi, args.agents), "nnf": text}, out)
    else:
        out.write(text + "\n")
    return EXIT_OK


def cmd_translate(args, out):
    if (args.formula is None) == (args.term is None):
        raise UsageError("give exactly one of --formula or --term")
    sig = _formula_sig(args)
    if args.formula is not None:
        phi = parse_formula(args.formula, sig, args.agents)
        if args.tilde:
            text = print_modal(translate_tilde(phi), args.agents)
            key = "tilde"
        else:
            text = print_term(to_term(phi))
            key = "term"
    else:
        if args.tilde:
            raise UsageError("--tilde applies to --formula")
        full = sig.with_kd(args.agents) if sig is not None else None
        t = parse_term(args.term, full, allow_vars=False)
        text = print_formula(from_term(t, sig), args.agents)
        key = "formula"
    if args.json:
        _dump({"command": "translate", key: text}, out)
    else:
        out.write(text + "\n")
    return EXIT_OK


def cmd_presets(args, out):
    if args.name:
        key = args.name.upper()
        if key not in PRESET_TEXT:
            raise UsageError(f"unknown preset {args.name!r} (available: {', '.join(PRESETS)})")
        if args.json:
            _, d = load_preset(key)
            _dump({"command": "presets", "name": key, "rules": [str(r) for r in d.rules]}, out)
        else:
            out.write(PRESET_TEXT[key])
        return EXIT_OK
    if args.json:
        _dump({"command": "presets", "presets": [{"name": k, "description": DESCRIPTIONS[k]} for k in PRESETS]}, out)
    else:
        width = max(len(k) for k in PRESETS)
        for k in PRESETS:
            out.write(f"{k:<{width}}  {DESCRIPTIONS[k]}\n")
    return EXIT_OK


COMMANDS = {
    "derive": cmd_derive,
    "check": cmd_check,
    "valid": cmd_valid,
    "sat": cmd_sat,
    "axioms": cmd_axioms,
    "nnf": cmd_nnf,
    "translate": cmd_translate,
    "presets": cmd_presets,
}


def run(argv=None, out=None, err=None):
    """Run one command; returns the exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("dedukt: a command is required (" + ", ".join(COMMANDS) + ")")
        if getattr(args, "agents", None) is not None and args.agents < 1:
            raise UsageError("--agents must be positive")
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        err.write(f"{e}\n")
        if "a command is required" in str(e):
            err.write(parser.format_usage())
        return EXIT_USAGE
    except ModelError as e:
        err.write(f"error: {e}\n")
        return EXIT_DATA
    except (ParseError, SignatureError, TranslationError) as e:
        err.write(f"input error: {e}\n")
        return EXIT_DATA
    except OSError as e:
        err.write(f"error: cannot read {e.filename}: {e.strerror}\n")
        return EXIT_USAGE
    except DeduktError as e:
        err.write(f"error: {e}\n")
        return EXIT_DATA
    except SystemExit as e:  # --help and --version
        return int(e.code or 0)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
