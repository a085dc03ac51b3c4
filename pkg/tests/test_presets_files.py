import os

import pytest

from dedukt.deduction import derivable
from dedukt.errors import DeduktError, ParseError
from dedukt.files import load_rules, load_system, parse_rules, print_system
from dedukt.presets import (
    PRESET_TEXT,
    PRESETS,
    load_preset,
    message_parts,
    relabel,
    simulative_extension,
    subterm_rel,
)
from dedukt.terms import parse_term, print_term

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.mark.parametrize("name", PRESETS)
def test_system_files_match_presets(name):
    path = os.path.join(ROOT, "systems", f"{name.lower()}.rules")
    with open(path, encoding="utf-8") as fh:
        assert fh.read() == PRESET_TEXT[name]
    _, d = load_preset(name)
    assert print_system(d) == PRESET_TEXT[name]
    _, from_file = load_rules(path)
    assert from_file.rules == d.rules


def test_rule_counts():
    counts = {name: len(load_preset(name)[1].rules) for name in PRESETS}
    assert counts == {"DY": 4, "DY_CONSTR": 7, "DY_PRIME": 5, "BOOL": 11, "SELF_X": 1}


def test_unknown_preset():
    with pytest.raises(DeduktError):
        load_preset("NOPE")


def test_load_system_forms():
    a = load_system("preset:DY")[1]
    b = load_system("dy")[1]
    c = load_system(os.path.join(ROOT, "systems", "dy.rules"))[1]
    assert a.rules == b.rules == c.rules


def test_message_parts():
    sig = load_preset("DY")[1].signature
    t = parse_term("conc(encr(m,k1),inv(k2))", sig)
    parts = {print_term(u) for u in message_parts(t)}
    assert parts == {"conc(encr(m,k1),inv(k2))", "encr(m,k1)", "m", "inv(k2)"}
    assert subterm_rel(parse_term("m", sig), t)
    assert not subterm_rel(parse_term("k1", sig), t)


def test_relabel():
    _, dyp = load_preset("DY_PRIME")
    d2 = relabel(dyp, 2)
    assert print_term(d2.rules[-1].premises[0]) == "ob2(recv(?t))"
    assert d2.agent_count == 2


def test_simulative_extension_shape():
    _, dyp = load_preset("DY_PRIME")
    d2 = relabel(dyp, 2)
    ext = simulative_extension(load_preset("SELF_X")[1], d2, 2)
    names = [r.name for r in ext.rules]
    assert names[:2] == ["r1", "sim_ob"]
    assert len(ext.rules) == 1 + 1 + len(d2.rules)
    assert str(ext.rule("sim_ob")) == "ob2(?t) -> xknow2(ob2(?t))"
    assert str(ext.rule("sim_r2")) == "xknow2(has(inv(?k))), xknow2(has(encr(?m,?k))) -> xknow2(has(?m))"


def test_rules_file_syntax():
    base, d = parse_rules(
        """
        # comment
        sig { a/0; f/1; }
        rules {
          lift: f(?x) -> ?x;
          |- f(a);
        }
        """
    )
    assert base.symbols == {"a": 0, "f": 1}
    assert [r.name for r in d.rules] == ["lift", "r2"]
    assert derivable(d, [], parse_term("a", d.signature)) is True


def test_rules_inferred_signature_and_agents():
    base, d = parse_rules("rules { ob2(f(?x)) -> xknow2(?x); }")
    assert base.symbols == {"f": 1}
    assert d.agent_count == 2


@pytest.mark.parametrize(
    "text",
    [
        "sig { a/0; a/1; }",
        "sig { ob/1; }",
        "rules { f(?x) -> ; }",
        "rules { f(?x) g(?x); }",
        "sig { a/0; } rules { b -> a; }",
        "rules { x: a -> b; x: b -> a; }",
        "stuff",
    ],
)
def test_bad_rules_files(text):
    with pytest.raises(ParseError):
        parse_rules(text)
