import os
import random

import pytest

from dedukt.deduction import DeductiveSystem, Rule
from dedukt.errors import ModelError, ParseError
from dedukt.files import dump_model, load_model, parse_model
from dedukt.formulas import And, Know, Not, Obs, XKnow, parse_formula
from dedukt.models import State, Structure, build_dy_model, check, satisfying_states, valid_in
from dedukt.presets import load_preset
from dedukt.terms import App, Signature, parse_terms

from gen import random_formula, random_structure

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DY_MODEL = os.path.join(ROOT, "models", "dy.dkm")


def F(model, text):
    return parse_formula(text, model.signature, model.agents)


@pytest.fixture(scope="module")
def dy():
    return load_model(DY_MODEL)


def test_example_model_loads(dy):
    assert set(dy.states) == {"s1", "s2"}
    assert dy.agents == 1
    assert dy.state("s1").env == "two intercepts"


def test_implicit_and_explicit_possession(dy):
    assert check(dy, "s1", F(dy, "K has(m)")) is True
    assert check(dy, "s2", F(dy, "K has(m)")) is True
    assert check(dy, "s1", F(dy, "X has(m)")) is False
    assert check(dy, "s2", F(dy, "X has(m)")) is True
    assert check(dy, "s1", F(dy, "has(m) & !X has(m)")) is True


def test_build_dy_model_matches_file(dy):
    sig = dy.signature
    built = build_dy_model(
        [
            parse_terms("recv(encr(m,k1)), recv(encr(inv(k1),k2))", sig),
            parse_terms("recv(encr(m,k1)), recv(encr(inv(k1),k2)), recv(inv(k2))", sig),
        ]
    )
    for s in ("s1", "s2"):
        assert built.valuation[s] == dy.valuation[s]
        for text in ("K has(m)", "X has(m)", "X has(inv(k1))", "Ob(recv(inv(k2)))"):
            assert check(built, s, F(dy, text)) == check(dy, s, F(dy, text))


def test_valid_and_satisfying(dy):
    assert valid_in(dy, F(dy, "K has(m)")) is True
    assert valid_in(dy, F(dy, "X has(m)")) is False
    assert satisfying_states(dy, F(dy, "X has(m)")) == ["s2"]


def test_unknown_state(dy):
    with pytest.raises(ModelError):
        check(dy, "nowhere", F(dy, "has(m)"))


def test_dump_round_trip(dy):
    text = dump_model(dy)
    again = parse_model(text)
    assert dump_model(again) == text
    for s in dy.states:
        assert check(again, s, F(dy, "X has(m)")) == check(dy, s, F(dy, "X has(m)"))


def _two_state_model(reliable=False):
    sig = Signature({"p": 0, "q": 0})
    _, d = load_preset("SELF_X")
    p, q = App("p", ()), App("q", ())
    states = [State("u", ({p},)), State("v", ({p},)), State("w", ({q},))]
    val = {"u": {p}, "v": {p, q}, "w": {q}}
    return Structure(states, val, [d], reliable, sig)


def test_indistinguishability_is_equivalence():
    rng = random.Random(1)
    for _ in range(30):
        m, _, _ = random_structure(rng)
        names = list(m.states)
        for a in names:
            assert m.indistinguishable(a, a, 1)
            for b in names:
                assert m.indistinguishable(a, b, 1) == m.indistinguishable(b, a, 1)
                for c in names:
                    if m.indistinguishable(a, b, 1) and m.indistinguishable(b, c, 1):
                        assert m.indistinguishable(a, c, 1)
        # classes partition the states
        cells = m.classes(1)
        assert sorted(s for cell in cells for s in cell) == sorted(names)


def test_knowledge_introspection_and_x_persistence():
    rng = random.Random(2)
    for _ in range(30):
        m, atoms, _ = random_structure(rng)
        for _ in range(10):
            phi = random_formula(rng, m.signature, atoms, depth=2)
            for s in m.states:
                k = check(m, s, Know(1, phi))
                if k is True:
                    assert check(m, s, Know(1, Know(1, phi))) is True
                    assert check(m, s, phi) is True
                if k is False:
                    assert check(m, s, Know(1, Not(Know(1, phi)))) is True
                if check(m, s, XKnow(1, phi)) is True:
                    assert check(m, s, Know(1, XKnow(1, phi))) is True


def test_observations_are_known():
    m = _two_state_model()
    assert check(m, "u", Obs(1, App("p", ()))) is True
    assert check(m, "u", Know(1, Obs(1, App("p", ())))) is True
    assert check(m, "u", XKnow(1, Obs(1, App("p", ())))) is True


def test_self_knowledge_rule():
    # with t -> xknow(t), explicit knowledge is explicitly known
    m = _two_state_model()
    phi = XKnow(1, Obs(1, App("p", ())))
    assert check(m, "u", XKnow(1, phi)) is True


def test_reliable_observations():
    m = _two_state_model(reliable=True)
    p = App("p", ())
    assert check(m, "u", Know(1, parse_formula("p", m.signature))) is True
    with pytest.raises(ModelError):
        Structure([State("u", ({p},))], {"u": set()}, list(m.systems), True)


def test_observation_must_be_base_term():
    _, d = load_preset("SELF_X")
    bad = App("ob", (App("p", ()),))
    with pytest.raises(ModelError):
        Structure([State("u", ({bad},))], {"u": set()}, [d])


def test_observation_count_must_match_agents():
    _, d = load_preset("SELF_X")
    with pytest.raises(ModelError):
        Structure([State("u", (set(), set()))], {"u": set()}, [d])


def test_two_agent_model():
    text = """
    model {
      agents: 2;
      sig { p/0; q/0; }
      system[1] { rules { ob(?t) -> ?t; } }
      system[2] { rules { } }
      state a { obs[1]: p; obs[2]: q; true: p, q; }
      state b { obs[1]: p; true: p; }
    }
    """
    m = parse_model(text)
    assert m.agents == 2
    assert check(m, "a", F(m, "K1 p")) is True
    assert check(m, "a", F(m, "K2 q")) is True
    assert check(m, "a", F(m, "K1 q")) is False
    assert check(m, "a", F(m, "X1 p & !X2 q")) is True
    assert check(m, "b", F(m, "K2 q")) is False


@pytest.mark.parametrize(
    "text",
    [
        "model { state s { obs: p; } }",
        "model { agents: 1; system[1] { rules { } } state s { obs[2]: p; } }",
        "model { agents: 1; system[1] { rules { } } state s { } state s { } }",
        "model { agents: 1; system[1] { rules { } } state s { colour: red; } }",
        "model { agents: 1; system[1]: \"preset:NOPE\"; state s { } }",
    ],
)
def test_bad_model_files(text):
    with pytest.raises(ParseError):
        parse_model(text)


def test_unknown_under_bounded_strategy():
    from dedukt.deduction import Bounded

    sig = Signature({"a": 0, "f": 1, "g": 1})
    x = App("a", ())
    d = DeductiveSystem(
        [Rule(parse_terms("ob(?x)", sig.with_kd(1)), parse_terms("f(f(?x))", sig.with_kd(1))[0]),
         Rule(parse_terms("f(f(?x))", sig.with_kd(1)), parse_terms("g(?x)", sig.with_kd(1))[0])],
        sig.with_kd(1),
    )
    m = Structure([State("s", ({x},))], {"s": set()}, [d], signature=sig)
    phi = parse_formula("X g(a)", sig)
    assert check(m, "s", phi) is False
    assert check(m, "s", phi, Bounded(0)) is None
    assert check(m, "s", And(phi, Not(phi)), Bounded(0)) is None
    assert check(m, "s", phi, Bounded(2)) is True
