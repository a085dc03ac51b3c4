import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dedukt.errors import ParseError, TranslationError
from dedukt.formulas import (
    And,
    Atom,
    Know,
    L,
    Not,
    Obs,
    Or,
    XKnow,
    expand_derived,
    formula_size,
    from_term,
    is_nnf,
    nnf,
    parse_formula,
    print_formula,
    to_term,
)
from dedukt.terms import App, Signature, parse_term, print_term

SIG = Signature({"p": 0, "q": 0, "f": 1})
P, Q = App("p", ()), App("q", ())


def formulas(agents=1, max_leaves=10):
    base = st.sampled_from([P, Q, App("f", (P,)), App("f", (App("f", (Q,)),))])
    agent = st.integers(min_value=1, max_value=agents)
    leaves = st.one_of(base.map(Atom), st.tuples(agent, base).map(lambda a: Obs(*a)))
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            sub.map(Not),
            st.tuples(sub, sub).map(lambda p: And(*p)),
            st.tuples(agent, sub).map(lambda a: Know(*a)),
            st.tuples(agent, sub).map(lambda a: XKnow(*a)),
        ),
        max_leaves=max_leaves,
    )


def test_parse_examples():
    assert parse_formula("p & q", SIG) == And(Atom(P), Atom(Q))
    assert parse_formula("!K p", SIG) == Not(Know(1, Atom(P)))
    assert parse_formula("X (p & Ob(q))", SIG) == XKnow(1, And(Atom(P), Obs(1, Q)))
    assert parse_formula("K2 X p", SIG, agents=2) == Know(2, XKnow(1, Atom(P)))


def test_abbreviations_expand():
    assert parse_formula("p | q", SIG) == Not(And(Not(Atom(P)), Not(Atom(Q))))
    assert parse_formula("p => q", SIG) == Not(And(Not(Not(Atom(P))), Not(Atom(Q))))
    true = parse_formula("true", SIG)
    assert true == Not(And(Atom(P), Not(Atom(P))))
    assert parse_formula("false", SIG) == Not(true)


def test_precedence():
    assert parse_formula("!p & q", SIG) == And(Not(Atom(P)), Atom(Q))
    assert parse_formula("K p & q", SIG) == And(Know(1, Atom(P)), Atom(Q))
    f = parse_formula("p & q => p", SIG)
    assert f == parse_formula("(p & q) => p", SIG)


@pytest.mark.parametrize(
    "text",
    ["L p", "K3 p", "Ob(xknow(p))", "xknow(p)", "Ob(?x)", "p &", "K", "(p", "p q"],
)
def test_rejected(text):
    with pytest.raises(ParseError):
        parse_formula(text, SIG, agents=2)


def test_printing():
    assert print_formula(parse_formula("!(p & K q)", SIG)) == "!(p & K q)"
    assert print_formula(parse_formula("K2 Ob2(p)", SIG, 2), 2) == "K2 Ob2(p)"
    assert print_formula(parse_formula("K p", SIG, 2), 2) == "K1 p"


def test_to_term_examples():
    assert print_term(to_term(parse_formula("X (p & Ob(q))", SIG))) == "xknow(and(p,ob(q)))"
    assert print_term(to_term(parse_formula("!K2 p", SIG, 2))) == "not(know2(p))"


def test_from_term_rejects_ob_of_formula():
    with pytest.raises(TranslationError):
        from_term(parse_term("ob(know(p))", SIG.with_kd(1)))


def test_to_term_rejects_display_nodes():
    with pytest.raises(TranslationError):
        to_term(L(1, Atom(P)))
    with pytest.raises(TranslationError):
        to_term(Or(Atom(P), Atom(Q)))


def test_nnf_examples():
    assert print_formula(nnf(parse_formula("!(K p)", SIG))) == "L !p"
    assert print_formula(nnf(parse_formula("!(p & !K q)", SIG))) == "!p | K q"
    # X is opaque: nothing changes inside it
    f = parse_formula("!X !(p & q)", SIG)
    assert nnf(f) == f


@given(formulas(agents=2))
def test_term_round_trip(phi):
    assert from_term(to_term(phi)) == phi


@given(formulas(agents=2))
def test_print_parse_round_trip(phi):
    assert parse_formula(print_formula(phi, 2), SIG, 2) == phi


@given(formulas(agents=2))
@settings(max_examples=200)
def test_nnf_shape_and_size(phi):
    out = nnf(phi)
    assert is_nnf(out)
    assert nnf(out) == out
    # pushing negations inward never duplicates subformulas
    assert formula_size(out) <= 2 * formula_size(phi)


@given(formulas(agents=2))
def test_expand_derived_inverts_nnf_display(phi):
    # expanding Or/L gives a core formula again
    core = expand_derived(nnf(phi))
    to_term(core)
