import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dedukt.errors import ParseError, SignatureError
from dedukt.terms import (
    App,
    Signature,
    Var,
    apply_substitution,
    infer_signature,
    is_kd_symbol,
    kd_name,
    match,
    parse_kd_name,
    parse_term,
    parse_terms,
    print_term,
    proper_subterms,
    size,
    subterms,
    variables,
)

SIG = Signature({"a": 0, "b": 0, "f": 1, "g": 2})


def terms(allow_vars=True, max_leaves=12):
    leaves = [st.just(App("a", ())), st.just(App("b", ()))]
    if allow_vars:
        leaves.append(st.sampled_from("xyz").map(Var))
    return st.recursive(
        st.one_of(*leaves),
        lambda sub: st.one_of(
            sub.map(lambda t: App("f", (t,))),
            st.tuples(sub, sub).map(lambda p: App("g", p)),
        ),
        max_leaves=max_leaves,
    )


ground_terms = terms(allow_vars=False)


def test_parse_and_print():
    t = parse_term("g(f(a), ?x)", SIG)
    assert t == App("g", (App("f", (App("a", ()),)), Var("x")))
    assert print_term(t) == "g(f(a),?x)"


def test_parse_list():
    assert [print_term(t) for t in parse_terms("a, f(b) ,g(a,b)", SIG)] == ["a", "f(b)", "g(a,b)"]
    assert parse_terms("", SIG) == []


def test_arity_mismatch_rejected():
    with pytest.raises((ParseError, SignatureError)):
        parse_term("f(a,b)", SIG)


def test_unknown_symbol_rejected():
    with pytest.raises((ParseError, SignatureError)):
        parse_term("h(a)", SIG)


def test_ground_only_mode():
    with pytest.raises(ParseError):
        parse_term("f(?x)", SIG, allow_vars=False)


def test_inferred_signature():
    sig = infer_signature(parse_terms("recv(encr(m,k)), has(m)"))
    assert sig.symbols == {"recv": 1, "encr": 2, "m": 0, "k": 0, "has": 1}


def test_inconsistent_inferred_arity():
    with pytest.raises(ParseError):
        parse_terms("f(a), f(a,b)")


def test_kd_names():
    assert kd_name("ob", 1) == "ob"
    assert kd_name("xknow", 3) == "xknow3"
    assert parse_kd_name("know2") == ("know", 2)
    assert parse_kd_name("not") is None and is_kd_symbol("not")
    assert is_kd_symbol("and") and not is_kd_symbol("has")


def test_with_kd():
    full = SIG.with_kd(2)
    assert full.arity("ob2") == 1 and full.arity("and") == 2 and full.arity("true") == 0
    assert full.base().symbols == SIG.symbols


def test_subterms():
    t = parse_term("g(f(a),a)", SIG)
    assert {print_term(u) for u in subterms(t)} == {"g(f(a),a)", "f(a)", "a"}
    assert t not in proper_subterms(t)
    assert size(t) == 4


def test_match_examples():
    pat = parse_term("g(?x, f(?x))", SIG)
    assert match(pat, parse_term("g(a, f(a))", SIG)) == {"x": App("a", ())}
    assert match(pat, parse_term("g(a, f(b))", SIG)) is None


@given(terms())
def test_print_parse_round_trip(t):
    assert parse_term(print_term(t), SIG) == t


@given(terms(), st.dictionaries(st.sampled_from("xyz"), ground_terms))
def test_match_sound_and_complete(pattern, rho):
    # complete: any instance is matched; sound: the match reproduces it
    rho = {v: rho.get(v, App("a", ())) for v in variables(pattern)}
    subject = apply_substitution(pattern, rho)
    found = match(pattern, subject)
    assert found is not None
    assert apply_substitution(pattern, found) == subject
    assert found == rho


@given(terms(), ground_terms)
def test_match_result_is_sound(pattern, subject):
    found = match(pattern, subject)
    if found is not None:
        assert apply_substitution(pattern, found) == subject


@given(terms(), st.dictionaries(st.sampled_from("xyz"), ground_terms))
@settings(max_examples=200)
def test_substitution_size(t, rho):
    out = apply_substitution(t, rho)
    occurrences = {}

    def count(u):
        if isinstance(u, Var):
            occurrences[u.name] = occurrences.get(u.name, 0) + 1
        else:
            for a in u.args:
                count(a)

    count(t)
    expected = size(t) + sum(n * (size(rho[v]) - 1) for v, n in occurrences.items() if v in rho)
    assert size(out) == expected
    assert variables(out) == variables(t) - set(rho)
