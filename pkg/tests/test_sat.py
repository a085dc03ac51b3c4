import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dedukt.axioms import base_axioms, instantiate
from dedukt.errors import DeduktError
from dedukt.files import dump_model, parse_model
from dedukt.formulas import And, Atom, Know, Not, Obs, XKnow, formula_size, parse_formula
from dedukt.models import check
from dedukt.presets import load_preset
from dedukt.sat import (
    MAnd,
    MAtom,
    MK,
    MNot,
    Sat,
    Unsat,
    UnknownAtBound,
    embed_modal,
    is_valid,
    m_iff,
    m_implies,
    modal_size,
    sat_fixed_d,
    sat_general,
    sat_multi,
    sat_s5,
    translate_tilde,
)
from dedukt.terms import App, Signature

SIG = Signature({"p": 0, "q": 0, "f": 1})
P, Q = App("p", ()), App("q", ())


def F(text, agents=1, sig=SIG):
    return parse_formula(text, sig, agents)


# -- translation ---------------------------------------------------------


def test_tilde_plain_atom():
    assert translate_tilde(F("p")) == MAtom("p", P)


def test_tilde_observation():
    r = MAtom("r", P)
    q = MAtom("q", Obs(1, P))
    frames = MAnd(MAnd(m_iff(r, MK(r)), m_implies(r, q)), m_iff(q, MK(q)))
    assert translate_tilde(F("Ob(p)")) == MAnd(r, MK(frames))


def test_tilde_explicit():
    q = MAtom("q", Atom(P))
    assert translate_tilde(F("X p")) == MAnd(q, MK(m_iff(q, MK(q))))


def test_tilde_ignores_inside_x():
    f = translate_tilde(F("X (Ob(p) & X q)"))
    assert f == MAnd(MAtom("q", And(Obs(1, P), XKnow(1, Atom(Q)))), MK(m_iff(f.left, MK(f.left))))


def test_tilde_frames_hold_everywhere():
    # Ob(p) is fixed on a class, so K !K Ob(p) rules out Ob(p)
    phi = F("!K !(K (!K Ob(p) & K q) & Ob(p))")
    assert isinstance(sat_general(phi), Unsat)
    assert isinstance(sat_multi(F("!K1 !(K1 !K1 Ob1(p) & Ob1(p))", agents=2), 2), UnknownAtBound)


def test_tilde_size_is_linear():
    rng = random.Random(0)
    from gen import random_formula

    ratios = []
    for _ in range(300):
        phi = random_formula(rng, SIG, [P, Q, App("f", (P,))], depth=5)
        ratios.append(modal_size(translate_tilde(phi)) / formula_size(phi))
    # every Ob/X adds a bounded number of frame conjuncts
    assert max(ratios) <= 20


# -- the S5 core ---------------------------------------------------------

a, b = MAtom("v", "a"), MAtom("v", "b")


def test_s5_examples():
    assert isinstance(sat_s5(MAnd(a, MNot(a))), Unsat)
    assert isinstance(sat_s5(MNot(m_implies(MK(a), a))), Unsat)
    res = sat_s5(MAnd(a, MNot(MK(a))))
    assert isinstance(res, Sat) and len(res.witness) == 2
    assert a in res.witness[0]


def _brute_s5(f, atoms):
    """Every universal model whose worlds are distinct valuations."""
    import itertools

    vals = [frozenset(x for i, x in enumerate(atoms) if (bits >> i) & 1) for bits in range(1 << len(atoms))]

    def ev(g, w, W):
        if isinstance(g, MAtom):
            return g in w
        if isinstance(g, MNot):
            return not ev(g.sub, w, W)
        if isinstance(g, MAnd):
            return ev(g.left, w, W) and ev(g.right, w, W)
        return all(ev(g.sub, u, W) for u in W)

    for n in range(1, len(vals) + 1):
        for W in itertools.combinations(vals, n):
            if any(ev(f, w, W) for w in W):
                return True
    return False


def modal(depth):
    leaf = st.sampled_from([a, b, MAtom("v", "c")])
    return st.recursive(
        leaf,
        lambda s: st.one_of(s.map(MNot), s.map(MK), st.tuples(s, s).map(lambda p: MAnd(*p))),
        max_leaves=depth,
    )


@given(modal(8))
@settings(max_examples=150, deadline=None)
def test_s5_matches_brute_force(f):
    atoms = [a, b, MAtom("v", "c")]
    assert isinstance(sat_s5(f), Sat) == _brute_s5(f, atoms)


@given(modal(7))
@settings(max_examples=60, deadline=None)
def test_embed_modal_preserves_satisfiability(f):
    plain = sat_s5(f)
    embedded = sat_general(embed_modal(f))
    assert isinstance(plain, Sat) == isinstance(embedded, Sat)


def test_embed_modal_tower():
    phi = embed_modal(MAnd(a, MAnd(b, MK(MAtom("v", "c")))))
    terms = [f.term for f in (phi.left, phi.right.left, phi.right.right.sub)]
    assert [str(t) for t in terms] == ["true", "not(true)", "not(not(true))"]


# -- general satisfiability ------------------------------------------------


@pytest.mark.parametrize(
    "text",
    [
        "X p & !X p",
        "!(X p => K X p)",
        "Ob(p) & !X Ob(p)",
        "Ob(p) & !K Ob(p)",
        "!(K p => p)",
        "!(K p => K K p)",
        "!(!K p => K !K p)",
        "!(K p & K (p => q) => K q)",
        "false",
    ],
)
def test_unsat(text):
    assert isinstance(sat_general(F(text)), Unsat)


@pytest.mark.parametrize(
    "text",
    ["p & !K p", "X p & !K p", "X p & !p", "!X Ob(p)", "Ob(p) & !p", "X (p & !p)", "K X q & !Ob(q)"],
)
def test_sat_with_replayed_witness(text):
    phi = F(text)
    res = sat_general(phi)
    assert isinstance(res, Sat)
    assert check(res.witness, res.state, phi) is True
    again = parse_model(dump_model(res.witness))
    assert check(again, res.state, phi) is True


def test_two_world_witness():
    res = sat_general(F("p & !K p"))
    assert len(res.witness.states) == 2


def test_base_axioms_valid_over_samples():
    rng = random.Random(1)
    from gen import random_formula

    atoms = [P, Q, App("f", (P,))]
    for schema in base_axioms(1):
        if not schema.instantiable:
            continue
        for _ in range(8):
            rho = {}
            for v in schema.metavariables():
                if v in ("phi", "psi"):
                    rho[v] = random_formula(rng, SIG, atoms, depth=2)
                else:
                    rho[v] = rng.choice(atoms)
            assert is_valid(instantiate(schema, rho, SIG)), schema.name


def test_random_sat_witnesses_replay():
    rng = random.Random(2)
    from gen import random_formula

    for _ in range(150):
        phi = random_formula(rng, SIG, [P, Q, App("f", (Q,))], depth=4)
        res = sat_general(phi)
        if isinstance(res, Sat):
            assert check(res.witness, res.state, phi) is True


def test_multi_agent_rejected_by_general():
    with pytest.raises(DeduktError):
        sat_general(F("K2 p", agents=2))


# -- fixed deductive system ------------------------------------------------

_, DYP = load_preset("DY_PRIME")
DSIG = DYP.signature.base()


def test_fixed_d_key_missing():
    phi = F("Ob(recv(encr(m,k1))) & X has(m)", sig=DSIG)
    res = sat_fixed_d(phi, DYP)
    assert isinstance(res, Unsat)
    assert "pool" in res.scope


def test_fixed_d_key_present():
    phi = F("Ob(recv(encr(m,k1))) & Ob(recv(inv(k1))) & X has(m)", sig=DSIG)
    res = sat_fixed_d(phi, DYP)
    assert isinstance(res, Sat)
    assert check(res.witness, res.state, phi) is True


def test_fixed_d_false():
    assert isinstance(sat_fixed_d(F("false", sig=DSIG), DYP), Unsat)


def test_fixed_d_pool_and_bound():
    phi = F("X has(m)", sig=DSIG)
    pool = [App("recv", (App("m", ()),))]
    assert isinstance(sat_fixed_d(phi, DYP, candidate_pool=pool), Sat)
    assert isinstance(sat_fixed_d(phi, DYP, max_obs_size=0, candidate_pool=pool), Unsat)


def test_fixed_d_rejects_bad_pool():
    with pytest.raises(DeduktError):
        sat_fixed_d(F("p"), DYP, candidate_pool=[App("ob", (P,))])


def test_fixed_d_witness_uses_system():
    phi = F("Ob(recv(m)) & !X has(m)", sig=DSIG)
    assert isinstance(sat_fixed_d(phi, DYP), Unsat)


# -- several agents --------------------------------------------------------


def test_multi_sat():
    phi = F("K1 p & !K2 p", agents=2)
    res = sat_multi(phi, 2)
    assert isinstance(res, Sat)
    assert check(res.witness, res.state, phi) is True


def test_multi_exhausted_is_unknown():
    assert isinstance(sat_multi(F("p & !p", agents=2), 2, max_states=2), UnknownAtBound)


def test_multi_observations():
    phi = F("Ob2(p) & X1 Ob2(q) & !K1 Ob2(p)", agents=2)
    res = sat_multi(phi, 2)
    assert isinstance(res, Sat)
    assert check(res.witness, res.state, phi) is True
