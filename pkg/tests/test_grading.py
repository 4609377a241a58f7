import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmfsseq.grading import (
    MMF_ATOMS,
    AtomTable,
    DegreeError,
    Expression,
    InhomogeneousError,
    MalformedExponentError,
    Monomial,
    ParseError,
    TriDegree,
    UnknownAtomError,
    canonical_atom_name,
    degree_of,
    is_homogeneous,
    parse_expression,
    parse_monomial,
    parse_relation,
    parse_structured,
    structured_value,
)

ATOM_NAMES = MMF_ATOMS.names()

monomials = st.builds(
    lambda exps, t: Monomial.make(dict(zip(ATOM_NAMES, exps)), t),
    st.lists(st.integers(0, 3), min_size=len(ATOM_NAMES), max_size=len(ATOM_NAMES)),
    st.integers(0, 4),
)


def P(text):
    return parse_expression(text)


# degrees of the atoms (frozen)


def test_atom_degrees():
    table = {n: d.as_tuple() for n, d in MMF_ATOMS.items()}
    assert table == {
        "tau": (0, 0, -1), "h_0": (0, 1, 0), "h_1": (1, 1, 1), "h_2": (3, 1, 2),
        "c": (8, 3, 5), "P": (8, 4, 4), "u": (11, 3, 7), "a": (12, 3, 6), "d": (14, 4, 8),
        "n": (15, 3, 8), "e": (17, 4, 10), "g": (20, 4, 12), "Delta": (24, 4, 12),
    }


def test_atom_table_rules():
    t = AtomTable([("x", (1, 1, 0))])
    assert t.names(include_tau=True) == ["tau", "x"]
    with pytest.raises(ValueError):
        AtomTable([("x", (1, 0, 0))])
    with pytest.raises(ValueError):
        AtomTable([("x", (1, 1, 0)), ("x", (2, 1, 0))])
    with pytest.raises(ValueError):
        AtomTable([("tau", (0, 0, -2))])


def test_aliases():
    assert canonical_atom_name("h₁") == "h_1"
    assert canonical_atom_name("h_{2}") == "h_2"
    assert canonical_atom_name("\\Delta") == "Delta"
    assert canonical_atom_name("τ") == "tau"
    assert P("Δ h₁") == P("\\Delta h_1")
    assert P("h_1^{2}") == P("h_1^2")


def test_examples():
    assert degree_of(P("\\tau^2 \\Delta^4 P d^2 g")) == TriDegree(152, 32, 78)
    assert degree_of(P("h_1^2 (\\Delta c + \\tau a g)")) == TriDegree(34, 9, 19)
    # x + x = 0 over F2
    assert P("h_1 c + c h_1") == Expression()
    assert P("0") == Expression()
    assert P("1") == Expression([Monomial()])
    assert P("(h_0 + h_0) c") == Expression()
    assert str(P("c h_1^2 \\tau")) == "h_1^2 c tau"


def test_degree_of_zero_and_inhomogeneous():
    with pytest.raises(DegreeError):
        degree_of(Expression())
    x = parse_expression("h_0 + h_1", homogeneous=False)
    assert not is_homogeneous(x)
    with pytest.raises(DegreeError):
        degree_of(x)


@pytest.mark.parametrize("text, exc", [
    ("h_9", UnknownAtomError),
    ("h_1 q", UnknownAtomError),
    ("h_1^", MalformedExponentError),
    ("h_1^{x}", MalformedExponentError),
    ("h_1^0", MalformedExponentError),
    ("h_0 + h_1", InhomogeneousError),
    ("(h_0 c", ParseError),
    ("3 h_1", ParseError),
    ("", ParseError),
    ("h_1 + ", ParseError),
])
def test_error_classes(text, exc):
    with pytest.raises(exc):
        P(text)


def test_error_names_the_term():
    with pytest.raises(UnknownAtomError) as e:
        P("h_1 c + h_9 d")
    assert e.value.term == "h_9 d"
    with pytest.raises(InhomogeneousError) as e:
        P("h_0 + h_1")
    assert "h_1" in str(e.value) and "h_0" in str(e.value)


def test_structured():
    terms = parse_structured("h_1 (\\Delta u + \\tau n g)")
    assert len(terms) == 1 and len(terms[0]) == 2 and terms[0][1][2] is True
    assert structured_value(terms) == P("h_1 \\Delta u + \\tau h_1 n g")
    lhs, rhs = parse_relation("c u = h_1^2 e")
    assert structured_value(lhs) == P("c u") and structured_value(rhs) == P("h_1^2 e")
    lhs, rhs = parse_relation("h_0 h_1")
    assert rhs == []
    with pytest.raises(ParseError):
        parse_relation("a = b = c")


def test_parse_monomial():
    assert parse_monomial("\\tau^3 g") == Monomial.make({"g": 1}, 3)
    with pytest.raises(ParseError):
        parse_monomial("h_1 c + h_0 a")


@given(monomials)
def test_serialize_round_trip(m):
    x = Expression([m])
    assert P(x.serialize()) == x


@given(st.lists(monomials, min_size=1, max_size=4))
def test_round_trip_sums(ms):
    # group into one degree so the sum is homogeneous
    d = ms[0].degree(MMF_ATOMS)
    same = [m for m in ms if m.degree(MMF_ATOMS) == d]
    x = Expression(same)
    if x:
        assert P(x.serialize()) == x


@given(monomials, monomials)
def test_degree_additive(a, b):
    assert (a * b).degree(MMF_ATOMS) == a.degree(MMF_ATOMS) + b.degree(MMF_ATOMS)
    assert degree_of(Expression([a]) * Expression([b])) == degree_of(a) + degree_of(b)


@given(monomials)
def test_tau_lowers_weight(m):
    assert m.with_tau(m.tau + 1).degree(MMF_ATOMS) == m.degree(MMF_ATOMS) + TriDegree(0, 0, -1)


@given(monomials, monomials)
def test_divides_quotient(a, b):
    prod = a * b
    assert a.divides(prod)
    assert prod.quotient(a) == b
