import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmfsseq.algebra import Window
from mmfsseq.grading import AtomTable, parse_expression
from mmfsseq.homotopy import (
    AmbiguousChain,
    EinfKnowledge,
    HiddenExtensionError,
    assemble_stem,
    expand_hidden_extensions,
    extensions_from_dataset,
    flag_missing,
    hidden_report,
    invert_tau,
    make_extension,
    set_tau_one,
    split_tau,
)
from mmfsseq.mmfdata import load_dataset
from mmfsseq.taulin import TorsionModule


def P(text, atoms=None):
    return parse_expression(text, atoms) if atoms else parse_expression(text)


@pytest.fixture(scope="module")
def data():
    return load_dataset()


@pytest.fixture(scope="module")
def know(data):
    return EinfKnowledge.from_dataset(data)


@pytest.fixture(scope="module")
def hidden(data):
    return expand_hidden_extensions(extensions_from_dataset(data), Window(s_max=192), data.atoms)


def test_extension_law():
    h = make_extension(P("h_1^2 g"), P("c d"))
    assert h.jump == 1 and h.law_holds()
    with pytest.raises(HiddenExtensionError):
        make_extension(P("h_1 g"), P("c d"))
    # j = 0 is not a hidden extension
    with pytest.raises(HiddenExtensionError):
        make_extension(P("h_1"), P("\\tau h_1"))
    bad = make_extension(P("h_1 g"), P("c d"), check=False)
    assert not bad.law_holds()


def test_dataset_rows_have_jump_one(data):
    rows = extensions_from_dataset(data)
    assert len(rows) == 31
    assert all(h.law_holds() and h.jump == 1 for h in rows)


def test_expansion(data, hidden):
    base = extensions_from_dataset(data)
    assert len(hidden) == 178
    assert all(h.law_holds() and h.source_degree.s <= 192 for h in hidden)
    assert {(h.source, h.target) for h in base} <= {(h.source, h.target) for h in hidden}
    # g and Delta^8 multiples
    g = P("g")
    for h in base:
        if h.source_degree.s + 20 <= 192:
            assert any(x.source == h.source * g and x.target == h.target * g for x in hidden)
    # idempotent
    again = expand_hidden_extensions(hidden, Window(s_max=192), data.atoms)
    assert [(h.source, h.target) for h in again] == [(h.source, h.target) for h in hidden]


def test_expansion_window(data):
    base = extensions_from_dataset(data)
    small = expand_hidden_extensions(base, Window(s_max=40), data.atoms)
    assert all(h.source_degree.s <= 40 for h in small)
    with pytest.raises(ValueError):
        expand_hidden_extensions(base, Window(s_max=40), data.atoms, multipliers=("tau",))


def test_order_info(know):
    o = know.order(P("h_1 d g"))
    assert (o.order, o.exact, o.kind) == (3, True, "exact")
    o = know.order(P("P d"))
    assert (o.order, o.exact, o.kind, o.model_order) == (1, False, "none", None)
    o = know.order(P("c d"))
    assert o.exact and o.order == 1


def test_flag_missing(know, hidden):
    flagged = flag_missing(hidden, know)
    assert len(flagged) == 9
    assert all(why for _, why in flagged)
    lines = hidden_report(hidden, know)
    assert len(lines) == len(hidden)
    assert sum("not expressible" in line for line in lines) == 9


def test_stems(data, know, hidden):
    extra = [g.expr for g in data.pages["inf"].generators]
    s35 = assemble_stem(35, know, hidden, extra)
    s55 = assemble_stem(55, know, hidden, extra)
    s22 = assemble_stem(22, know, hidden, extra)
    assert s35.report(data.atoms) == "stem 35: lead=h_1 d g (9,21) -> M2"
    assert s55.report(data.atoms) == "stem 55: lead=h_1 d g^2 (13,33) -> M2/tau^4"
    assert s22.report(data.atoms) == "stem 22: lead=h_1^2 g (6,14) -> M2/tau^3  [lower bound]"
    fam = s22.families[0]
    assert [m.base for m in fam.members] == [P("h_1^2 g"), P("c d"), P("P d")]
    assert fam.to_json(data.atoms)["chain"] == ["h_1^2 g", "c d", "P d"]


def test_ambiguous_chain():
    atoms = AtomTable([("x", (1, 1, 1)), ("y", (1, 2, 0)), ("z", (1, 3, -1))])
    k = EinfKnowledge(atoms, multipliers=())
    a = make_extension(P("x", atoms), P("y", atoms), atoms)
    b = make_extension(P("x", atoms), P("\\tau z", atoms), atoms, check=False)
    with pytest.raises(AmbiguousChain):
        assemble_stem(1, k, [a, b])
    # a clean chain x -> y, then y free
    fam = assemble_stem(1, EinfKnowledge(atoms, facts=[(P("y", atoms), None)], multipliers=()), [a]).families
    assert len(fam) == 1 and fam[0].module == TorsionModule() and fam[0].exact


def test_chain_orders():
    atoms = AtomTable([("x", (1, 1, 1)), ("y", (1, 2, 0))])
    hx = make_extension(P("\\tau x", atoms), P("y", atoms), atoms, check=False)
    k = EinfKnowledge(atoms, facts=[(P("y", atoms), 2)], multipliers=())
    fam = assemble_stem(1, k, [hx]).families[0]
    # x contributes tau^0, tau^1; y contributes two more
    assert fam.module == TorsionModule(4)
    assert [m.contribution for m in fam.members] == [2, 2]


def test_split_tau_and_inversion(know, hidden, data):
    assert split_tau(P("\\tau^3 h_1 d g")) == (3, P("h_1 d g"))
    assert set_tau_one(P("\\tau^2 h_1^2 \\Delta c")) == P("h_1^2 \\Delta c")
    extra = [g.expr for g in data.pages["inf"].generators]
    # classically only the free family in stem 35 survives
    assert invert_tau(assemble_stem(35, know, hidden, extra)) == [P("h_1 d g")]
    assert invert_tau(assemble_stem(55, know, hidden, extra)) == []
    assert invert_tau([(TorsionModule(), P("\\tau h_0")), (TorsionModule(2), P("h_1"))]) == [P("h_0")]
    with pytest.raises(TypeError):
        invert_tau([3])


@given(st.integers(0, 5), st.sampled_from(["h_1 d g", "c d", "P h_2", "h_0^2"]))
def test_split_tau_property(k, text):
    x = P(text) * P(f"\\tau^{k}") if k else P(text)
    assert split_tau(x) == (k, P(text))
    assert set_tau_one(x) == P(text)
