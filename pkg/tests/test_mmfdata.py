import copy
import json

import pytest

from mmfsseq.algebra import Window
from mmfsseq.grading import parse_expression
from mmfsseq.mmfdata import (
    DatasetError,
    empty_dataset,
    extend_by_periodicity,
    from_json,
    hidden_jump,
    load_dataset,
    loads,
    normalize_page_key,
    serialize,
    shift_rows,
    shipped_text,
    validate_dataset,
)


@pytest.fixture(scope="module")
def doc():
    return json.loads(shipped_text())


@pytest.fixture(scope="module")
def data():
    return load_dataset()


def test_shipped_dataset_shape(data):
    assert len(data.pages["2"].generators) == 15
    assert len(data.pages["4"].generators) == 52
    assert len(data.pages["inf"].generators) == 43
    assert data.pages["inf"].differentials is None
    assert data.pages["2"].r == 2 and data.pages["inf"].r is None


def test_round_trip_is_byte_identical(data):
    assert serialize(data) == shipped_text()
    assert serialize(loads(serialize(data))) == shipped_text()


def test_shipped_dataset_validates(data):
    rep = validate_dataset(data)
    assert rep.ok, [str(c) for c in rep.failures]
    assert rep.summary() == "379 checks, 0 failures"


def test_empty_dataset_validates():
    assert validate_dataset(empty_dataset()).ok
    assert validate_dataset(from_json({})).ok


def test_page_keys():
    assert normalize_page_key(3) == "3"
    assert normalize_page_key("infinity") == "inf"
    assert normalize_page_key("∞") == "inf"
    with pytest.raises(KeyError):
        normalize_page_key("7")


def test_duplicate_generator_is_rejected(doc):
    bad = copy.deepcopy(doc)
    rows = bad["pages"]["2"]["generators"]
    rows.append(dict(rows[1]))
    with pytest.raises(DatasetError) as e:
        from_json(bad)
    msg = str(e.value)
    assert "duplicate generator" in msg and f"generators[{len(rows) - 1}]" in msg and "row 1" in msg


def test_unknown_atom_is_rejected_with_row(doc):
    bad = copy.deepcopy(doc)
    bad["pages"]["3"]["generators"][0]["expr"] = "h_9"
    with pytest.raises(DatasetError) as e:
        from_json(bad)
    assert "pages.3.generators[0]" in str(e.value) and "h_9" in str(e.value)


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d.update(hidden_2=[]), "unsupported data kind"),
    (lambda d: d.update(bogus=1), "unknown top-level key"),
    (lambda d: d["pages"].update({"E9": {}}), "pages"),
    (lambda d: d["pages"]["2"]["generators"][0].pop("s"), "pages.2.generators[0]"),
    (lambda d: d["einf_facts"].append({"s": 0, "f": 1, "w": 0, "expr": "h_0", "order": 0}), "order"),
    (lambda d: d["torsion_legend"].update({"x": "#000"}), "torsion_legend"),
    (lambda d: d["relations"].append({"expr": "h_0 + h_1"}), "relations"),
])
def test_malformed_rows(doc, mutate, fragment):
    bad = copy.deepcopy(doc)
    mutate(bad)
    with pytest.raises(DatasetError) as e:
        from_json(bad)
    assert fragment in str(e.value)


def test_invalid_json():
    with pytest.raises(DatasetError):
        loads("{not json")
    with pytest.raises(DatasetError):
        from_json([])


def test_hidden_jump_policy(doc):
    data = from_json(doc)
    assert all(hidden_jump(h, data.atoms) == 1 for h in data.hidden_tau)
    # move a target up one filtration: tau * (h_1 x) becomes a jump-2 extension
    bad = copy.deepcopy(doc)
    row = bad["hidden_tau"][0]
    src = parse_expression(row["source"])
    tgt = parse_expression(row["target"])
    bad["hidden_tau"][0]["target"] = str(tgt * parse_expression("h_0"))
    mutated = from_json(bad)
    assert hidden_jump(mutated.hidden_tau[0], mutated.atoms) == 2
    rep = validate_dataset(mutated)
    fails = rep.failures
    assert len(fails) == 1 and fails[0].kind == "hidden jump policy" and "jump 2" in fails[0].detail
    assert validate_dataset(mutated, max_jump=2).ok
    assert validate_dataset(mutated, max_jump=None).ok
    assert src != tgt


def test_validation_catches_wrong_degree(doc):
    bad = copy.deepcopy(doc)
    bad["pages"]["3"]["generators"][0]["w"] += 1
    rep = validate_dataset(from_json(bad))
    assert [c.kind for c in rep.failures] == ["homogeneous"]


def test_shift_rows(data):
    rows = shift_rows(data.pages["2"].generators[:3], 4, data.atoms)
    for g0, g in zip(data.pages["2"].generators, rows):
        assert g.degree == g0.degree + data.atoms.degree("Delta") * 4
        assert g.expr == g0.expr * parse_expression("\\Delta^4")
        assert g.text.startswith("\\Delta^4 ")
        assert parse_expression(g.text) == g.expr


def test_periodicity_extension(data):
    ext = extend_by_periodicity(data, "2", Window(s_max=192))
    e2 = ext.pages["2"]
    # every E2 row (stems <= 48) reappears times Delta^4; only h_0 fits times Delta^8
    assert len(e2.generators) == 15 * 2 + 1
    assert parse_expression("\\Delta^8 h_0") in {g.expr for g in e2.generators}
    assert e2.window.s_max == 192
    assert validate_dataset(ext).ok
    src = {x.source for x in e2.differentials}
    for x in data.pages["2"].differentials:
        assert x.source * parse_expression("\\Delta^4") in src
    # extending twice changes nothing
    again = extend_by_periodicity(ext, "2", Window(s_max=192))
    assert again.pages["2"].generators == e2.generators


def test_legend_domain(data):
    leg = data.legend()
    assert None in leg and all(k is None or k >= 1 for k in leg)
    orders = {x.order for x in data.einf_facts}
    assert orders <= set(leg)
