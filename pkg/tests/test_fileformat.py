import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import instances
from diffauction.fileformat import InstanceFormatError, dumps, instance_to_dict, loads
from diffauction.verifier import reconstruct_gidm_counterexample

DOC = """{
  "k": 2,
  "value_cap": 10,
  "alpha": 0.25,
  "seller_neighbors": [1],
  "buyers": [
    {"id": 1, "label": "x", "valuations": [0.5, "1/3"], "neighbors": [2]},
    {"id": 2, "valuations": [4], "neighbors": []}
  ],
  "true_profile": [
    {"id": 1, "valuations": [5, 1], "neighbors": [2]},
    {"id": 2, "valuations": [4], "neighbors": []}
  ]
}
"""


def test_parse_exact_numbers():
    inst, alpha = loads(DOC)
    assert alpha == Fraction(1, 4)
    assert inst.declared(1).valuations == (Fraction(1, 2), Fraction(1, 3))
    assert inst.declared(2).valuations == (4, 0)
    assert inst.true_type(1).valuations == (5, 1)
    assert inst.name(1) == "x" and inst.name(2) == "2"


def test_serialize_numbers():
    inst, alpha = loads(DOC)
    doc = json.loads(dumps(inst, alpha))
    assert doc["alpha"] == 0.25
    assert doc["buyers"][0]["valuations"] == [0.5, "1/3"]
    assert doc["buyers"][1]["valuations"] == [4, 0]


def test_round_trip_is_identical():
    inst, alpha = loads(DOC)
    text = dumps(inst, alpha)
    again, alpha2 = loads(text)
    assert again == inst and again.labels == inst.labels and alpha2 == alpha
    assert dumps(again, alpha2) == text


def test_counterexample_round_trip():
    inst = reconstruct_gidm_counterexample()
    again, _ = loads(dumps(inst))
    assert again == inst and again.labels == inst.labels


@settings(max_examples=200, deadline=None)
@given(instances(n_max=6, k_max=4))
def test_round_trip_property(inst):
    again, _ = loads(dumps(inst))
    assert again == inst


def _break(path, value):
    doc = json.loads(DOC)
    node = doc
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value
    return json.dumps(doc)


@pytest.mark.parametrize(
    "path, value, message",
    [
        (("buyers", 1, "valuations"), [1, 2], "buyer 2: declared valuations must be non-increasing"),
        (("buyers", 0, "valuations", 1), "abc", r"buyers\[0\]\.valuations\[1\]"),
        (("buyers", 0, "valuations", 0), True, r"buyers\[0\]\.valuations\[0\]: expected a number"),
        (("buyers", 0, "neighbors"), [2, 2], r"buyers\[0\]\.neighbors: duplicate edge"),
        (("buyers", 0, "neighbors"), [1], r"buyers\[0\]\.neighbors: buyer 1 lists itself"),
        (("buyers", 1, "id"), 1, r"buyers\[1\]\.id: buyer 1 listed twice"),
        (("buyers", 1, "id"), 3, "without gaps"),
        (("buyers", 1, "valuations"), [3, 2, 1], r"buyers\[1\]\.valuations: more than k=2"),
        (("seller_neighbors",), [1, 1], "seller_neighbors: duplicate edge"),
        (("k",), 0, "k: expected a positive integer"),
        (("buyers",), [], "buyers: expected a non-empty list"),
        (("value_cap",), 3, "exceeds cap"),
        (("true_profile", 0, "neighbors"), [], "not a subset"),
    ],
)
def test_field_diagnostics(path, value, message):
    with pytest.raises(InstanceFormatError, match=message):
        loads(_break(path, value))


def test_unknown_fields_rejected():
    with pytest.raises(InstanceFormatError, match="unknown field"):
        loads(_break(("extra",), 1))
    with pytest.raises(InstanceFormatError, match=r"buyers\[0\]: unknown field"):
        loads(_break(("buyers", 0, "weight"), 1))


def test_syntax_error_reports_line():
    broken = DOC.replace('"k": 2,', '"k": 2')
    with pytest.raises(InstanceFormatError, match=r"line 3, column 3"):
        loads(broken)


def test_to_dict_omits_optional_fields():
    inst, _ = loads('{"k": 1, "seller_neighbors": [], "buyers": [{"id": 1, "valuations": [1]}]}')
    assert set(instance_to_dict(inst)) == {"k", "seller_neighbors", "buyers"}
