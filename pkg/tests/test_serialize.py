import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morass_forcing.errors import RejectedInput
from morass_forcing.morass import build_canonical, build_random
from morass_forcing.serialize import (dumps, load_json, load_morass, morass_from_doc, morass_to_doc,
                                      morass_to_dot)


def test_doc_shape(M2):
    doc = morass_to_doc(M2)
    assert doc == {"height": 2, "thetas": [1, 2, 4],
                   "steps": [{"kind": "successor", "delta": 0, "f": [1]},
                             {"kind": "successor", "delta": 0, "f": [2, 3]}]}


def test_dumps_is_canonical():
    assert dumps({"b": 1, "a": [frozenset({2, 1})]}) == '{\n  "a": [\n    [\n      1,\n      2\n    ]\n  ],\n  "b": 1\n}\n'


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.integers(0, 10 ** 6))
def test_round_trip(h, seed):
    M = build_random(h, 16, seed)
    text = dumps(morass_to_doc(M))
    back = morass_from_doc(json.loads(text))
    assert back.thetas == M.thetas and back.steps == M.steps
    assert dumps(morass_to_doc(back)) == text


def test_amalgam_round_trip():
    M = build_canonical(3, "custom", deltas=[0, None, 1])
    back = morass_from_doc(morass_to_doc(M))
    assert back.steps == M.steps


@pytest.mark.parametrize("doc", [
    {"thetas": [1]},
    {"thetas": [1, 2], "steps": [{"kind": "other"}]},
    {"height": 3, "thetas": [1, 2], "steps": [{"kind": "successor", "delta": 0, "f": [1]}]},
    {"thetas": "x", "steps": []},
])
def test_malformed_documents(doc):
    with pytest.raises(RejectedInput):
        morass_from_doc(doc)


def test_load_builtins_and_files(tmp_path):
    assert load_morass("M3").thetas == (1, 2, 4, 8)
    assert load_morass("doubling:2").thetas == (1, 2, 4)
    path = tmp_path / "M2.json"
    path.write_text(dumps(morass_to_doc(build_random(2, 6, 1))))
    assert load_morass(str(path)).thetas == build_random(2, 6, 1).thetas
    # a missing file falls back to the builtin named by its basename
    assert load_morass(str(tmp_path / "M4.json")).top_width == 16
    with pytest.raises(RejectedInput):
        load_morass("nothing-here")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(RejectedInput):
        load_morass(str(bad))
    with pytest.raises(RejectedInput):
        load_json(str(bad))
    with pytest.raises(RejectedInput):
        load_json(str(tmp_path / "absent.json"))


def test_dot_export(M2):
    dot = morass_to_dot(M2)
    assert dot.startswith("digraph morass {") and dot.endswith("}\n")
    # identity edges are plain, split edges bold, shared edges carry both labels
    assert '"0,0" -> "1,0" [label="0"];' in dot
    assert '"0,0" -> "1,1" [label="1", style=bold];' in dot
    assert '"1,1" -> "2,3" [label="1", style=bold];' in dot
    edges = [line for line in dot.splitlines() if "->" in line]
    assert len(edges) == len(set(edges)) == 2 + 4
