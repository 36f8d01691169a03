import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srg import io
from srg.errors import InvalidModel, InvalidRegionGraph
from srg.factor_graph import Factor, FactorGraph, VariableDecl, random_complete_model

from corpus import all_graphs


def test_model_round_trip(tmp_path):
    fg = random_complete_model(5, 3, "gaussian")
    path = tmp_path / "m.json"
    io.write_model(fg, path)
    assert io.read_model(path) == fg
    assert io.dumps(io.model_to_dict(io.read_model(path))) == path.read_text()


@given(st.lists(st.floats(0.0, 10.0), min_size=12, max_size=12).filter(lambda xs: any(x > 0 for x in xs)))
def test_table_order_is_row_major(values):
    fg = FactorGraph([VariableDecl(0, 2), VariableDecl(1, 3), VariableDecl(2, 2)], [Factor(0, (1, 0, 2), np.reshape(values, (3, 2, 2)))])
    doc = io.model_to_dict(fg)
    assert doc["factors"][0]["table"] == [float(x) for x in values]
    assert io.model_from_dict(json.loads(json.dumps(doc))) == fg


@pytest.mark.parametrize("name,fg,rg", all_graphs()[::4], ids=lambda x: x if isinstance(x, str) else "")
def test_region_graph_round_trip(tmp_path, name, fg, rg):
    path = tmp_path / "rg.json"
    io.write_region_graph(rg, path)
    back = io.read_region_graph(path)
    assert back.edges == rg.edges and back.ids == rg.ids
    assert all(back[r] == rg[r] for r in rg.ids)
    assert back.factor_scopes == rg.factor_scopes


@pytest.mark.parametrize(
    "doc",
    [
        {"format": "srg-region-graph", "version": 1},
        {"format": "srg-model", "version": 2, "variables": [], "factors": []},
        {"format": "srg-model", "version": 1, "variables": [{"id": 0, "cardinality": 2}], "factors": [{"id": 0, "scope": [0], "table": [1.0]}]},
        {"format": "srg-model", "version": 1, "variables": [{"id": 0, "cardinality": 2}], "factors": [{"id": 0, "scope": [4], "table": [1.0, 1.0]}]},
        {"format": "srg-model", "version": 1, "variables": [{"id": 0}], "factors": []},
    ],
)
def test_bad_model_documents(doc):
    with pytest.raises(InvalidModel):
        io.model_from_dict(doc)


def test_bad_region_graph_documents(tmp_path):
    with pytest.raises(InvalidRegionGraph):
        io.rg_from_dict({"format": "srg-model", "version": 1})
    with pytest.raises(InvalidRegionGraph):
        io.rg_from_dict({"format": "srg-region-graph", "version": 1, "regions": [{"id": 0}], "edges": []})
    with pytest.raises(InvalidRegionGraph):
        io.rg_from_dict({"format": "srg-region-graph", "version": 1, "regions": [], "edges": [[0, 1]]})
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(InvalidRegionGraph):
        io.read_region_graph(path)


def test_dot_export():
    fg = random_complete_model(4, 0)
    from srg.constructions import star_rg

    rg = star_rg(fg, 1)
    dot = io.to_dot(rg)
    assert dot.startswith("digraph rg {") and dot.rstrip().endswith("}")
    assert dot.count("->") == len(rg.edges)
    for rid, c in rg.counting_numbers.items():
        assert f"r{rid} [label=\"{rid}: " in dot and f"c={c}" in dot
