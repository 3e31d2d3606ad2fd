import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from stcausal.data import (
    PanelDataset,
    SpatialGraph,
    grid_graph,
    default_grid_graph,
    load_graph_json,
    load_panel_csv,
    write_graph_json,
    write_panel_csv,
)
from stcausal.errors import (
    IndexOutOfRange,
    InvalidConfig,
    MalformedRow,
    MissingCell,
    NonBinaryTreatment,
    ParseError,
    SelfLoop,
)


def small_panel(n=3, m=2, steps=4, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=(n, m, steps)).astype(np.int8)
    y = rng.normal(size=(n, m, steps))
    return PanelDataset(a, y)


# --- graphs ---

def test_grid_graph_degenerate():
    g = grid_graph(1, 1)
    assert g.n_units == 1 and g.neighbors == ((),)


def test_grid_graph_4x4_degree_counts():
    g = grid_graph(4, 4)
    degrees = sorted(g.degree(i) for i in range(16))
    assert g.n_units == 16
    assert degrees.count(2) == 4      # corners
    assert degrees.count(3) == 8      # edges
    assert degrees.count(4) == 4      # interior


def test_grid_graph_2x2_all_degree_two():
    g = grid_graph(2, 2)
    assert all(g.degree(i) == 2 for i in range(4))


@given(rows=hst.integers(1, 5), cols=hst.integers(1, 5))
def test_grid_graph_symmetric_irreflexive(rows, cols):
    g = grid_graph(rows, cols)
    for i in range(g.n_units):
        assert i not in g.neighbors[i]
        for k in g.neighbors[i]:
            assert i in g.neighbors[k]
    if rows >= 2 and cols >= 2:
        assert all(2 <= g.degree(i) <= 4 for i in range(g.n_units))


def test_default_grid_graph_shapes():
    assert default_grid_graph(16).edges() == grid_graph(4, 4).edges()
    assert default_grid_graph(12).n_units == 12
    assert default_grid_graph(7).edges() == grid_graph(1, 7).edges()


def test_graph_json_round_trip(tmp_path):
    g = grid_graph(3, 4)
    path = tmp_path / "g.json"
    write_graph_json(g, path)
    assert load_graph_json(path) == g


def test_graph_edges_symmetrized(tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"n_units": 2, "edges": [[0, 1]]}')
    g = load_graph_json(path)
    assert g.neighbors == ((1,), (0,))


def test_graph_self_loop(tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"n_units": 2, "edges": [[0, 0]]}')
    with pytest.raises(SelfLoop):
        load_graph_json(path)


def test_graph_index_out_of_range(tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"n_units": 2, "edges": [[0, 5]]}')
    with pytest.raises(IndexOutOfRange):
        load_graph_json(path)


def test_graph_parse_error(tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"n_units": 2')
    with pytest.raises(ParseError):
        load_graph_json(path)


def test_neighbor_mean_isolated_unit_is_zero():
    g = SpatialGraph.from_edges(3, [[0, 1]])
    out = g.neighbor_mean(np.array([1.0, 5.0, 9.0]))
    assert out[2] == 0.0 and out[0] == 5.0 and out[1] == 1.0


# --- panels ---

def test_panel_round_trip_exact(tmp_path):
    panel = small_panel()
    path = tmp_path / "panel.csv"
    write_panel_csv(panel, path)
    assert load_panel_csv(path) == panel


@settings(max_examples=25, deadline=None)
@given(n=hst.integers(1, 4), m=hst.integers(1, 3), steps=hst.integers(1, 4),
       seed=hst.integers(0, 10**6))
def test_panel_round_trip_property(tmp_path_factory, n, m, steps, seed):
    panel = small_panel(n, m, steps, seed)
    path = tmp_path_factory.mktemp("rt") / "p.csv"
    write_panel_csv(panel, path)
    assert load_panel_csv(path) == panel


def test_panel_row_order_irrelevant(tmp_path):
    panel = small_panel()
    path = tmp_path / "panel.csv"
    write_panel_csv(panel, path)
    lines = path.read_text().splitlines()
    shuffled = [lines[0]] + lines[:0:-1]
    path.write_text("\n".join(shuffled) + "\n")
    assert load_panel_csv(path) == panel


def test_panel_missing_cell(tmp_path):
    panel = small_panel()
    path = tmp_path / "panel.csv"
    write_panel_csv(panel, path)
    lines = path.read_text().splitlines()
    del lines[5]  # any interior row; grid is now one short
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(MissingCell):
        load_panel_csv(path)


def test_panel_nonbinary_treatment(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("unit_id,subunit_id,t,A,Y\n0,0,0,2,1.0\n")
    with pytest.raises(NonBinaryTreatment) as err:
        load_panel_csv(path)
    assert err.value.line == 2


def test_panel_malformed_row(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("unit_id,subunit_id,t,A,Y\n0,0,0,1,1.0\nnot,an,int,1,2.0\n")
    with pytest.raises(MalformedRow) as err:
        load_panel_csv(path)
    assert err.value.line == 3


def test_panel_duplicate_cell(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("unit_id,subunit_id,t,A,Y\n0,0,0,1,1.0\n0,0,0,0,2.0\n")
    with pytest.raises(MalformedRow):
        load_panel_csv(path)


def test_panel_header_mismatch(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("a,b,c,d,e\n0,0,0,1,1.0\n")
    with pytest.raises(ParseError):
        load_panel_csv(path)


def test_panel_rejects_nan_outcome():
    a = np.zeros((1, 1, 1), dtype=np.int8)
    y = np.full((1, 1, 1), np.nan)
    with pytest.raises(InvalidConfig):
        PanelDataset(a, y)


def test_panel_rejects_nonbinary_array():
    a = np.full((1, 1, 1), 2)
    with pytest.raises(InvalidConfig):
        PanelDataset(a, np.zeros((1, 1, 1)))


def test_panel_arrays_frozen():
    panel = small_panel()
    with pytest.raises(ValueError):
        panel.outcomes[0, 0, 0] = 1.0
