"""Domain types shared by every module: spatial graphs and rectangular panels.

A panel is a complete (unit, subunit, time) grid of binary treatments and
real outcomes. A spatial graph is a symmetric, irreflexive neighbor relation
over units together with the implicit total order "ascending unit index",
which fixes the direction of contemporaneous influence.

The lag helpers at the bottom are the single code path for subunit means and
neighbor means; the data generator and the feature builder both call them so
their lag conventions cannot drift apart.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvalidConfig,
    MalformedRow,
    MissingCell,
    NonBinaryTreatment,
    ParseError,
    SelfLoop,
)

PANEL_HEADER = ("unit_id", "subunit_id", "t", "A", "Y")


@dataclass(frozen=True)
class SpatialGraph:
    """Unit adjacency with the total order given by the unit index."""

    n_units: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_units < 1:
            raise InvalidConfig("n_units", "must be a positive integer")
        if len(self.neighbors) != self.n_units:
            raise InvalidConfig("neighbors", "must list one neighbor set per unit")
        for i, nbrs in enumerate(self.neighbors):
            for k in nbrs:
                if k == i:
                    raise SelfLoop(i)
                if not 0 <= k < self.n_units:
                    raise IndexOutOfRange(k, self.n_units)
                if i not in self.neighbors[k]:
                    raise InvalidConfig("neighbors", f"edge ({i},{k}) is not symmetric")
            if tuple(sorted(set(nbrs))) != nbrs:
                raise InvalidConfig("neighbors", f"neighbor list of unit {i} must be "
                                                 "sorted and duplicate-free")

    @staticmethod
    def from_edges(n_units: int, edges) -> "SpatialGraph":
        """Build a graph from (i, j) pairs; edges are symmetrized."""
        sets: list[set[int]] = [set() for _ in range(n_units)]
        for edge in edges:
            if len(edge) != 2:
                raise ParseError(f"edge {edge!r} is not a pair")
            i, j = int(edge[0]), int(edge[1])
            if i == j:
                raise SelfLoop(i)
            for k in (i, j):
                if not 0 <= k < n_units:
                    raise IndexOutOfRange(k, n_units)
            sets[i].add(j)
            sets[j].add(i)
        return SpatialGraph(n_units, tuple(tuple(sorted(s)) for s in sets))

    def degree(self, unit: int) -> int:
        return len(self.neighbors[unit])

    def edges(self) -> list[tuple[int, int]]:
        """Canonical undirected edge list, each edge once with i < j."""
        return [(i, j) for i in range(self.n_units) for j in self.neighbors[i] if i < j]

    def neighbor_mean(self, values: np.ndarray) -> np.ndarray:
        """Per-unit mean of ``values`` over that unit's neighbors (0 if none).

        This is the one implementation of the neighbor-mean convention; both
        the generator and the estimators go through it.
        """
        values = np.asarray(values, dtype=float)
        out = np.zeros(self.n_units)
        for i, nbrs in enumerate(self.neighbors):
            if nbrs:
                out[i] = values[list(nbrs)].mean()
        return out

    def to_json_dict(self) -> dict:
        return {"n_units": self.n_units, "edges": [list(e) for e in self.edges()]}


def grid_graph(rows: int, cols: int) -> SpatialGraph:
    """Rook-adjacency grid; unit index = row * cols + col."""
    if rows < 1 or cols < 1:
        raise InvalidConfig("rows/cols", "grid dimensions must be >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.append((i, i + 1))
            if r + 1 < rows:
                edges.append((i, i + cols))
    return SpatialGraph.from_edges(rows * cols, edges)


def default_grid_graph(n_units: int) -> SpatialGraph:
    """Near-square rook grid covering ``n_units`` (4x4 for the default 16).

    Uses the largest divisor of n_units not exceeding its square root as the
    row count, so 16 -> 4x4, 12 -> 3x4, primes -> a line graph.
    """
    rows = 1
    for d in range(1, int(math.isqrt(n_units)) + 1):
        if n_units % d == 0:
            rows = d
    return grid_graph(rows, n_units // rows)


def load_graph_json(path) -> SpatialGraph:
    """Read `{"n_units": <int>, "edges": [[i,j], ...]}`; edges symmetrized."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(obj, dict) or "n_units" not in obj or "edges" not in obj:
        raise ParseError(f"{path}: expected an object with n_units and edges")
    return SpatialGraph.from_edges(int(obj["n_units"]), obj["edges"])


def write_graph_json(graph: SpatialGraph, path) -> None:
    Path(path).write_text(json.dumps(graph.to_json_dict()) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class PanelDataset:
    """Complete (unit, subunit, time) grid of treatments and outcomes.

    ``treatments`` is int8 in {0,1}, ``outcomes`` float64 and finite; both are
    shaped (n_units, m_subunits, t_steps) and frozen read-only on construction.
    """

    treatments: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.treatments)
        y = np.asarray(self.outcomes, dtype=float)
        if a.ndim != 3 or y.ndim != 3 or a.shape != y.shape:
            raise InvalidConfig("panel", "treatments and outcomes must share a "
                                         "(units, subunits, steps) shape")
        if min(a.shape) < 1:
            raise InvalidConfig("panel", "all panel dimensions must be >= 1")
        if not np.isin(a, (0, 1)).all():
            raise InvalidConfig("panel", "treatments must be exactly 0 or 1")
        if not np.isfinite(y).all():
            raise InvalidConfig("panel", "outcomes must be finite")
        a = np.ascontiguousarray(a, dtype=np.int8)
        y = np.ascontiguousarray(y)
        a.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "treatments", a)
        object.__setattr__(self, "outcomes", y)

    @property
    def n_units(self) -> int:
        return self.treatments.shape[0]

    @property
    def m_subunits(self) -> int:
        return self.treatments.shape[1]

    @property
    def t_steps(self) -> int:
        return self.treatments.shape[2]

    def unit_means_at(self, t: int) -> np.ndarray:
        """Within-unit subunit mean of the outcome at step index ``t``."""
        return subunit_means_at(self.outcomes, t)

    def treatment_means_at(self, t: int) -> np.ndarray:
        return self.treatments[:, :, t].mean(axis=1)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PanelDataset)
                and np.array_equal(self.treatments, other.treatments)
                and np.array_equal(self.outcomes, other.outcomes))


def subunit_means_at(outcomes: np.ndarray, t: int) -> np.ndarray:
    """Subunit mean per unit at step ``t`` — the shared lag-convention path."""
    return outcomes[:, :, t].mean(axis=1)


def lagged_unit_means(panel: PanelDataset) -> np.ndarray:
    """(n_units, t_steps) array L with L[:, t] = unit means at t-1, L[:, 0] = 0."""
    lag = np.zeros((panel.n_units, panel.t_steps))
    for t in range(1, panel.t_steps):
        lag[:, t] = panel.unit_means_at(t - 1)
    return lag


def lagged_neighbor_means(panel: PanelDataset, graph: SpatialGraph) -> np.ndarray:
    """(n_units, t_steps) neighbor-mean lags; 0 at t = 0 and for isolated units."""
    lag = np.zeros((panel.n_units, panel.t_steps))
    for t in range(1, panel.t_steps):
        lag[:, t] = graph.neighbor_mean(panel.unit_means_at(t - 1))
    return lag


def load_panel_csv(path) -> PanelDataset:
    """Read a panel CSV (header unit_id,subunit_id,t,A,Y); row order irrelevant.

    Raises MalformedRow / NonBinaryTreatment with 1-based line numbers, and
    MissingCell naming the first absent (unit, subunit, t).
    """
    cells: dict[tuple[int, int, int], tuple[int, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != PANEL_HEADER:
            raise ParseError(f"{path}: expected header {','.join(PANEL_HEADER)}, "
                             f"got {','.join(header)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise MalformedRow(line_no, f"expected 5 fields, got {len(row)}")
            try:
                i, j, t = int(row[0]), int(row[1]), int(row[2])
                y = float(row[4])
            except ValueError as exc:
                raise MalformedRow(line_no, str(exc)) from exc
            if row[3].strip() not in ("0", "1"):
                raise NonBinaryTreatment(line_no, row[3])
            if i < 0 or j < 0 or t < 0:
                raise MalformedRow(line_no, "indices must be nonnegative")
            if not math.isfinite(y):
                raise MalformedRow(line_no, f"outcome must be finite, got {row[4]!r}")
            key = (i, j, t)
            if key in cells:
                raise MalformedRow(line_no, f"duplicate cell {key}")
            cells[key] = (int(row[3]), y)
    if not cells:
        raise ParseError(f"{path}: no data rows")
    n = 1 + max(k[0] for k in cells)
    m = 1 + max(k[1] for k in cells)
    steps = 1 + max(k[2] for k in cells)
    a = np.zeros((n, m, steps), dtype=np.int8)
    y_arr = np.zeros((n, m, steps))
    for i in range(n):
        for j in range(m):
            for t in range(steps):
                if (i, j, t) not in cells:
                    raise MissingCell(i, j, t)
                a[i, j, t], y_arr[i, j, t] = cells[(i, j, t)]
    return PanelDataset(a, y_arr)


def write_panel_csv(panel: PanelDataset, path) -> None:
    """Write the canonical panel CSV (LF endings, repr-exact outcomes)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(PANEL_HEADER) + "\n")
        for i in range(panel.n_units):
            for j in range(panel.m_subunits):
                for t in range(panel.t_steps):
                    fh.write(f"{i},{j},{t},{panel.treatments[i, j, t]},"
                             f"{float(panel.outcomes[i, j, t])!r}\n")
