"""Exact verification that subunit-rich hierarchies converge to their
collapsed limit in KL divergence.

The toy model: one or two units, each carrying a binary static trait U with
P(U=1) = p_u. At every step a deterministic lookup q = q_map[(U, previous own
value, neighbor value)] fixes the per-subunit Bernoulli probability; m
subunits are drawn, and the unit's binary macro-value X emits with
probability readout(subunit mean). The collapsed limit replaces the subunit
mean by q itself, i.e. P(X=1) = readout(q).

A linear readout is exactly collapsed at every m (E[mean] = q), so the
interesting regime is the square readout, where the finite-m emission
probability is q^2 + q(1-q)/m and the gap closes at rate 1/m: KL of the
macro-history distributions then falls like 1/m^2.

With two units, unit 0 influences unit 1 within the same step (never the
reverse), while unit 1 reaches unit 0 only with a one-step lag — the strict
unit order that keeps each step acyclic. The same two-unit model can be
rebuilt as a single chain over paired states ("super-unit") and enumerated by
an independent code path; both distributions must agree exactly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .errors import InvalidConfig, StateSpaceTooLarge

READOUT_LINEAR = "linear"
READOUT_SQUARE = "square"
READOUTS = (READOUT_LINEAR, READOUT_SQUARE)

# histories are tuples over time of per-unit value tuples:
# ((x_{0,1}, x_{1,1}), (x_{0,2}, x_{1,2}), ...)
History = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class CollapseToyModel:
    """Fully enumerable two-level model; see module docstring."""

    n_units: int
    t_steps: int
    q_map: Mapping[tuple[int, int, int], float]
    readout: str
    p_u: float

    def __post_init__(self):
        if self.n_units not in (1, 2):
            raise InvalidConfig("n_units", "toy model supports 1 or 2 units")
        if not 1 <= self.t_steps <= 4:
            raise StateSpaceTooLarge(f"t_steps={self.t_steps} exceeds the "
                                     "enumerable bound of 4")
        if self.readout not in READOUTS:
            raise InvalidConfig("readout", f"must be one of {READOUTS}")
        if not 0 <= self.p_u <= 1:
            raise InvalidConfig("p_u", "must be a probability")
        for key in _q_keys():
            if key not in self.q_map:
                raise InvalidConfig("q_map", f"missing entry for {key}")
            q = self.q_map[key]
            if not 0 < q < 1:
                raise InvalidConfig("q_map", f"q for {key} must lie strictly "
                                             f"inside (0,1), got {q}")

    def readout_fn(self) -> Callable[[float], float]:
        return (lambda p: p) if self.readout == READOUT_LINEAR else (lambda p: p * p)

    def to_json_dict(self) -> dict:
        return {"n_units": self.n_units, "t_steps": self.t_steps,
                "readout": self.readout, "p_u": self.p_u,
                "q_map": {f"{u},{prev},{nb}": q
                          for (u, prev, nb), q in sorted(self.q_map.items())}}


def _q_keys():
    return [(u, prev, nb) for u in (0, 1) for prev in (0, 1) for nb in (0, 1)]


def default_toy_model(n_units: int = 2, t_steps: int = 3,
                      readout: str = READOUT_SQUARE,
                      p_u: float = 0.5) -> CollapseToyModel:
    """Canonical table: trait, own history, and neighbor all push q upward."""
    q_map = {(u, prev, nb): 0.2 + 0.45 * u + 0.15 * prev + 0.1 * nb
             for (u, prev, nb) in _q_keys()}
    return CollapseToyModel(n_units, t_steps, q_map, readout, p_u)


def emit_probability(q: float, m: Optional[int], readout: Callable[[float], float]
                     ) -> float:
    """P(X = 1 | q): binomial mixture of readout(k/m), or readout(q) at m = inf."""
    if m is None:
        return readout(q)
    if m < 1:
        raise InvalidConfig("m", "subunit count must be >= 1 (or None for the limit)")
    total = 0.0
    for k in range(m + 1):
        total += math.comb(m, k) * q**k * (1 - q) ** (m - k) * readout(k / m)
    return total


def exact_history_distribution(model: CollapseToyModel,
                               m: Optional[int]) -> dict[History, float]:
    """Exact probability of every macro-history, marginalized over the traits.

    Within a step, unit 0 emits first from (U_0, own previous value, unit 1's
    previous value); unit 1 then emits from (U_1, own previous value, unit 0's
    value at the *current* step). Previous values at the first step are 0.
    """
    readout = model.readout_fn()
    n, steps = model.n_units, model.t_steps
    dist: dict[History, float] = {}
    trait_combos = [(u,) for u in (0, 1)] if n == 1 else \
        [(u0, u1) for u0 in (0, 1) for u1 in (0, 1)]
    for traits in trait_combos:
        p_traits = 1.0
        for u in traits:
            p_traits *= model.p_u if u == 1 else (1 - model.p_u)
        if p_traits == 0.0:
            continue
        stack = [((), p_traits)]
        for _ in range(steps):
            new_stack = []
            for history, prob in stack:
                prev = history[-1] if history else (0,) * n
                for x0 in (0, 1):
                    nb0 = prev[1] if n == 2 else 0
                    p1 = emit_probability(model.q_map[(traits[0], prev[0], nb0)],
                                          m, readout)
                    p_x0 = p1 if x0 == 1 else 1 - p1
                    if n == 1:
                        new_stack.append((history + ((x0,),), prob * p_x0))
                        continue
                    for x1 in (0, 1):
                        p1b = emit_probability(
                            model.q_map[(traits[1], prev[1], x0)], m, readout)
                        p_x1 = p1b if x1 == 1 else 1 - p1b
                        new_stack.append((history + ((x0, x1),),
                                          prob * p_x0 * p_x1))
            stack = new_stack
        for history, prob in stack:
            dist[history] = dist.get(history, 0.0) + prob
    return dist


def kl_divergence(p: Mapping[History, float], q: Mapping[History, float]) -> float:
    """KL(p || q) in nats over the exact tables."""
    total = 0.0
    for h, ph in p.items():
        if ph == 0.0:
            continue
        qh = q.get(h, 0.0)
        if qh == 0.0:
            raise InvalidConfig("q", f"history {h} has zero probability under q "
                                     "but positive under p")
        total += ph * math.log(ph / qh)
    return total


@dataclass(frozen=True)
class CollapseReport:
    """Exact KL(collapsed || finite-m) along a grid of subunit counts."""

    m_grid: tuple[int, ...]
    kl_values: tuple[float, ...]
    model: CollapseToyModel

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["m", "kl_nats"])
            for m, kl in zip(self.m_grid, self.kl_values):
                writer.writerow([m, repr(kl)])

    def write_model_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.model.to_json_dict(), fh, indent=2)
            fh.write("\n")


def kl_curve(model: CollapseToyModel, m_grid) -> CollapseReport:
    """Exact KL between the collapsed distribution and each finite-m one."""
    grid = tuple(int(m) for m in m_grid)
    if not grid or any(m < 1 for m in grid):
        raise InvalidConfig("m_grid", "must be nonempty positive subunit counts")
    collapsed = exact_history_distribution(model, None)
    kls = tuple(kl_divergence(collapsed, exact_history_distribution(model, m))
                for m in grid)
    return CollapseReport(grid, kls, model)


# --- independent path: the two-unit model as one chain over paired states ---

def super_unit_distribution(model: CollapseToyModel,
                            m: Optional[int]) -> dict[History, float]:
    """Enumerate the two-unit model as a single temporal chain whose state is
    the pair of unit values, with the intra-step order folded into one
    composite transition kernel. Same distribution, independent traversal.
    """
    if model.n_units != 2:
        raise InvalidConfig("n_units", "super-unit construction needs 2 units")
    readout = model.readout_fn()

    def kernel(traits, prev_pair, next_pair):
        p0 = emit_probability(model.q_map[(traits[0], prev_pair[0], prev_pair[1])],
                              m, readout)
        p0 = p0 if next_pair[0] == 1 else 1 - p0
        p1 = emit_probability(model.q_map[(traits[1], prev_pair[1], next_pair[0])],
                              m, readout)
        p1 = p1 if next_pair[1] == 1 else 1 - p1
        return p0 * p1

    states = [(a, b) for a in (0, 1) for b in (0, 1)]
    dist: dict[History, float] = {}
    for traits in states:  # (u0, u1) combinations share the {0,1}^2 shape
        p_traits = ((model.p_u if traits[0] else 1 - model.p_u)
                    * (model.p_u if traits[1] else 1 - model.p_u))
        if p_traits == 0.0:
            continue
        chains: dict[History, float] = {(): p_traits}
        for _ in range(model.t_steps):
            nxt: dict[History, float] = {}
            for hist, prob in chains.items():
                prev_pair = hist[-1] if hist else (0, 0)
                for state in states:
                    p = prob * kernel(traits, prev_pair, state)
                    key = hist + (state,)
                    nxt[key] = nxt.get(key, 0.0) + p
            chains = nxt
        for hist, prob in chains.items():
            dist[hist] = dist.get(hist, 0.0) + prob
    return dist
