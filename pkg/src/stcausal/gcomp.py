"""Policy-contrast estimation by recursive simulation of fitted dynamics.

For each policy (treat everything / treat nothing) and each unit, the fitted
model is unrolled forward from a zero initial lag. Neighbor-lag inputs always
come from the observed panel — units are simulated one at a time against the
factual behavior of their neighbors, never jointly. The own-lag input is
mode-dependent:

  propagate      feed back the unit's own simulated outcome (full recursion)
  observed-lag   take the unit's own lag from the observed panel as well, so
                 for a linear fit the contrast collapses to the treatment
                 coefficient exactly

Per-unit finals at the horizon are averaged per policy; the estimate is the
difference of those two means.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional, Union

import numpy as np

from .data import PanelDataset, SpatialGraph, lagged_neighbor_means, lagged_unit_means
from .errors import HorizonOutOfRange, InvalidConfig, MissingUnitModel
from .estimators import LmmFit
from .gbm import GbmModel, gbm_predict

MODE_PROPAGATE = "propagate"
MODE_OBSERVED_LAG = "observed-lag"
MODES = (MODE_PROPAGATE, MODE_OBSERVED_LAG)

FitLike = Union[LmmFit, Mapping[int, GbmModel]]


@dataclass(frozen=True)
class AteEstimate:
    """Simulated policy contrast at a horizon.

    ``per_unit_final`` holds one (treated, untreated) pair of final outcomes
    per unit; ``ate`` is exactly ``mean_do1 - mean_do0``.
    """

    ate: float
    mean_do1: float
    mean_do0: float
    per_unit_final: tuple[tuple[float, float], ...]
    mode: str
    horizon: int

    def to_json_dict(self) -> dict:
        return {"ate": self.ate, "mean_do1": self.mean_do1,
                "mean_do0": self.mean_do0,
                "per_unit_final": [list(p) for p in self.per_unit_final],
                "mode": self.mode, "horizon": self.horizon}

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def _check_fit_coverage(fit: FitLike, n_units: int) -> None:
    if isinstance(fit, LmmFit):
        fit.intercept_for(n_units - 1, n_units)
        return
    missing = [i for i in range(n_units) if i not in fit]
    if missing:
        raise MissingUnitModel(f"no model for unit(s) {missing}")


def _predict(fit: FitLike, unit: int, n_units: int, treatment: float,
             own_lag: float, neighbor_lag: float) -> float:
    if isinstance(fit, LmmFit):
        return fit.predict_unit(unit, n_units, treatment, own_lag, neighbor_lag)
    return gbm_predict(fit[unit], np.array([treatment, own_lag, neighbor_lag]))


def simulate_policy(fit: FitLike, panel: PanelDataset, graph: SpatialGraph,
                    policy: int, horizon: int, mode: str) -> np.ndarray:
    """Per-unit simulated outcome at the horizon under a constant policy."""
    n = panel.n_units
    own_obs = lagged_unit_means(panel)
    nbr_obs = lagged_neighbor_means(panel, graph)
    finals = np.empty(n)
    for i in range(n):
        simulated = 0.0
        for t in range(horizon):
            own = own_obs[i, t] if mode == MODE_OBSERVED_LAG else simulated
            simulated = _predict(fit, i, n, float(policy), own, nbr_obs[i, t])
        finals[i] = simulated
    return finals


def estimate_ate(fit: FitLike, panel: PanelDataset, graph: SpatialGraph,
                 horizon: Optional[int] = None,
                 mode: str = MODE_OBSERVED_LAG) -> AteEstimate:
    """Run both policy simulations and aggregate unit finals into the contrast."""
    if mode not in MODES:
        raise InvalidConfig("mode", f"must be one of {MODES}")
    if graph.n_units != panel.n_units:
        raise InvalidConfig("graph", f"graph has {graph.n_units} units, panel "
                                     f"has {panel.n_units}")
    if horizon is None:
        horizon = panel.t_steps
    if not 1 <= horizon <= panel.t_steps:
        raise HorizonOutOfRange(f"horizon {horizon} outside [1, {panel.t_steps}]")
    _check_fit_coverage(fit, panel.n_units)
    treated = simulate_policy(fit, panel, graph, 1, horizon, mode)
    untreated = simulate_policy(fit, panel, graph, 0, horizon, mode)
    mean_do1 = float(treated.mean())
    mean_do0 = float(untreated.mean())
    return AteEstimate(ate=mean_do1 - mean_do0, mean_do1=mean_do1,
                       mean_do0=mean_do0,
                       per_unit_final=tuple((float(a), float(b))
                                            for a, b in zip(treated, untreated)),
                       mode=mode, horizon=horizon)
