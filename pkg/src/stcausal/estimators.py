"""Conditional-dynamics models fitted on panel data.

Three structural variants of the pooled linear model:

  spatio-temporal   per-unit intercepts + treatment + own lag + neighbor lag
  temporal          per-unit intercepts + treatment + own lag
  aggregated        unit-time means, one global intercept + treated fraction
                    + own lag + neighbor lag (no per-unit terms, so static
                    unit heterogeneity is left uncontrolled)

Per-unit intercepts are explicit dummy columns rather than within-demeaning
because the simulation stage needs the fitted intercepts themselves. Rows
start at the second time step; the first step's zero-lag convention rows are
never used for fitting.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .data import PanelDataset, SpatialGraph, lagged_neighbor_means, lagged_unit_means
from .errors import InvalidConfig, MissingUnitModel, TooShortPanel
from .linalg import DesignMatrix, solve_least_squares

VARIANT_SPATIOTEMPORAL = "spatio-temporal"
VARIANT_TEMPORAL = "temporal"
VARIANT_AGGREGATED = "aggregated"
VARIANTS = (VARIANT_AGGREGATED, VARIANT_TEMPORAL, VARIANT_SPATIOTEMPORAL)


@dataclass(frozen=True)
class LmmFit:
    """Fitted pooled linear model.

    ``alpha`` holds one intercept per unit for the hierarchical variants and a
    single global intercept for the aggregated one. ``rho_hat`` is None for
    the temporal variant, which has no spatial term.
    """

    variant: str
    alpha: tuple[float, ...]
    beta_a: float
    beta_temp: float
    rho_hat: Optional[float]
    residual_sd: float

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfig("variant", f"must be one of {VARIANTS}")
        if self.variant == VARIANT_AGGREGATED and len(self.alpha) != 1:
            raise InvalidConfig("alpha", "aggregated fit has exactly one intercept")
        if self.variant == VARIANT_TEMPORAL and self.rho_hat is not None:
            raise InvalidConfig("rho_hat", "temporal fit has no spatial coefficient")
        if self.residual_sd < 0:
            raise InvalidConfig("residual_sd", "must be nonnegative")

    def intercept_for(self, unit: int, n_units: int) -> float:
        if self.variant == VARIANT_AGGREGATED:
            return self.alpha[0]
        if len(self.alpha) != n_units:
            raise MissingUnitModel(f"fit has {len(self.alpha)} intercepts for "
                                   f"{n_units} units")
        return self.alpha[unit]

    def predict_unit(self, unit: int, n_units: int, treatment: float,
                     own_lag: float, neighbor_lag: float) -> float:
        rho = 0.0 if self.rho_hat is None else self.rho_hat
        return (self.intercept_for(unit, n_units)
                + self.beta_temp * own_lag + rho * neighbor_lag
                + self.beta_a * treatment)

    def to_json_dict(self) -> dict:
        out = {"variant": self.variant, "alpha": list(self.alpha),
               "beta_a": self.beta_a, "beta_temp": self.beta_temp,
               "residual_sd": self.residual_sd}
        if self.rho_hat is not None:
            out["rho_hat"] = self.rho_hat
        return out

    @staticmethod
    def from_json_dict(obj: dict) -> "LmmFit":
        return LmmFit(variant=obj["variant"], alpha=tuple(obj["alpha"]),
                      beta_a=obj["beta_a"], beta_temp=obj["beta_temp"],
                      rho_hat=obj.get("rho_hat"), residual_sd=obj["residual_sd"])

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def load_fit_json(path) -> LmmFit:
    with open(path, "r", encoding="utf-8") as fh:
        return LmmFit.from_json_dict(json.load(fh))


def build_features(panel: PanelDataset, graph: SpatialGraph,
                   variant: str) -> DesignMatrix:
    """Assemble the regression design for one variant.

    Subunit variants emit one row per (unit, subunit, step >= 2); the
    aggregated variant one row per (unit, step >= 2) of unit-time means.
    """
    if variant not in VARIANTS:
        raise InvalidConfig("variant", f"must be one of {VARIANTS}")
    if panel.t_steps < 2:
        raise TooShortPanel("lagged features require t_steps >= 2")
    if graph.n_units != panel.n_units:
        raise InvalidConfig("graph", f"graph has {graph.n_units} units, panel "
                                     f"has {panel.n_units}")
    n, m, steps = panel.n_units, panel.m_subunits, panel.t_steps
    own_lag = lagged_unit_means(panel)[:, 1:]            # (n, steps-1)
    nbr_lag = lagged_neighbor_means(panel, graph)[:, 1:]

    if variant == VARIANT_AGGREGATED:
        a_mean = np.stack([panel.treatment_means_at(t) for t in range(1, steps)],
                          axis=1)
        y_mean = np.stack([panel.unit_means_at(t) for t in range(1, steps)], axis=1)
        x = np.column_stack([np.ones(n * (steps - 1)), a_mean.ravel(),
                             own_lag.ravel(), nbr_lag.ravel()])
        names = ("intercept", "treated_fraction", "own_lag", "neighbor_lag")
        return DesignMatrix(names, x, y_mean.ravel())

    rows = n * m * (steps - 1)
    dummies = np.repeat(np.eye(n), m * (steps - 1), axis=0)
    a_col = panel.treatments[:, :, 1:].reshape(rows)
    own_col = np.broadcast_to(own_lag[:, None, :], (n, m, steps - 1)).reshape(rows)
    names = tuple(f"alpha[{i}]" for i in range(n)) + ("treatment", "own_lag")
    blocks = [dummies, a_col[:, None], own_col[:, None]]
    if variant == VARIANT_SPATIOTEMPORAL:
        nbr_col = np.broadcast_to(nbr_lag[:, None, :], (n, m, steps - 1)).reshape(rows)
        blocks.append(nbr_col[:, None])
        names += ("neighbor_lag",)
    x = np.column_stack(blocks)
    y = panel.outcomes[:, :, 1:].reshape(rows)
    return DesignMatrix(names, x, y)


def fit_lmm(panel: PanelDataset, graph: SpatialGraph, variant: str) -> LmmFit:
    """Fit one variant by least squares on its design."""
    design = build_features(panel, graph, variant)
    beta = solve_least_squares(design)
    residual = design.target - design.values @ beta
    residual_sd = float(np.sqrt(np.mean(residual**2)))
    if variant == VARIANT_AGGREGATED:
        return LmmFit(variant, (float(beta[0]),), float(beta[1]), float(beta[2]),
                      float(beta[3]), residual_sd)
    n = panel.n_units
    rho = float(beta[n + 2]) if variant == VARIANT_SPATIOTEMPORAL else None
    return LmmFit(variant, tuple(float(b) for b in beta[:n]), float(beta[n]),
                  float(beta[n + 1]), rho, residual_sd)


def build_unit_features(panel: PanelDataset, graph: SpatialGraph,
                        unit: int) -> DesignMatrix:
    """Per-unit design (treatment, own lag, neighbor lag) for unit-local models."""
    if panel.t_steps < 2:
        raise TooShortPanel("lagged features require t_steps >= 2")
    m, steps = panel.m_subunits, panel.t_steps
    own_lag = lagged_unit_means(panel)[unit, 1:]
    nbr_lag = lagged_neighbor_means(panel, graph)[unit, 1:]
    rows = m * (steps - 1)
    x = np.column_stack([
        panel.treatments[unit, :, 1:].reshape(rows),
        np.broadcast_to(own_lag, (m, steps - 1)).reshape(rows),
        np.broadcast_to(nbr_lag, (m, steps - 1)).reshape(rows),
    ])
    return DesignMatrix(("treatment", "own_lag", "neighbor_lag"), x,
                        panel.outcomes[unit, :, 1:].reshape(rows))


class HierarchicalLinearDynamics(BaseEstimator):
    """Estimator-style wrapper: fit a pooled linear variant, then simulate.

    After ``fit`` the result is available as ``fit_`` (an LmmFit) and the
    panel/graph are retained for the downstream policy simulation.
    """

    def __init__(self, variant: str = VARIANT_SPATIOTEMPORAL):
        self.variant = variant

    def fit(self, panel: PanelDataset, graph: SpatialGraph):
        self.fit_ = fit_lmm(panel, graph, self.variant)
        self.panel_ = panel
        self.graph_ = graph
        return self

    def predict(self, panel: PanelDataset, graph: SpatialGraph) -> np.ndarray:
        """Fitted-model predictions for the feature rows of ``panel``."""
        design = build_features(panel, graph, self.variant)
        return design.values @ self._coefficients(panel.n_units)

    def estimate_ate(self, horizon: Optional[int] = None,
                     mode: str = "observed-lag"):
        from .gcomp import estimate_ate
        return estimate_ate(self.fit_, self.panel_, self.graph_,
                            horizon=horizon, mode=mode)

    def _coefficients(self, n_units: int) -> np.ndarray:
        f = self.fit_
        tail = [f.beta_a, f.beta_temp]
        if f.variant != VARIANT_TEMPORAL:
            tail.append(f.rho_hat)
        return np.array(list(f.alpha) + tail)
