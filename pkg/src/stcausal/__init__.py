"""Hierarchical spatio-temporal panels: simulation, fixed-effects dynamics
estimation, policy-contrast G-computation, and exact collapse verification."""

__version__ = "0.1.0"

from .data import (
    PanelDataset,
    SpatialGraph,
    default_grid_graph,
    grid_graph,
    load_graph_json,
    load_panel_csv,
    write_graph_json,
    write_panel_csv,
)
from .dgp import DgpConfig, DgpOutput, RngStream, generate, oracle_ate
from .estimators import (
    VARIANT_AGGREGATED,
    VARIANT_SPATIOTEMPORAL,
    VARIANT_TEMPORAL,
    HierarchicalLinearDynamics,
    LmmFit,
    build_features,
    fit_lmm,
)
from .gbm import GbmHyperparams, GbmModel, GradientBoostedDynamics, fit_gbm, gbm_predict
from .gcomp import MODE_OBSERVED_LAG, MODE_PROPAGATE, AteEstimate, estimate_ate
from .collapse import CollapseReport, CollapseToyModel, default_toy_model, kl_curve
from .linalg import DesignMatrix, solve_least_squares

__all__ = [
    "AteEstimate", "CollapseReport", "CollapseToyModel", "DesignMatrix",
    "DgpConfig", "DgpOutput", "GbmHyperparams", "GbmModel",
    "GradientBoostedDynamics", "HierarchicalLinearDynamics", "LmmFit",
    "MODE_OBSERVED_LAG", "MODE_PROPAGATE", "PanelDataset", "RngStream",
    "SpatialGraph", "VARIANT_AGGREGATED", "VARIANT_SPATIOTEMPORAL",
    "VARIANT_TEMPORAL", "build_features", "default_grid_graph",
    "default_toy_model", "estimate_ate", "fit_gbm", "fit_lmm", "gbm_predict",
    "generate", "grid_graph", "kl_curve", "load_graph_json", "load_panel_csv",
    "oracle_ate", "solve_least_squares", "write_graph_json", "write_panel_csv",
]
