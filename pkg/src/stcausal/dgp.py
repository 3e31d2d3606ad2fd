"""Synthetic hierarchical panel generator and its interventional oracle.

The base process, per time step t = 1..T:

  1. confounder   U_{i,0} ~ N(0,1); random-walk drift U_{i,t} = U_{i,t-1} +
                  delta * N(0,1) when delta > 0, else U_{i,t} = U_{i,0}
  2. treatment    A_{ij,t} ~ Bernoulli(sigmoid(gamma * U_{i,t} - 0.5))
  3. noise        eps_{ij,t} ~ N(0, noise_sd^2); when kappa > 0 the observed
                  noise is eps + kappa * (mean over neighbors k of eps_{kj,t}),
                  mixed after all raw draws of the step
  4. outcome      Y_{ij,t} = gamma * U_{i,t} + beta_a * A_{ij,t}
                  + beta_temp * ownlag_{i,t-1} + rho * nbrlag_{i,t-1} + noise

where ownlag is the within-unit subunit mean of Y at the previous step
(0 at t = 1) and nbrlag is the mean of neighbor units' subunit means (0 at
t = 1 or for isolated units). Lag conventions are the shared helpers from
``stcausal.data``, so fitted models see exactly the generator's features.

Draws for the confounder, its drift, treatments, and noise come from four
separate counter-based streams derived from the seed, so e.g. changing delta
never perturbs the treatment draws (common random numbers across variants).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import PanelDataset, SpatialGraph, default_grid_graph, subunit_means_at
from .errors import InvalidConfig

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """A reproducible, splittable random stream keyed by (seed, stream_id).

    Identical keys yield identical sequences across runs and platforms
    (counter-based Philox underneath); distinct stream_ids are independent.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v < _U64:
                raise InvalidConfig(name, "must be an integer in [0, 2^64)")

    def generator(self, *sub: int) -> np.random.Generator:
        """Generator for this stream, optionally a derived substream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *sub))
        return np.random.Generator(np.random.Philox(ss))


# substream indices under a DGP seed
_SUB_U0, _SUB_DRIFT, _SUB_TREAT, _SUB_NOISE = 0, 1, 2, 3


@dataclass(frozen=True)
class DgpConfig:
    """All knobs of the generating process, plus the seed and the graph."""

    gamma: float = 2.0
    rho: float = 1.5
    n_units: int = 16
    m_subunits: int = 50
    t_steps: int = 8
    beta_a: float = 5.0
    beta_temp: float = 0.5
    noise_sd: float = 2.0
    delta: float = 0.0
    kappa: float = 0.0
    seed: int = 0
    graph: Optional[SpatialGraph] = None

    def __post_init__(self):
        for name in ("n_units", "m_subunits", "t_steps"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise InvalidConfig(name, "must be an integer >= 1")
        for name in ("noise_sd", "delta", "kappa"):
            if getattr(self, name) < 0:
                raise InvalidConfig(name, "must be nonnegative")
        if not isinstance(self.seed, int) or not 0 <= self.seed < _U64:
            raise InvalidConfig("seed", "must be an integer in [0, 2^64)")
        if self.graph is not None and self.graph.n_units != self.n_units:
            raise InvalidConfig("graph", f"graph has {self.graph.n_units} units, "
                                         f"config has {self.n_units}")

    def resolved_graph(self) -> SpatialGraph:
        return self.graph if self.graph is not None else default_grid_graph(self.n_units)

    def to_json_dict(self) -> dict:
        out = {
            "n_units": self.n_units, "m_subunits": self.m_subunits,
            "t_steps": self.t_steps, "gamma": self.gamma, "rho": self.rho,
            "beta_a": self.beta_a, "beta_temp": self.beta_temp,
            "noise_sd": self.noise_sd, "delta": self.delta, "kappa": self.kappa,
            "seed": self.seed,
        }
        if self.graph is not None:
            out["graph"] = self.graph.to_json_dict()
        return out

    @staticmethod
    def from_json_dict(obj: dict) -> "DgpConfig":
        if not isinstance(obj, dict):
            raise InvalidConfig("config", "must be a JSON object")
        known_int = {"n_units", "m_subunits", "t_steps", "seed"}
        known_float = {"gamma", "rho", "beta_a", "beta_temp", "noise_sd",
                       "delta", "kappa"}
        kwargs = {}
        for key, value in obj.items():
            if key in known_int:
                if not isinstance(value, int) or isinstance(value, bool):
                    raise InvalidConfig(key, "must be an integer")
                kwargs[key] = value
            elif key in known_float:
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise InvalidConfig(key, "must be a number")
                kwargs[key] = float(value)
            elif key == "graph":
                kwargs[key] = SpatialGraph.from_edges(int(value["n_units"]),
                                                      value["edges"])
            else:
                raise InvalidConfig(key, "unknown field")
        return DgpConfig(**kwargs)


@dataclass(frozen=True)
class DgpOutput:
    """Generated panel plus the latent confounder trace (diagnostics only).

    ``latent_u[i, t]`` is the confounder consumed at step t; estimators never
    see it.
    """

    panel: PanelDataset
    latent_u: np.ndarray
    config: DgpConfig


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _draw_confounder(config: DgpConfig, seed_root: RngStream) -> np.ndarray:
    """(n_units, t_steps) confounder path; constant in t when delta = 0."""
    n, steps = config.n_units, config.t_steps
    u0 = seed_root.generator(_SUB_U0).standard_normal(n)
    u = np.empty((n, steps))
    if config.delta > 0:
        drift = seed_root.generator(_SUB_DRIFT)
        prev = u0
        for t in range(steps):
            prev = prev + config.delta * drift.standard_normal(n)
            u[:, t] = prev
    else:
        u[:] = u0[:, None]
    return u


def _roll_outcomes(config: DgpConfig, graph: SpatialGraph, u: np.ndarray,
                   a: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Sequentially apply the outcome equation given all draws."""
    n, m, steps = a.shape
    y = np.empty((n, m, steps))
    for t in range(steps):
        own_lag = subunit_means_at(y, t - 1) if t > 0 else np.zeros(n)
        nbr_lag = graph.neighbor_mean(own_lag) if t > 0 else np.zeros(n)
        y[:, :, t] = (config.gamma * u[:, t, None]
                      + config.beta_a * a[:, :, t]
                      + config.beta_temp * own_lag[:, None]
                      + config.rho * nbr_lag[:, None]
                      + eps[:, :, t])
    return y


def _mix_noise(config: DgpConfig, graph: SpatialGraph, eps: np.ndarray) -> np.ndarray:
    """Contemporaneous neighbor mixing of raw noise (the kappa variant)."""
    if config.kappa == 0:
        return eps
    mixed = eps.copy()
    for t in range(eps.shape[2]):
        for i, nbrs in enumerate(graph.neighbors):
            if nbrs:
                mixed[i, :, t] += config.kappa * eps[list(nbrs), :, t].mean(axis=0)
    return mixed


def generate(config: DgpConfig) -> DgpOutput:
    """Draw one panel from the process described in the module docstring."""
    graph = config.resolved_graph()
    n, m, steps = config.n_units, config.m_subunits, config.t_steps
    root = RngStream(config.seed)

    u = _draw_confounder(config, root)
    p_treat = _sigmoid(config.gamma * u - 0.5)                    # (n, steps)
    uniforms = root.generator(_SUB_TREAT).random((n, m, steps))
    a = (uniforms < p_treat[:, None, :]).astype(np.int8)
    eps = config.noise_sd * root.generator(_SUB_NOISE).standard_normal((n, m, steps))
    y = _roll_outcomes(config, graph, u, a, _mix_noise(config, graph, eps))

    u = u.copy()
    u.flags.writeable = False
    return DgpOutput(panel=PanelDataset(a, y), latent_u=u, config=config)


def _draw_confounder_path(config: DgpConfig, rng: np.random.Generator,
                          horizon: int) -> np.ndarray:
    u0 = rng.standard_normal(config.n_units)
    u = np.empty((config.n_units, horizon))
    if config.delta > 0:
        prev = u0
        for t in range(horizon):
            prev = prev + config.delta * rng.standard_normal(config.n_units)
            u[:, t] = prev
    else:
        u[:] = u0[:, None]
    return u


def _forced_rollout_mean(config: DgpConfig, graph: SpatialGraph, forced_a: int,
                         u: np.ndarray, nat_means: np.ndarray,
                         eps: np.ndarray, horizon: int) -> float:
    """Global mean outcome at the horizon with treatment forced everywhere.

    The forced trajectory propagates its own within-unit lag; the spillover
    input at each step is the natural companion trajectory's lagged neighbor
    mean, which is shared by both policy arms so the spatial channel carries
    no policy contrast (the estimand intervenes on each unit's own dynamics
    against factually-evolving neighbors).
    """
    n, m = config.n_units, config.m_subunits
    y = np.empty((n, m, horizon))
    for t in range(horizon):
        own_lag = subunit_means_at(y, t - 1) if t > 0 else np.zeros(n)
        nbr_lag = graph.neighbor_mean(nat_means[:, t - 1]) if t > 0 else np.zeros(n)
        y[:, :, t] = (config.gamma * u[:, t, None]
                      + config.beta_a * forced_a
                      + config.beta_temp * own_lag[:, None]
                      + config.rho * nbr_lag[:, None]
                      + eps[:, :, t])
    return float(y[:, :, horizon - 1].mean())


def oracle_ate(config: DgpConfig, horizon: int, n_rollouts: int,
               rng: RngStream) -> float:
    """Ground-truth policy contrast by direct simulation of the known process.

    Per rollout: draw a confounder path and a natural (unforced) companion
    trajectory, shared by both policy arms; then simulate the process once per
    arm with the treatment forced to 1 (resp. 0) for every unit, subunit, and
    step up to the horizon, with arm-specific fresh noise. Returns the
    difference of the two mean global outcomes at the horizon, averaged over
    rollouts. Sharing the confounder and the companion across arms is a pure
    variance-reduction coupling; each arm mean is unchanged in expectation.
    """
    if not 1 <= horizon <= config.t_steps:
        raise InvalidConfig("horizon", f"must be in [1, {config.t_steps}]")
    if n_rollouts < 1:
        raise InvalidConfig("n_rollouts", "must be >= 1")
    graph = config.resolved_graph()
    n, m = config.n_units, config.m_subunits
    mean1 = mean0 = 0.0
    for r in range(n_rollouts):
        g = rng.generator(r)
        u = _draw_confounder_path(config, g, horizon)
        p_treat = _sigmoid(config.gamma * u - 0.5)
        a_nat = (g.random((n, m, horizon)) < p_treat[:, None, :]).astype(np.int8)
        eps_nat = _mix_noise(config, graph,
                             config.noise_sd * g.standard_normal((n, m, horizon)))
        y_nat = _roll_outcomes(config, graph, u, a_nat, eps_nat)
        nat_means = np.stack([subunit_means_at(y_nat, t) for t in range(horizon)],
                             axis=1)
        for arm in (1, 0):
            eps = _mix_noise(config, graph,
                             config.noise_sd * g.standard_normal((n, m, horizon)))
            mean = _forced_rollout_mean(config, graph, arm, u, nat_means, eps,
                                        horizon)
            if arm == 1:
                mean1 += mean
            else:
                mean0 += mean
    return (mean1 - mean0) / n_rollouts
