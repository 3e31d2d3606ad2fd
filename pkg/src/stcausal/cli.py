"""Command-line entry point: JSON configs in, CSV/JSON artifacts out.

Subcommands: generate, fit, ate, experiment, verify-collapse. Every run
writes a metadata.json echoing the resolved configuration, the command line,
and the code version, so any artifact can be regenerated exactly. Existing
files are never overwritten unless --force is given.

Exit codes: 0 success, 2 configuration error (message names the offending
field), 1 runtime failure. Invalid user input never produces a stack trace.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .collapse import CollapseToyModel, default_toy_model, kl_curve
from .data import load_graph_json, load_panel_csv, write_graph_json, write_panel_csv
from .dgp import DgpConfig, generate
from .errors import InvalidConfig, StcausalError
from .estimators import VARIANT_SPATIOTEMPORAL, VARIANTS, fit_lmm, load_fit_json
from .experiments import (
    run_consistency,
    run_grid,
    run_robustness,
    run_unbiasedness,
)
from .gcomp import MODES, estimate_ate

_EXPERIMENT_KINDS = ("unbiasedness", "consistency", "grid", "robustness")


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InvalidConfig("config", f"file not found: {path}")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig("config", f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InvalidConfig("config", "top level must be a JSON object")
    return obj


class _OutputDir:
    """Create-if-absent output directory that refuses silent overwrites."""

    def __init__(self, root: str, force: bool):
        self.root = Path(root)
        self.force = force
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        target = self.root / name
        if target.exists() and not self.force:
            raise StcausalError(f"refusing to overwrite {target} (use --force)")
        return target


def _write_metadata(out: _OutputDir, args, config: dict, extra: dict | None = None):
    record = {"command": args.command, "config": config,
              "argv": list(args.raw_argv), "code_version": __version__}
    if extra:
        record.update(extra)
    with open(out.path("metadata.json"), "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve_input(config_path: str, value: str) -> Path:
    """Paths inside a config file are taken relative to the config file."""
    p = Path(value)
    return p if p.is_absolute() else Path(config_path).parent / p


def _load_panel_and_graph(cfg: dict, config_path: str):
    if "panel_csv" not in cfg:
        raise InvalidConfig("panel_csv", "required")
    panel = load_panel_csv(_resolve_input(config_path, cfg["panel_csv"]))
    if "graph_json" in cfg:
        graph = load_graph_json(_resolve_input(config_path, cfg["graph_json"]))
    elif "graph" in cfg:
        from .data import SpatialGraph
        graph = SpatialGraph.from_edges(int(cfg["graph"]["n_units"]),
                                        cfg["graph"]["edges"])
    else:
        from .data import default_grid_graph
        graph = default_grid_graph(panel.n_units)
    return panel, graph


def _cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    config = DgpConfig.from_json_dict(cfg)
    out = _OutputDir(args.out, args.force)
    result = generate(config)
    write_panel_csv(result.panel, out.path("panel.csv"))
    with open(out.path("latent_u.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("unit_id,t,u\n")
        for i in range(config.n_units):
            for t in range(config.t_steps):
                fh.write(f"{i},{t},{float(result.latent_u[i, t])!r}\n")
    write_graph_json(config.resolved_graph(), out.path("graph.json"))
    _write_metadata(out, args, config.to_json_dict())
    if args.verbose:
        print(f"wrote panel.csv with {result.panel.treatments.size} cells",
              file=sys.stderr)
    return 0


def _cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    panel, graph = _load_panel_and_graph(cfg, args.config)
    variant = cfg.get("variant", VARIANT_SPATIOTEMPORAL)
    if variant not in VARIANTS:
        raise InvalidConfig("variant", f"must be one of {VARIANTS}")
    out = _OutputDir(args.out, args.force)
    fit = fit_lmm(panel, graph, variant)
    fit.write_json(out.path("fit.json"))
    _write_metadata(out, args, cfg)
    if args.verbose:
        print(f"fit {variant}: beta_a={fit.beta_a:.6f}", file=sys.stderr)
    return 0


def _cmd_ate(args) -> int:
    cfg = _load_config(args.config)
    panel, graph = _load_panel_and_graph(cfg, args.config)
    if "fit_json" not in cfg:
        raise InvalidConfig("fit_json", "required")
    fit = load_fit_json(_resolve_input(args.config, cfg["fit_json"]))
    mode = args.mode or cfg.get("mode", "observed-lag")
    if mode not in MODES:
        raise InvalidConfig("mode", f"must be one of {MODES}")
    horizon = cfg.get("horizon")
    if horizon is not None and (not isinstance(horizon, int) or horizon < 1):
        raise InvalidConfig("horizon", "must be a positive integer")
    out = _OutputDir(args.out, args.force)
    estimate = estimate_ate(fit, panel, graph, horizon=horizon, mode=mode)
    estimate.write_json(out.path("ate.json"))
    _write_metadata(out, args, cfg, {"mode": mode})
    if args.verbose:
        print(f"ate={estimate.ate:.6f} ({mode})", file=sys.stderr)
    return 0


def _cmd_experiment(args) -> int:
    cfg = _load_config(args.config)
    kind = cfg.get("kind")
    if kind not in _EXPERIMENT_KINDS:
        raise InvalidConfig("kind", f"must be one of {_EXPERIMENT_KINDS}")
    base_seed = cfg.get("base_seed", 0)
    if args.seed is not None:
        base_seed = args.seed
    if not isinstance(base_seed, int):
        raise InvalidConfig("base_seed", "must be an integer")
    dgp_obj = cfg.get("dgp", {})
    if not isinstance(dgp_obj, dict):
        raise InvalidConfig("dgp", "must be a JSON object")
    config = DgpConfig.from_json_dict(dgp_obj)
    mode = args.mode or cfg.get("mode", "observed-lag")
    if mode not in MODES:
        raise InvalidConfig("mode", f"must be one of {MODES}")

    if kind == "unbiasedness":
        table = run_unbiasedness(base_seed, cfg.get("n_trials", 100), config,
                                 mode, args.workers)
    elif kind == "consistency":
        table = run_consistency(base_seed, cfg.get("m_grid", [10, 25, 50, 100]),
                                cfg.get("n_trials_per_m", 50), config, mode,
                                args.workers)
    elif kind == "grid":
        table = run_grid(base_seed, cfg.get("gamma_grid", [0, 1, 2, 3, 4]),
                         cfg.get("rho_grid", [0, 0.5, 1.0, 1.5, 2.0]),
                         cfg.get("n_trials", 20), config, mode, args.workers)
    else:
        axis = cfg.get("axis", "delta")
        default_values = [0, 0.25, 0.5] if axis == "delta" else [0, 0.5, 1.0]
        table = run_robustness(base_seed, axis,
                               cfg.get("value_grid", default_values),
                               cfg.get("n_trials", 20), config, mode,
                               args.workers)
    out = _OutputDir(args.out, args.force)
    table.write_csv(out.path("results.csv"))
    table.write_metadata(out.path("experiment_metadata.json"))
    _write_metadata(out, args, cfg, {"n_rows": len(table.rows)})
    if args.verbose:
        print(f"{kind}: {len(table.rows)} rows", file=sys.stderr)
    return 0


def _parse_q_map(obj: dict) -> dict:
    q_map = {}
    for key, value in obj.items():
        parts = key.split(",")
        if len(parts) != 3:
            raise InvalidConfig("q_map", f"key {key!r} must be 'u,prev,nb'")
        q_map[tuple(int(x) for x in parts)] = float(value)
    return q_map


def _cmd_verify_collapse(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    defaults = default_toy_model()
    model = CollapseToyModel(
        n_units=cfg.get("n_units", defaults.n_units),
        t_steps=cfg.get("t_steps", defaults.t_steps),
        q_map=_parse_q_map(cfg["q_map"]) if "q_map" in cfg else defaults.q_map,
        readout=cfg.get("readout", defaults.readout),
        p_u=cfg.get("p_u", defaults.p_u))
    m_grid = cfg.get("m_grid", [2, 4, 8, 16])
    report = kl_curve(model, m_grid)
    out = _OutputDir(args.out, args.force)
    report.write_csv(out.path("kl.csv"))
    report.write_model_json(out.path("model.json"))
    _write_metadata(out, args, cfg, {"m_grid": list(report.m_grid)})
    if args.verbose:
        for m, kl in zip(report.m_grid, report.kl_values):
            print(f"m={m}: KL={kl:.3e} nats", file=sys.stderr)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "fit": _cmd_fit,
    "ate": _cmd_ate,
    "experiment": _cmd_experiment,
    "verify-collapse": _cmd_verify_collapse,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stcausal",
        description="hierarchical spatio-temporal panel toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        if name == "verify-collapse":
            p.add_argument("--config", default=None,
                           help="toy-model JSON (optional; defaults used)")
        else:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing output files")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--mode", choices=list(MODES), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code or 0)
    args.raw_argv = argv
    try:
        return _COMMANDS[args.command](args)
    except InvalidConfig as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except StcausalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
