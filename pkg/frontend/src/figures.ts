/**
 * Figure assembly: map a CSV (experiment results or collapse curve) and a
 * figure kind onto one or more rendered SVGs.
 *
 * Kinds:
 *   histogram     estimate distribution with the target marked
 *   line          y vs x with mean +- sd band (consistency runs and the
 *                 collapse KL curve)
 *   grouped-line  one line per model over the varying sweep axis; a full
 *                 confounding x spillover grid fans out into one figure
 *                 per spillover value
 */
import {
  Table,
  distinctInOrder,
  distinctSorted,
  numericColumn,
  requireHeaders,
} from "./csv.js";
import { BandPoint, Series, histogram, lines } from "./charts.js";
import { HeaderMismatch } from "./errors.js";

export type FigureKind = "histogram" | "line" | "grouped-line";

export interface Figure {
  /** empty for single-figure renders; otherwise appended to the out name */
  suffix: string;
  svg: string;
}

const RESULTS_HEADERS = [
  "experiment_id", "gamma", "rho", "delta", "kappa", "m", "model", "mode",
  "trial", "seed", "ate_estimate", "target_ate", "abs_error",
] as const;

const COLLAPSE_HEADERS = ["m", "kl_nats"] as const;

const MODEL_ORDER = ["aggregated", "temporal", "spatio-temporal"];

function meanSd(values: readonly number[]): { mean: number; sd: number } {
  const mean = values.reduce((a, b) => a + b, 0) / values.length;
  const variance =
    values.reduce((a, b) => a + (b - mean) * (b - mean), 0) / values.length;
  return { mean, sd: Math.sqrt(variance) };
}

function bandPoints(
  rows: Record<string, string>[],
  xColumn: string,
  yColumn: string,
): BandPoint[] {
  const xs = distinctSorted(rows.map((r) => Number(r[xColumn])));
  return xs.map((x) => {
    const ys = rows
      .filter((r) => Number(r[xColumn]) === x)
      .map((r) => Number(r[yColumn]));
    const { mean, sd } = meanSd(ys);
    return { x, mean, sd };
  });
}

function modelSeries(
  rows: Record<string, string>[],
  xColumn: string,
): Series[] {
  const present = distinctInOrder(rows.map((r) => r.model));
  const ordered = [
    ...MODEL_ORDER.filter((m) => present.includes(m)),
    ...present.filter((m) => !MODEL_ORDER.includes(m)),
  ];
  return ordered.map((model) => ({
    name: model,
    points: bandPoints(rows.filter((r) => r.model === model), xColumn,
      "abs_error"),
  }));
}

function isCollapseTable(table: Table): boolean {
  return (
    table.headers.length === COLLAPSE_HEADERS.length &&
    COLLAPSE_HEADERS.every((h, i) => table.headers[i] === h)
  );
}

export function buildFigures(table: Table, kind: FigureKind): Figure[] {
  if (kind === "histogram") {
    requireHeaders(table, RESULTS_HEADERS);
    const estimates = numericColumn(table, "ate_estimate");
    const target = Number(table.rows[0].target_ate);
    return [{
      suffix: "",
      svg: histogram(estimates, target, {
        title: "Distribution of ATE estimates",
        xLabel: "ATE estimate",
        yLabel: "trials",
      }),
    }];
  }

  if (kind === "line") {
    if (isCollapseTable(table)) {
      const points = table.rows.map((r) => ({
        x: Number(r.m),
        mean: Number(r.kl_nats),
        sd: 0,
      }));
      return [{
        suffix: "",
        svg: lines([{ name: "", points }], {
          title: "Collapse error vs subunit count",
          xLabel: "subunits per unit (m)",
          yLabel: "KL divergence (nats)",
        }),
      }];
    }
    requireHeaders(table, RESULTS_HEADERS);
    const points = bandPoints(table.rows, "m", "abs_error");
    return [{
      suffix: "",
      svg: lines([{ name: "", points }], {
        title: "Estimation error vs subunit count",
        xLabel: "subunits per unit (m)",
        yLabel: "mean absolute error",
      }),
    }];
  }

  requireHeaders(table, RESULTS_HEADERS);
  const deltas = distinctSorted(numericColumn(table, "delta"));
  const kappas = distinctSorted(numericColumn(table, "kappa"));
  const gammas = distinctSorted(numericColumn(table, "gamma"));
  const rhos = distinctSorted(numericColumn(table, "rho"));

  if (deltas.length > 1 || kappas.length > 1) {
    const axis = deltas.length > 1 ? "delta" : "kappa";
    const axisLabel = axis === "delta"
      ? "confounder drift (delta)"
      : "noise cyclicity (kappa)";
    return [{
      suffix: "",
      svg: lines(modelSeries(table.rows, axis), {
        title: `Robustness to ${axisLabel}`,
        xLabel: axisLabel,
        yLabel: "mean absolute error",
      }),
    }];
  }

  if (gammas.length > 1 && rhos.length > 1) {
    // full grid: one figure per spillover strength
    return rhos.map((rho) => ({
      suffix: `-rho-${rho}`,
      svg: lines(
        modelSeries(table.rows.filter((r) => Number(r.rho) === rho), "gamma"),
        {
          title: `Error vs confounding (spillover ${rho})`,
          xLabel: "confounding strength (gamma)",
          yLabel: "mean absolute error",
        },
      ),
    }));
  }

  if (gammas.length > 1 || rhos.length > 1) {
    const axis = gammas.length > 1 ? "gamma" : "rho";
    const label = axis === "gamma"
      ? "confounding strength (gamma)"
      : "spillover strength (rho)";
    return [{
      suffix: "",
      svg: lines(modelSeries(table.rows, axis), {
        title: `Error vs ${label}`,
        xLabel: label,
        yLabel: "mean absolute error",
      }),
    }];
  }

  throw new HeaderMismatch(
    ["a sweep axis with >1 distinct value (gamma/rho/delta/kappa)"],
    table.headers,
  );
}
