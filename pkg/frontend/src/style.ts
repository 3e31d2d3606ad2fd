/**
 * All styling lives here, pinned, so identical inputs always render
 * byte-identical SVG.
 */
export const STYLE = {
  width: 640,
  height: 420,
  margin: { top: 40, right: 24, bottom: 52, left: 64 },
  background: "#ffffff",
  fontFamily: "Helvetica, Arial, sans-serif",
  titleSize: 15,
  labelSize: 12,
  tickSize: 10,
  axisColor: "#222222",
  gridColor: "#dddddd",
  barFill: "#6699cc",
  barStroke: "#335577",
  markerColor: "#cc3333",
  bandOpacity: "0.18",
  lineWidth: 1.8,
  pointRadius: 2.6,
  histogramBins: 20,
  // fixed series order and palette; series beyond the palette cycle
  seriesColors: ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"],
  legendSwatch: 12,
} as const;

/** Deterministic, locale-free number label (trims trailing zeros). */
export function fmt(value: number): string {
  if (!isFinite(value)) return String(value);
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e6 || abs < 1e-4) return value.toExponential(2);
  const text = value.toFixed(6);
  return text.replace(/\.?0+$/, "");
}
