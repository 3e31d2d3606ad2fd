/**
 * SVG chart renderers: histogram with a reference marker, and (grouped)
 * lines with mean +- sd bands. Pure functions of their inputs plus the
 * pinned style table.
 */
import { linearScale, LinearScale } from "./scales.js";
import { STYLE, fmt } from "./style.js";
import { document, el, px, text } from "./svg.js";

export interface Labels {
  title: string;
  xLabel: string;
  yLabel: string;
}

export interface BandPoint {
  x: number;
  mean: number;
  sd: number;
}

export interface Series {
  name: string;
  points: BandPoint[];
}

interface Frame {
  x: LinearScale;
  y: LinearScale;
  parts: string[];
}

function plotArea(): { left: number; right: number; top: number; bottom: number } {
  const { width, height, margin } = STYLE;
  return {
    left: margin.left,
    right: width - margin.right,
    top: margin.top,
    bottom: height - margin.bottom,
  };
}

function frame(
  labels: Labels,
  xDomain: [number, number],
  yDomain: [number, number],
): Frame {
  const area = plotArea();
  const x = linearScale(xDomain, [area.left, area.right]);
  const y = linearScale(yDomain, [area.bottom, area.top]);
  const parts: string[] = [];
  parts.push(el("rect", {
    x: 0, y: 0, width: STYLE.width, height: STYLE.height,
    fill: STYLE.background,
  }));
  for (const tick of y.ticks) {
    parts.push(el("line", {
      x1: px(area.left), x2: px(area.right),
      y1: px(y(tick)), y2: px(y(tick)),
      stroke: STYLE.gridColor, "stroke-width": 1,
    }));
    parts.push(text(fmt(tick), {
      x: px(area.left - 8), y: px(y(tick) + 3.5),
      "text-anchor": "end", "font-family": STYLE.fontFamily,
      "font-size": STYLE.tickSize, fill: STYLE.axisColor,
    }));
  }
  for (const tick of x.ticks) {
    parts.push(el("line", {
      x1: px(x(tick)), x2: px(x(tick)),
      y1: px(area.bottom), y2: px(area.bottom + 5),
      stroke: STYLE.axisColor, "stroke-width": 1,
    }));
    parts.push(text(fmt(tick), {
      x: px(x(tick)), y: px(area.bottom + 18),
      "text-anchor": "middle", "font-family": STYLE.fontFamily,
      "font-size": STYLE.tickSize, fill: STYLE.axisColor,
    }));
  }
  parts.push(el("line", {
    x1: px(area.left), x2: px(area.right),
    y1: px(area.bottom), y2: px(area.bottom),
    stroke: STYLE.axisColor, "stroke-width": 1,
  }));
  parts.push(el("line", {
    x1: px(area.left), x2: px(area.left),
    y1: px(area.top), y2: px(area.bottom),
    stroke: STYLE.axisColor, "stroke-width": 1,
  }));
  parts.push(text(labels.title, {
    x: px(STYLE.width / 2), y: px(24),
    "text-anchor": "middle", "font-family": STYLE.fontFamily,
    "font-size": STYLE.titleSize, fill: STYLE.axisColor,
    "font-weight": "bold",
  }));
  parts.push(text(labels.xLabel, {
    x: px((area.left + area.right) / 2), y: px(STYLE.height - 14),
    "text-anchor": "middle", "font-family": STYLE.fontFamily,
    "font-size": STYLE.labelSize, fill: STYLE.axisColor,
  }));
  parts.push(text(labels.yLabel, {
    x: px(18), y: px((area.top + area.bottom) / 2),
    "text-anchor": "middle", "font-family": STYLE.fontFamily,
    "font-size": STYLE.labelSize, fill: STYLE.axisColor,
    transform: `rotate(-90 18 ${px((area.top + area.bottom) / 2)})`,
  }));
  return { x, y, parts };
}

/** Equal-width-bin histogram with an optional vertical reference marker. */
export function histogram(
  values: readonly number[],
  marker: number | null,
  labels: Labels,
): string {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (marker !== null) {
    lo = Math.min(lo, marker);
    hi = Math.max(hi, marker);
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const bins = STYLE.histogramBins;
  const width = (hi - lo) / bins;
  const counts = new Array<number>(bins).fill(0);
  for (const v of values) {
    const k = Math.min(bins - 1, Math.floor((v - lo) / width));
    counts[k] += 1;
  }
  const f = frame(labels, [lo, hi], [0, Math.max(...counts)]);
  const area = plotArea();
  counts.forEach((count, k) => {
    if (count === 0) return;
    const x0 = f.x(lo + k * width);
    const x1 = f.x(lo + (k + 1) * width);
    f.parts.push(el("rect", {
      x: px(x0), y: px(f.y(count)),
      width: px(x1 - x0), height: px(area.bottom - f.y(count)),
      fill: STYLE.barFill, stroke: STYLE.barStroke, "stroke-width": 1,
    }));
  });
  if (marker !== null) {
    f.parts.push(el("line", {
      x1: px(f.x(marker)), x2: px(f.x(marker)),
      y1: px(area.top), y2: px(area.bottom),
      stroke: STYLE.markerColor, "stroke-width": 2,
      "stroke-dasharray": "6 3",
    }));
    f.parts.push(text(`target ${fmt(marker)}`, {
      x: px(f.x(marker) + 5), y: px(area.top + 12),
      "font-family": STYLE.fontFamily, "font-size": STYLE.tickSize,
      fill: STYLE.markerColor,
    }));
  }
  return document(STYLE.width, STYLE.height, f.parts.join(""));
}

/** One or more series of mean +- sd points connected by lines. */
export function lines(series: readonly Series[], labels: Labels): string {
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const lows = series.flatMap((s) => s.points.map((p) => p.mean - p.sd));
  const highs = series.flatMap((s) => s.points.map((p) => p.mean + p.sd));
  const f = frame(labels,
    [Math.min(...xs), Math.max(...xs)],
    [Math.min(0, ...lows), Math.max(...highs)]);
  series.forEach((s, idx) => {
    const color = STYLE.seriesColors[idx % STYLE.seriesColors.length];
    const pts = [...s.points].sort((a, b) => a.x - b.x);
    if (pts.some((p) => p.sd > 0)) {
      const upper = pts.map((p) => `${px(f.x(p.x))},${px(f.y(p.mean + p.sd))}`);
      const lower = [...pts].reverse()
        .map((p) => `${px(f.x(p.x))},${px(f.y(p.mean - p.sd))}`);
      f.parts.push(el("polygon", {
        points: [...upper, ...lower].join(" "),
        fill: color, "fill-opacity": STYLE.bandOpacity, stroke: "none",
      }));
    }
    f.parts.push(el("polyline", {
      points: pts.map((p) => `${px(f.x(p.x))},${px(f.y(p.mean))}`).join(" "),
      fill: "none", stroke: color, "stroke-width": STYLE.lineWidth,
    }));
    for (const p of pts) {
      f.parts.push(el("circle", {
        cx: px(f.x(p.x)), cy: px(f.y(p.mean)), r: STYLE.pointRadius,
        fill: color,
      }));
    }
  });
  if (series.length > 1 || series[0].name !== "") {
    const area = plotArea();
    series.forEach((s, idx) => {
      const color = STYLE.seriesColors[idx % STYLE.seriesColors.length];
      const y = area.top + 10 + idx * 16;
      f.parts.push(el("rect", {
        x: px(area.right - 150), y: px(y - STYLE.legendSwatch + 3),
        width: STYLE.legendSwatch, height: STYLE.legendSwatch,
        fill: color,
      }));
      f.parts.push(text(s.name, {
        x: px(area.right - 150 + STYLE.legendSwatch + 6), y: px(y + 2),
        "font-family": STYLE.fontFamily, "font-size": STYLE.tickSize,
        fill: STYLE.axisColor,
      }));
    });
  }
  return document(STYLE.width, STYLE.height, f.parts.join(""));
}
