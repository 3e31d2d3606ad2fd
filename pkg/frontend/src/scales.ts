/** Minimal linear scale with "nice" tick placement (powers of 10 times 1/2/5). */

export interface LinearScale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
  ticks: number[];
}

function niceStep(span: number, targetTicks: number): number {
  const raw = span / Math.max(1, targetTicks);
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  const candidates = [1, 2, 5, 10].map((m) => m * power);
  for (const c of candidates) {
    if (c >= raw) return c;
  }
  return candidates[candidates.length - 1];
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
  targetTicks = 6,
): LinearScale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    // degenerate domain: widen symmetrically so the value sits centered
    const pad = d0 === 0 ? 1 : Math.abs(d0) * 0.5;
    d0 -= pad;
    d1 += pad;
  }
  const step = niceStep(d1 - d0, targetTicks);
  const lo = Math.floor(d0 / step) * step;
  const hi = Math.ceil(d1 / step) * step;
  const [r0, r1] = range;
  const scale = ((value: number) =>
    r0 + ((value - lo) / (hi - lo)) * (r1 - r0)) as LinearScale;
  scale.domain = [lo, hi];
  scale.range = [r0, r1];
  const ticks: number[] = [];
  // walk by integer multiples to dodge accumulated float drift
  const first = Math.ceil(lo / step);
  const last = Math.floor(hi / step);
  for (let k = first; k <= last; k++) {
    const v = k * step;
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  scale.ticks = ticks;
  return scale;
}

export function extent(values: readonly number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}
