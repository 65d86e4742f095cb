/** Backend-independent figure description.
 *
 * Figure builders emit a Scene — a flat list of primitives in pixel
 * coordinates — which either backend (vector or raster) serializes
 * without further layout decisions, so both formats encode the same
 * picture and re-rendering is deterministic by construction.
 */

export interface RectItem {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  fill: string;
}

export interface LineItem {
  kind: "line";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  stroke: string;
  width: number;
  dash?: readonly number[];
}

export interface PolylineItem {
  kind: "polyline";
  points: ReadonlyArray<readonly [number, number]>;
  stroke: string;
  width: number;
  dash?: readonly number[];
}

export interface CircleItem {
  kind: "circle";
  cx: number;
  cy: number;
  r: number;
  fill: string;
}

export interface TextItem {
  kind: "text";
  x: number;
  y: number;
  s: string;
  size: number;
  anchor: "start" | "middle" | "end";
  color: string;
  rotate?: -90;
}

export type Primitive = RectItem | LineItem | PolylineItem | CircleItem | TextItem;

export interface Scene {
  width: number;
  height: number;
  background: string;
  items: Primitive[];
}

export const PALETTE = [
  "#1f6fb4",
  "#d95f02",
  "#2c9e4b",
  "#7a52c7",
  "#c02f6a",
  "#6a6a6a",
] as const;

export const AXIS_COLOR = "#404040";
export const GRID_COLOR = "#d9d9d9";
export const TEXT_COLOR = "#202020";

export interface Axis {
  /** data value -> pixel coordinate */
  map(value: number): number;
  ticks: ReadonlyArray<{ value: number; label: string }>;
}

/** Round-trip-stable tick label: plain notation near 1, exponent
 * notation far from it. */
export function fmt(value: number): string {
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) {
    return value
      .toExponential(2)
      .replace(/\.?0+e/, "e")
      .replace("e+", "e");
  }
  return String(Number(value.toPrecision(6)));
}

export function linearAxis(
  lo: number,
  hi: number,
  pixelLo: number,
  pixelHi: number,
  tickTarget = 5,
): Axis {
  if (!(hi > lo)) {
    const pad = Math.max(Math.abs(lo) * 1e-9, 1e-12);
    lo -= pad;
    hi += pad;
  }
  const span = hi - lo;
  const rawStep = span / tickTarget;
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 5, 10].map((m) => m * power);
  const step = candidates.find((c) => span / c <= tickTarget + 0.5) ?? candidates[3]!;
  const first = Math.ceil(lo / step) * step;
  const ticks: Array<{ value: number; label: string }> = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    const snapped = Math.abs(v) < step * 1e-9 ? 0 : v;
    ticks.push({ value: snapped, label: fmt(snapped) });
  }
  const scale = (pixelHi - pixelLo) / (hi - lo);
  return {
    map: (value: number) => pixelLo + (value - lo) * scale,
    ticks,
  };
}

export function logAxis(
  lo: number,
  hi: number,
  pixelLo: number,
  pixelHi: number,
): Axis {
  if (!(lo > 0 && hi > lo)) {
    throw new RangeError(`log axis needs 0 < lo < hi, got [${lo}, ${hi}]`);
  }
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const ticks: Array<{ value: number; label: string }> = [];
  const stride = Math.max(1, Math.ceil((lhi - llo) / 8));
  for (let e = Math.ceil(llo - 1e-9); e <= lhi + 1e-9; e += stride) {
    const value = Math.pow(10, e);
    ticks.push({ value, label: e === 0 ? "1" : `1e${e}` });
  }
  const scale = (pixelHi - pixelLo) / (lhi - llo);
  return {
    map: (value: number) => pixelLo + (Math.log10(value) - llo) * scale,
    ticks,
  };
}

export interface ChartFrame {
  scene: Scene;
  x: Axis;
  y: Axis;
  plot: { left: number; right: number; top: number; bottom: number };
}

export interface ChartOptions {
  width?: number;
  height?: number;
  title: string;
  xLabel: string;
  yLabel: string;
  xAxis: (pixelLo: number, pixelHi: number) => Axis;
  yAxis: (pixelLo: number, pixelHi: number) => Axis;
  /** extra pixels under the plot, for rotated category labels */
  bottomPad?: number;
}

/** Build the shared chart chrome: background, grid, axes, ticks, labels. */
export function chartFrame(options: ChartOptions): ChartFrame {
  const width = options.width ?? 880;
  const height = options.height ?? 560;
  const left = 86;
  const right = width - 24;
  const top = 54;
  const bottom = height - 58 - (options.bottomPad ?? 0);
  const scene: Scene = { width, height, background: "#ffffff", items: [] };
  const x = options.xAxis(left, right);
  const y = options.yAxis(bottom, top);
  for (const tick of x.ticks) {
    const px = x.map(tick.value);
    scene.items.push({
      kind: "line", x1: px, y1: top, x2: px, y2: bottom,
      stroke: GRID_COLOR, width: 1,
    });
    scene.items.push({
      kind: "line", x1: px, y1: bottom, x2: px, y2: bottom + 5,
      stroke: AXIS_COLOR, width: 1,
    });
    scene.items.push({
      kind: "text", x: px, y: bottom + 20, s: tick.label,
      size: 11, anchor: "middle", color: TEXT_COLOR,
    });
  }
  for (const tick of y.ticks) {
    const py = y.map(tick.value);
    scene.items.push({
      kind: "line", x1: left, y1: py, x2: right, y2: py,
      stroke: GRID_COLOR, width: 1,
    });
    scene.items.push({
      kind: "line", x1: left - 5, y1: py, x2: left, y2: py,
      stroke: AXIS_COLOR, width: 1,
    });
    scene.items.push({
      kind: "text", x: left - 9, y: py + 4, s: tick.label,
      size: 11, anchor: "end", color: TEXT_COLOR,
    });
  }
  scene.items.push(
    { kind: "line", x1: left, y1: top, x2: left, y2: bottom, stroke: AXIS_COLOR, width: 1.5 },
    { kind: "line", x1: left, y1: bottom, x2: right, y2: bottom, stroke: AXIS_COLOR, width: 1.5 },
    { kind: "text", x: (left + right) / 2, y: 26, s: options.title, size: 14, anchor: "middle", color: TEXT_COLOR },
    { kind: "text", x: (left + right) / 2, y: height - 16, s: options.xLabel, size: 12, anchor: "middle", color: TEXT_COLOR },
    { kind: "text", x: 22, y: (top + bottom) / 2, s: options.yLabel, size: 12, anchor: "middle", color: TEXT_COLOR, rotate: -90 },
  );
  return { scene, x, y, plot: { left, right, top, bottom } };
}

export function legend(
  frame: ChartFrame,
  entries: ReadonlyArray<{ label: string; color: string }>,
): void {
  const x0 = frame.plot.left + 14;
  let yRow = frame.plot.top + 16;
  for (const entry of entries) {
    frame.scene.items.push(
      { kind: "line", x1: x0, y1: yRow - 4, x2: x0 + 22, y2: yRow - 4, stroke: entry.color, width: 2.5 },
      { kind: "text", x: x0 + 28, y: yRow, s: entry.label, size: 11, anchor: "start", color: TEXT_COLOR },
    );
    yRow += 17;
  }
}
