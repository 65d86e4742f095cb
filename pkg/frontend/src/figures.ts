/** Figure builders: experiment rows in, Scene out.
 *
 * Grouping mirrors the producer's data model: level-functional curves
 * come one figure per (model, exponent) with one curve per dimension;
 * slope agreement and flow deficit come one figure per model; the
 * energy-margin overview is a single bar chart.
 */

import { num, numOrNull, type Row } from "./csv.js";
import { EmptyInput } from "./errors.js";
import {
  AXIS_COLOR,
  chartFrame,
  fmt,
  legend,
  linearAxis,
  logAxis,
  PALETTE,
  type Scene,
  TEXT_COLOR,
} from "./scene.js";

export function fmtBeta(beta: number): string {
  return String(Number(beta.toPrecision(6)));
}

function spanOf(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  return [lo, hi];
}

function padded(lo: number, hi: number): [number, number] {
  const pad = Math.max((hi - lo) * 0.05, Math.abs(hi) * 1e-9, 1e-12);
  return [lo - pad, hi + pad];
}

// ---------------------------------------------------------------------------
// level-functional curves

export interface MonotoneGroup {
  model: string;
  beta: number;
  kind: "u" | "psi";
  /** dimension -> points sorted by level */
  curves: Map<number, Array<{ level: number; value: number }>>;
}

export function groupMonotone(rows: Row[]): MonotoneGroup[] {
  const groups = new Map<string, MonotoneGroup>();
  for (const row of rows) {
    const beta = num(row, "beta");
    const key = `${row.model}|${fmtBeta(beta)}`;
    let group = groups.get(key);
    if (!group) {
      group = {
        model: row.model ?? "",
        beta,
        kind: row.kind === "psi" ? "psi" : "u",
        curves: new Map(),
      };
      groups.set(key, group);
    }
    const n = num(row, "n");
    let curve = group.curves.get(n);
    if (!curve) {
      curve = [];
      group.curves.set(n, curve);
    }
    curve.push({ level: num(row, "level"), value: num(row, "value") });
  }
  const out = [...groups.values()];
  for (const group of out) {
    for (const curve of group.curves.values()) {
      curve.sort((a, b) => a.level - b.level);
    }
  }
  out.sort((a, b) =>
    a.model === b.model ? a.beta - b.beta : a.model < b.model ? -1 : 1,
  );
  return out;
}

export function monotoneFigure(group: MonotoneGroup): Scene {
  const dims = [...group.curves.keys()].sort((a, b) => a - b);
  const allValues = dims.flatMap((n) => group.curves.get(n)!.map((p) => p.value));
  const allLevels = dims.flatMap((n) => group.curves.get(n)!.map((p) => p.level));
  const [vLo, vHi] = padded(...spanOf(allValues));
  const [lLo, lHi] = spanOf(allLevels);
  const isLog = group.kind === "u";
  const frame = chartFrame({
    title: `${group.model}  beta=${fmtBeta(group.beta)}`,
    xLabel: isLog ? "level (log scale)" : "log-level",
    yLabel:
      group.kind === "u" ? "level functional" : "parabolic level functional",
    xAxis: (a, b) =>
      isLog ? logAxis(lLo, lHi, a, b) : linearAxis(lLo, lHi, a, b),
    yAxis: (a, b) => linearAxis(vLo, vHi, a, b),
  });
  dims.forEach((n, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    const points = group.curves
      .get(n)!
      .map((p) => [frame.x.map(p.level), frame.y.map(p.value)] as const);
    frame.scene.items.push({
      kind: "polyline",
      points,
      stroke: color,
      width: 2,
    });
  });
  legend(
    frame,
    dims.map((n, i) => ({ label: `n=${n}`, color: PALETTE[i % PALETTE.length]! })),
  );
  return frame.scene;
}

// ---------------------------------------------------------------------------
// slope agreement scatter

export interface ScatterGroup {
  model: string;
  /** [surface magnitude, other magnitude, which comparison] */
  points: Array<{ x: number; y: number; route: "fd" | "bulk" }>;
}

export function groupScatter(rows: Row[]): ScatterGroup[] {
  const groups = new Map<string, ScatterGroup>();
  for (const row of rows) {
    let group = groups.get(row.model ?? "");
    if (!group) {
      group = { model: row.model ?? "", points: [] };
      groups.set(group.model, group);
    }
    const weight = row.kind === "u" ? num(row, "level") : 1.0;
    const surface = Math.abs(weight * num(row, "d_surface"));
    if (surface <= 0) {
      continue;
    }
    const fd = Math.abs(weight * num(row, "d_fd"));
    if (fd > 0) {
      group.points.push({ x: surface, y: fd, route: "fd" });
    }
    const bulk = numOrNull(row, "d_bulk");
    if (bulk !== null && Math.abs(weight * bulk) > 0) {
      group.points.push({ x: surface, y: Math.abs(weight * bulk), route: "bulk" });
    }
  }
  const out = [...groups.values()].filter((g) => g.points.length > 0);
  out.sort((a, b) => (a.model < b.model ? -1 : a.model > b.model ? 1 : 0));
  return out;
}

export function scatterFigure(group: ScatterGroup): Scene {
  const xs = group.points.map((p) => p.x);
  const ys = group.points.map((p) => p.y);
  const [lo, hi] = spanOf([...xs, ...ys]);
  const domainLo = lo / 2;
  const domainHi = hi * 2;
  const frame = chartFrame({
    title: `${group.model}  slope agreement`,
    xLabel: "surface-route slope magnitude",
    yLabel: "other-route slope magnitude",
    xAxis: (a, b) => logAxis(domainLo, domainHi, a, b),
    yAxis: (a, b) => logAxis(domainLo, domainHi, a, b),
  });
  frame.scene.items.push({
    kind: "line",
    x1: frame.x.map(domainLo),
    y1: frame.y.map(domainLo),
    x2: frame.x.map(domainHi),
    y2: frame.y.map(domainHi),
    stroke: AXIS_COLOR,
    width: 1,
    dash: [5, 4],
  });
  const colors = { fd: PALETTE[0]!, bulk: PALETTE[1]! } as const;
  for (const point of group.points) {
    frame.scene.items.push({
      kind: "circle",
      cx: frame.x.map(point.x),
      cy: frame.y.map(point.y),
      r: 2.4,
      fill: colors[point.route],
    });
  }
  legend(frame, [
    { label: "finite-difference route", color: colors.fd },
    { label: "volume-integral route", color: colors.bulk },
  ]);
  return frame.scene;
}

// ---------------------------------------------------------------------------
// flow deficit traces

export interface FlowGroup {
  model: string;
  points: Array<{ t: number; deficit: number }>;
}

export function groupFlows(rows: Row[]): FlowGroup[] {
  const groups = new Map<string, FlowGroup>();
  for (const row of rows) {
    let group = groups.get(row.model ?? "");
    if (!group) {
      group = { model: row.model ?? "", points: [] };
      groups.set(group.model, group);
    }
    group.points.push({ t: num(row, "t"), deficit: num(row, "D") });
  }
  const out = [...groups.values()];
  for (const group of out) {
    group.points.sort((a, b) => a.t - b.t);
  }
  out.sort((a, b) => (a.model < b.model ? -1 : a.model > b.model ? 1 : 0));
  return out;
}

export function flowFigure(group: FlowGroup): Scene {
  const [dLo, dHi] = spanOf(group.points.map((p) => p.deficit));
  const [lo, hi] = padded(Math.min(dLo, 0), Math.max(dHi, 0));
  const tHi = group.points[group.points.length - 1]!.t;
  const frame = chartFrame({
    title: `${group.model}  flow deficit`,
    xLabel: "time",
    yLabel: "isoperimetric deficit",
    xAxis: (a, b) => linearAxis(0, tHi * 1.02, a, b),
    yAxis: (a, b) => linearAxis(lo, hi, a, b),
  });
  frame.scene.items.push({
    kind: "line",
    x1: frame.plot.left,
    y1: frame.y.map(0),
    x2: frame.plot.right,
    y2: frame.y.map(0),
    stroke: AXIS_COLOR,
    width: 1,
    dash: [5, 4],
  });
  frame.scene.items.push({
    kind: "polyline",
    points: group.points.map(
      (p) => [frame.x.map(p.t), frame.y.map(p.deficit)] as const,
    ),
    stroke: PALETTE[0]!,
    width: 2,
  });
  frame.scene.items.push({
    kind: "text",
    x: frame.x.map(tHi),
    y: frame.y.map(0) - 8,
    s: `stops at ${fmt(tHi)}`,
    size: 11,
    anchor: "end",
    color: TEXT_COLOR,
  });
  return frame.scene;
}

// ---------------------------------------------------------------------------
// energy margin overview

export interface MarginBar {
  label: string;
  margin: number;
  equality: boolean;
}

interface CheckRecord {
  suite?: string;
  check?: string;
  model?: string;
  status?: string;
  params?: { n?: number };
  detail?: { margin?: number };
}

export function marginBars(file: string, checks: unknown): MarginBar[] {
  if (!Array.isArray(checks)) {
    throw new EmptyInput(file);
  }
  const bars: MarginBar[] = [];
  for (const entry of checks as CheckRecord[]) {
    if (entry.suite !== "willmore" || entry.check !== "energy_floor") {
      continue;
    }
    const margin = entry.detail?.margin;
    if (typeof margin !== "number") {
      continue;
    }
    const n = entry.params?.n;
    bars.push({
      label: `${entry.model ?? ""}${n ? ` n=${n}` : ""}`,
      margin,
      equality: entry.status === "EQUALITY",
    });
  }
  if (bars.length === 0) {
    throw new EmptyInput(file);
  }
  bars.sort((a, b) => (a.label < b.label ? -1 : a.label > b.label ? 1 : 0));
  return bars;
}

export function marginFigure(bars: MarginBar[]): Scene {
  const hi = Math.max(...bars.map((b) => b.margin), 0);
  const frame = chartFrame({
    width: Math.max(880, 60 + bars.length * 34),
    title: "bending energy margin over the sharp floor",
    xLabel: "",
    yLabel: "energy margin",
    bottomPad: 120,
    xAxis: (a, b) => linearAxis(0, bars.length, a, b, 1),
    yAxis: (a, b) => linearAxis(0, hi > 0 ? hi * 1.08 : 1, a, b),
  });
  // category axis: suppress the numeric ticks the frame drew
  frame.scene.items = frame.scene.items.filter(
    (item) =>
      !(item.kind === "text" && item.y === frame.plot.bottom + 20) &&
      !(item.kind === "line" && item.y1 === frame.plot.top && item.x1 === item.x2),
  );
  const zero = frame.y.map(0);
  bars.forEach((bar, i) => {
    const xc = frame.x.map(i + 0.5);
    const w = Math.max(10, (frame.x.map(1) - frame.x.map(0)) * 0.6);
    const top = frame.y.map(bar.margin);
    frame.scene.items.push({
      kind: "rect",
      x: xc - w / 2,
      y: Math.min(top, zero),
      w,
      h: Math.max(Math.abs(zero - top), 1.5),
      fill: bar.equality ? "#9aa0a6" : PALETTE[0]!,
    });
    frame.scene.items.push({
      kind: "text",
      x: xc + 4,
      y: frame.plot.bottom + 10,
      s: bar.label,
      size: 10,
      anchor: "end",
      color: TEXT_COLOR,
      rotate: -90,
    });
  });
  return frame.scene;
}
