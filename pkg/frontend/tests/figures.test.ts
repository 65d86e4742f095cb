import { describe, expect, it } from "vitest";

import { EmptyInput } from "../src/errors.js";
import {
  flowFigure,
  fmtBeta,
  groupFlows,
  groupMonotone,
  groupScatter,
  marginBars,
  marginFigure,
  monotoneFigure,
  scatterFigure,
} from "../src/figures.js";
import { fmt, linearAxis, logAxis } from "../src/scene.js";
import { toPng } from "../src/raster.js";
import { toSvg } from "../src/svg.js";
import type { Row } from "../src/csv.js";

const PNG_SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

function monotoneRows(): Row[] {
  const header = [
    "model", "n", "beta", "kind", "level", "r_level", "value",
    "d_surface", "d_bulk", "d_fd", "H", "grad_conf",
  ];
  const data = [
    ["euclidean", "3", "1", "u", "0.01", "100.0", "4.0", "0.0", "", "1e-12", "0.02", "0.0001"],
    ["euclidean", "3", "1", "u", "0.1", "10.0", "4.0", "0.0", "", "1e-12", "0.2", "0.01"],
    ["euclidean", "3", "1", "u", "1", "1.0", "4.0", "0.0", "0.0", "1e-12", "2.0", "1.0"],
    ["cone_a0.5", "3", "1", "u", "0.01", "50.0", "2.0", "0.5", "0.5001", "0.5002", "0.04", "0.0004"],
    ["cone_a0.5", "3", "1", "u", "0.1", "5.0", "2.5", "0.6", "0.6001", "0.6002", "0.4", "0.04"],
    ["cone_a0.5", "3", "1", "u", "1", "0.5", "3.0", "0.7", "", "0.7002", "4.0", "4.0"],
    ["cone_a0.5", "4", "1", "u", "0.01", "20.0", "2.1", "0.5", "", "0.5", "0.06", "0.001"],
    ["cone_a0.5", "4", "1", "u", "0.1", "6.0", "2.6", "0.6", "", "0.6", "0.5", "0.1"],
    ["cone_a0.5", "4", "1", "u", "1", "0.6", "3.1", "0.7", "", "0.7", "5.0", "1.5"],
    ["cone_a0.5", "3", "3", "u", "0.01", "50.0", "8.0", "1.0", "1.0", "1.0", "0.04", "0.0004"],
    ["cone_a0.5", "3", "3", "u", "0.1", "5.0", "9.0", "1.1", "1.1", "1.1", "0.4", "0.04"],
    ["cone_a0.5", "3", "3", "u", "1", "0.5", "10.0", "1.2", "1.2", "1.2", "4.0", "4.0"],
    ["tanh", "3", "1", "psi", "-2", "0.135", "7.0", "-0.5", "-0.5", "-0.5", "1.5", "0.9"],
    ["tanh", "3", "1", "psi", "-1", "0.367", "6.0", "-0.4", "-0.4", "-0.4", "1.6", "0.95"],
    ["tanh", "3", "1", "psi", "0", "1.0", "5.0", "-0.3", "-0.3", "-0.3", "1.7", "1.0"],
  ];
  return data.map((cells) =>
    Object.fromEntries(header.map((name, i) => [name, cells[i] ?? ""])),
  );
}

function traceRows(): Row[] {
  const header = ["model", "t", "rho", "area", "volume", "D"];
  const data = [
    ["euclidean", "0", "1.0", "12.566", "4.188", "0.0"],
    ["euclidean", "0.1", "0.894", "10.053", "2.995", "0.0"],
    ["euclidean", "0.2", "0.774", "7.54", "1.947", "0.0"],
    ["cone_a0.5", "0", "1.0", "6.283", "2.094", "0.5"],
    ["cone_a0.5", "0.1", "0.894", "5.026", "1.497", "0.4"],
    ["cone_a0.5", "0.2", "0.774", "3.77", "0.973", "0.3"],
  ];
  return data.map((cells) =>
    Object.fromEntries(header.map((name, i) => [name, cells[i] ?? ""])),
  );
}

function checkEntries(): unknown[] {
  return [
    {
      suite: "willmore",
      check: "energy_floor",
      model: "euclidean",
      params: { n: 3 },
      status: "EQUALITY",
      max_violation: 0.0,
      tolerance: 1e-9,
      count: 1,
      detail: { energy: 12.566, threshold: 12.566, margin: 0.0 },
    },
    {
      suite: "willmore",
      check: "energy_floor",
      model: "tanh",
      params: { n: 3 },
      status: "PASS",
      max_violation: 0.0,
      tolerance: 1e-9,
      count: 1,
      detail: { energy: 13.0, threshold: 12.4, margin: 0.6 },
    },
    {
      suite: "monotone",
      check: "value_monotone",
      model: "euclidean",
      params: { n: 3 },
      status: "EQUALITY",
      max_violation: 0.0,
      tolerance: 1e-9,
      count: 64,
      detail: {},
    },
  ];
}

describe("number formatting", () => {
  it("keeps small magnitudes in plain notation", () => {
    expect(fmt(0)).toBe("0");
    expect(fmt(0.25)).toBe("0.25");
    expect(fmt(1)).toBe("1");
  });

  it("switches to trimmed exponential notation for extremes", () => {
    expect(fmt(12345)).toBe("1.23e4");
    expect(fmt(1e-5)).toBe("1e-5");
    expect(fmt(-2.5e6)).toBe("-2.5e6");
  });

  it("renders level-exponent labels compactly", () => {
    expect(fmtBeta(1)).toBe("1");
    expect(fmtBeta(0.5)).toBe("0.5");
    expect(fmtBeta(2 / 3)).toBe("0.666667");
    expect(fmtBeta(3)).toBe("3");
  });
});

describe("axes", () => {
  it("produces increasing linear ticks covering the span", () => {
    const axis = linearAxis(0, 10, 100, 600);
    expect(axis.ticks.length).toBeGreaterThanOrEqual(3);
    const values = axis.ticks.map((t) => t.value);
    for (let i = 1; i < values.length; i += 1) {
      expect(values[i]!).toBeGreaterThan(values[i - 1]!);
    }
    expect(axis.ticks.some((t) => t.label === "0")).toBe(true);
    expect(axis.map(0)).toBeCloseTo(100, 6);
    expect(axis.map(10)).toBeCloseTo(600, 6);
  });

  it("labels log ticks by decade", () => {
    const axis = logAxis(1e-4, 1, 100, 600);
    const labels = axis.ticks.map((t) => t.label);
    expect(labels).toContain("1");
    expect(labels).toContain("1e-4");
    expect(axis.map(1e-4)).toBeCloseTo(100, 6);
    expect(axis.map(1)).toBeCloseTo(600, 6);
  });

  it("rejects non-positive log spans", () => {
    expect(() => logAxis(0, 1, 0, 100)).toThrow(RangeError);
    expect(() => logAxis(-1, 1, 0, 100)).toThrow(RangeError);
    expect(() => logAxis(2, 2, 0, 100)).toThrow(RangeError);
  });
});

describe("level-curve figures", () => {
  it("groups rows by model and level exponent", () => {
    const groups = groupMonotone(monotoneRows());
    const keys = groups.map((g) => `${g.model}|${fmtBeta(g.beta)}`);
    expect(keys).toEqual([
      "cone_a0.5|1",
      "cone_a0.5|3",
      "euclidean|1",
      "tanh|1",
    ]);
    const twoCurves = groups.find((g) => g.model === "cone_a0.5" && g.beta === 1);
    expect(twoCurves).toBeDefined();
    expect([...twoCurves!.curves.keys()].sort()).toEqual([3, 4]);
  });

  it("draws one polyline per dimension with a legend", () => {
    const groups = groupMonotone(monotoneRows());
    const group = groups.find((g) => g.model === "cone_a0.5" && g.beta === 1)!;
    const svg = toSvg(monotoneFigure(group));
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg.match(/<polyline/g)!.length).toBeGreaterThanOrEqual(2);
    expect(svg).toContain("n=3");
    expect(svg).toContain("n=4");
    expect(svg).toContain("log scale");
  });

  it("uses a linear axis for parabolic log-level curves", () => {
    const groups = groupMonotone(monotoneRows());
    const psi = groups.find((g) => g.kind === "psi")!;
    const svg = toSvg(monotoneFigure(psi));
    expect(svg).toContain("log-level");
    expect(svg).not.toContain("log scale");
  });
});

describe("slope-agreement scatter", () => {
  it("drops models whose weighted slopes all vanish", () => {
    const groups = groupScatter(monotoneRows());
    const models = groups.map((g) => g.model);
    expect(models).toContain("cone_a0.5");
    expect(models).toContain("tanh");
    expect(models).not.toContain("euclidean");
  });

  it("plots both slope routes against the identity line", () => {
    const groups = groupScatter(monotoneRows());
    const svg = toSvg(scatterFigure(groups.find((g) => g.model === "cone_a0.5")!));
    expect(svg).toContain("<circle");
    expect(svg).toContain("stroke-dasharray");
    expect(svg).toContain("finite-difference route");
    expect(svg).toContain("volume-integral route");
  });
});

describe("flow figures", () => {
  it("builds one deficit curve per model", () => {
    const flows = groupFlows(traceRows());
    expect(flows.map((f) => f.model)).toEqual(["cone_a0.5", "euclidean"]);
    for (const flow of flows) {
      const svg = toSvg(flowFigure(flow));
      expect(svg).toContain("<polyline");
      expect(svg).toContain("isoperimetric deficit");
      expect(svg).toContain("stops at");
    }
  });
});

describe("energy-margin figure", () => {
  it("collects one bar per floor report, sorted by label", () => {
    const bars = marginBars("checks.json", checkEntries());
    expect(bars.map((b) => b.label)).toEqual(["euclidean n=3", "tanh n=3"]);
    expect(bars.map((b) => b.equality)).toEqual([true, false]);
    const svg = toSvg(marginFigure(bars));
    expect(svg.match(/<rect/g)!.length).toBeGreaterThanOrEqual(3);
    expect(svg).toContain("energy margin");
  });

  it("treats reports without floor entries as empty input", () => {
    expect(() => marginBars("checks.json", [])).toThrow(EmptyInput);
    expect(() => marginBars("checks.json", checkEntries().slice(2))).toThrow(EmptyInput);
    expect(() => marginBars("checks.json", { not: "a list" })).toThrow(EmptyInput);
  });
});

describe("raster backend", () => {
  it("encodes a scene to a well-formed PNG, deterministically", () => {
    const groups = groupMonotone(monotoneRows());
    const scene = monotoneFigure(groups[0]!);
    const first = toPng(scene);
    const second = toPng(scene);
    expect([...first.subarray(0, 8)]).toEqual(PNG_SIGNATURE);
    expect(first.equals(second)).toBe(true);
    expect(first.length).toBeGreaterThan(1000);
  });
});
