import { mkdtempSync, readFileSync, readdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli.js";
import { EmptyInput, MissingColumns } from "../src/errors.js";
import { renderDirectory, renderFigure } from "../src/render.js";

const MONOTONE_HEADER =
  "model,n,beta,kind,level,r_level,value,d_surface,d_bulk,d_fd,H,grad_conf";

const MONOTONE_CSV = [
  MONOTONE_HEADER,
  "euclidean,3,1,u,0.01,100.0,4.0,0.0,,1e-12,0.02,0.0001",
  "euclidean,3,1,u,0.1,10.0,4.0,0.0,,1e-12,0.2,0.01",
  "euclidean,3,1,u,1,1.0,4.0,0.0,0.0,1e-12,2.0,1.0",
  "cone_a0.5,3,1,u,0.01,50.0,2.0,0.5,0.5001,0.5002,0.04,0.0004",
  "cone_a0.5,3,1,u,0.1,5.0,2.5,0.6,0.6001,0.6002,0.4,0.04",
  "cone_a0.5,3,1,u,1,0.5,3.0,0.7,,0.7002,4.0,4.0",
  "cone_a0.5,4,1,u,0.01,20.0,2.1,0.5,,0.5,0.06,0.001",
  "cone_a0.5,4,1,u,0.1,6.0,2.6,0.6,,0.6,0.5,0.1",
  "cone_a0.5,4,1,u,1,0.6,3.1,0.7,,0.7,5.0,1.5",
  "cone_a0.5,3,3,u,0.01,50.0,8.0,1.0,1.0,1.0,0.04,0.0004",
  "cone_a0.5,3,3,u,0.1,5.0,9.0,1.1,1.1,1.1,0.4,0.04",
  "cone_a0.5,3,3,u,1,0.5,10.0,1.2,1.2,1.2,4.0,4.0",
  "tanh,3,1,psi,-2,0.135,7.0,-0.5,-0.5,-0.5,1.5,0.9",
  "tanh,3,1,psi,-1,0.367,6.0,-0.4,-0.4,-0.4,1.6,0.95",
  "tanh,3,1,psi,0,1.0,5.0,-0.3,-0.3,-0.3,1.7,1.0",
].join("\n") + "\n";

const TRACES_CSV = [
  "model,t,rho,area,volume,D",
  "euclidean,0,1.0,12.566,4.188,0.0",
  "euclidean,0.1,0.894,10.053,2.995,0.0",
  "euclidean,0.2,0.774,7.54,1.947,0.0",
  "cone_a0.5,0,1.0,6.283,2.094,0.5",
  "cone_a0.5,0.1,0.894,5.026,1.497,0.4",
  "cone_a0.5,0.2,0.774,3.77,0.973,0.3",
].join("\n") + "\n";

const CHECKS_JSON = JSON.stringify([
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
]);

const ALL_FIGURES = [
  "derivative_scatter_cone_a0.5.svg",
  "derivative_scatter_tanh.svg",
  "flow_cone_a0.5.svg",
  "flow_euclidean.svg",
  "monotone_cone_a0.5_beta1.svg",
  "monotone_cone_a0.5_beta3.svg",
  "monotone_euclidean_beta1.svg",
  "monotone_tanh_beta1.svg",
  "willmore_margin.svg",
];

function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

function fullInputDir(): string {
  const dir = tempDir("figs-in-");
  writeFileSync(join(dir, "monotone.csv"), MONOTONE_CSV);
  writeFileSync(join(dir, "mcf_traces.csv"), TRACES_CSV);
  writeFileSync(join(dir, "checks.json"), CHECKS_JSON);
  return dir;
}

describe("figure rendering from files", () => {
  it("writes one level-curve figure per model and exponent", () => {
    const inDir = fullInputDir();
    const outDir = tempDir("figs-out-");
    const written = renderFigure({
      input: join(inDir, "monotone.csv"),
      figureKind: "monotone",
      outputDir: outDir,
      format: "svg",
    });
    expect(written.length).toBe(4);
    for (const path of written) {
      const body = readFileSync(path, "utf8");
      expect(body.length).toBeGreaterThan(500);
      expect(body.startsWith("<svg")).toBe(true);
    }
    expect(readdirSync(outDir).sort()).toEqual([
      "monotone_cone_a0.5_beta1.svg",
      "monotone_cone_a0.5_beta3.svg",
      "monotone_euclidean_beta1.svg",
      "monotone_tanh_beta1.svg",
    ]);
  });

  it("renders a whole directory of run outputs", () => {
    const inDir = fullInputDir();
    const outDir = tempDir("figs-out-");
    const written = renderDirectory(inDir, outDir, "svg");
    expect(written.length).toBe(ALL_FIGURES.length);
    expect(readdirSync(outDir).sort()).toEqual(ALL_FIGURES);
    for (const name of ALL_FIGURES) {
      expect(readFileSync(join(outDir, name), "utf8").length).toBeGreaterThan(500);
    }
  });

  it("re-renders identical inputs to identical bytes", () => {
    const inDir = fullInputDir();
    const first = tempDir("figs-out-");
    const second = tempDir("figs-out-");
    renderDirectory(inDir, first, "svg");
    renderDirectory(inDir, second, "svg");
    for (const name of readdirSync(first).sort()) {
      const a = readFileSync(join(first, name));
      const b = readFileSync(join(second, name));
      expect(a.equals(b), name).toBe(true);
    }
  });

  it("leaves its input files untouched", () => {
    const inDir = fullInputDir();
    const before = ["monotone.csv", "mcf_traces.csv", "checks.json"].map((name) =>
      readFileSync(join(inDir, name)),
    );
    renderDirectory(inDir, tempDir("figs-out-"), "svg");
    const after = ["monotone.csv", "mcf_traces.csv", "checks.json"].map((name) =>
      readFileSync(join(inDir, name)),
    );
    for (let i = 0; i < before.length; i += 1) {
      expect(before[i]!.equals(after[i]!)).toBe(true);
    }
  });

  it("writes PNG figures with a valid signature when asked", () => {
    const inDir = fullInputDir();
    const outDir = tempDir("figs-out-");
    const written = renderDirectory(inDir, outDir, "png");
    expect(written.length).toBe(ALL_FIGURES.length);
    for (const path of written) {
      expect(path.endsWith(".png")).toBe(true);
      const body = readFileSync(path);
      expect([...body.subarray(0, 8)]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
      expect(body.length).toBeGreaterThan(1000);
    }
  });

  it("refuses a header-only table as empty input", () => {
    const inDir = tempDir("figs-in-");
    writeFileSync(join(inDir, "monotone.csv"), MONOTONE_HEADER + "\n");
    expect(() =>
      renderFigure({
        input: join(inDir, "monotone.csv"),
        figureKind: "monotone",
        outputDir: tempDir("figs-out-"),
        format: "svg",
      }),
    ).toThrow(EmptyInput);
  });

  it("names every missing column before refusing to render", () => {
    const inDir = tempDir("figs-in-");
    writeFileSync(
      join(inDir, "monotone.csv"),
      "model,n,beta,kind,level,r_level,d_surface,d_bulk,H,grad_conf\n" +
        "euclidean,3,1,u,1,1.0,0.0,0.0,2.0,1.0\n",
    );
    let caught: unknown;
    try {
      renderFigure({
        input: join(inDir, "monotone.csv"),
        figureKind: "monotone",
        outputDir: tempDir("figs-out-"),
        format: "svg",
      });
    } catch (error) {
      caught = error;
    }
    expect(caught).toBeInstanceOf(MissingColumns);
    const message = (caught as Error).message;
    expect(message).toContain("value");
    expect(message).toContain("d_fd");
    expect(message).toContain("monotone.csv");
  });
});

describe("command line", () => {
  let logSpy: ReturnType<typeof vi.spyOn>;
  let errorSpy: ReturnType<typeof vi.spyOn>;

  beforeEach(() => {
    logSpy = vi.spyOn(console, "log").mockImplementation(() => {});
    errorSpy = vi.spyOn(console, "error").mockImplementation(() => {});
  });

  afterEach(() => {
    logSpy.mockRestore();
    errorSpy.mockRestore();
  });

  function stderrText(): string {
    return errorSpy.mock.calls.map((call) => call.join(" ")).join("\n");
  }

  it("renders a directory and reports the figure count", () => {
    const inDir = fullInputDir();
    const outDir = tempDir("figs-out-");
    expect(main(["render", "--in", inDir, "--out", outDir])).toBe(0);
    expect(readdirSync(outDir).sort()).toEqual(ALL_FIGURES);
    const logged = logSpy.mock.calls.map((call) => call.join(" ")).join("\n");
    expect(logged).toContain(`${ALL_FIGURES.length} figure(s)`);
  });

  it("accepts the invocation without the leading verb", () => {
    const inDir = fullInputDir();
    const outDir = tempDir("figs-out-");
    expect(main(["--in", inDir, "--out", outDir])).toBe(0);
    expect(readdirSync(outDir).length).toBe(ALL_FIGURES.length);
  });

  it("exits nonzero on an empty input table", () => {
    const inDir = tempDir("figs-in-");
    writeFileSync(join(inDir, "monotone.csv"), MONOTONE_HEADER + "\n");
    const outDir = tempDir("figs-out-");
    expect(main(["render", "--in", inDir, "--out", outDir])).toBe(1);
    expect(stderrText()).toContain("EmptyInput");
  });

  it("exits nonzero when no run outputs are present", () => {
    const inDir = tempDir("figs-in-");
    const outDir = tempDir("figs-out-");
    expect(main(["render", "--in", inDir, "--out", outDir])).toBe(1);
    expect(stderrText()).toContain(inDir);
  });

  it("rejects usage errors with exit code 2", () => {
    expect(main([])).toBe(2);
    expect(main(["render", "--in", "somewhere"])).toBe(2);
    expect(main(["render", "--in", "a", "--out", "b", "--format", "jpg"])).toBe(2);
    expect(main(["render", "extra", "--in", "a", "--out", "b"])).toBe(2);
    expect(main(["--bogus"])).toBe(2);
  });
});
