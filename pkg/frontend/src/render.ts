/** Figure rendering entry points.
 *
 * A FigureSpec names one input artifact, one figure kind, an output
 * directory, and a format; multi-group kinds write one file per group.
 * renderDirectory drives all kinds a run directory supports.  Inputs
 * are only ever read; outputs land in the output directory, which is
 * created on demand.
 */

import { existsSync, mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { MONOTONE_COLUMNS, readCsv, TRACE_COLUMNS } from "./csv.js";
import { EmptyInput, InputNotFound } from "./errors.js";
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
} from "./figures.js";
import { toPng } from "./raster.js";
import type { Scene } from "./scene.js";
import { toSvg } from "./svg.js";

export type FigureKind =
  | "monotone"
  | "derivative_scatter"
  | "flow"
  | "willmore_margin";

export type Format = "png" | "svg";

export interface FigureSpec {
  input: string;
  figureKind: FigureKind;
  outputDir: string;
  format: Format;
}

function write(spec: FigureSpec, name: string, scene: Scene): string {
  const path = join(spec.outputDir, `${name}.${spec.format}`);
  const payload = spec.format === "svg" ? toSvg(scene) : toPng(scene);
  writeFileSync(path, payload);
  return path;
}

/** Render one figure kind from one input file; returns the files written. */
export function renderFigure(spec: FigureSpec): string[] {
  mkdirSync(spec.outputDir, { recursive: true });
  switch (spec.figureKind) {
    case "monotone": {
      const rows = readCsv(spec.input, MONOTONE_COLUMNS);
      return groupMonotone(rows).map((group) =>
        write(
          spec,
          `monotone_${group.model}_beta${fmtBeta(group.beta)}`,
          monotoneFigure(group),
        ),
      );
    }
    case "derivative_scatter": {
      const rows = readCsv(spec.input, MONOTONE_COLUMNS);
      const groups = groupScatter(rows);
      if (groups.length === 0) {
        throw new EmptyInput(spec.input);
      }
      return groups.map((group) =>
        write(spec, `derivative_scatter_${group.model}`, scatterFigure(group)),
      );
    }
    case "flow": {
      const rows = readCsv(spec.input, TRACE_COLUMNS);
      return groupFlows(rows).map((group) =>
        write(spec, `flow_${group.model}`, flowFigure(group)),
      );
    }
    case "willmore_margin": {
      const parsed: unknown = JSON.parse(readFileSync(spec.input, "utf8"));
      const bars = marginBars(spec.input, parsed);
      return [write(spec, "willmore_margin", marginFigure(bars))];
    }
  }
}

/** Render every figure kind a run directory has inputs for. */
export function renderDirectory(
  inDir: string,
  outDir: string,
  format: Format,
): string[] {
  const plan: Array<[string, FigureKind[]]> = [
    [join(inDir, "monotone.csv"), ["monotone", "derivative_scatter"]],
    [join(inDir, "mcf_traces.csv"), ["flow"]],
    [join(inDir, "checks.json"), ["willmore_margin"]],
  ];
  const present = plan.filter(([input]) => existsSync(input));
  if (present.length === 0) {
    throw new InputNotFound(inDir);
  }
  const written: string[] = [];
  for (const [input, kinds] of present) {
    for (const figureKind of kinds) {
      written.push(
        ...renderFigure({ input, figureKind, outputDir: outDir, format }),
      );
    }
  }
  return written;
}
