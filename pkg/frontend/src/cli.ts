#!/usr/bin/env node
/** Command line: render a run directory's artifacts into figures.
 *
 *   capmono-render render --in DIR --out DIR [--format svg|png]
 *
 * (the leading "render" word is optional).  Exit codes: 0 on success,
 * 1 on input errors (empty inputs, missing columns, nothing to
 * render), 2 on usage errors.
 */

import { parseArgs } from "node:util";

import { RenderError } from "./errors.js";
import { renderDirectory, type Format } from "./render.js";

const USAGE =
  "usage: capmono-render [render] --in DIR --out DIR [--format svg|png]";

export function main(argv: string[]): number {
  let values: { in?: string; out?: string; format?: string };
  let positionals: string[];
  try {
    ({ values, positionals } = parseArgs({
      args: argv,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        format: { type: "string", default: "svg" },
      },
      allowPositionals: true,
    }));
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error));
    console.error(USAGE);
    return 2;
  }
  if (positionals[0] === "render") {
    positionals = positionals.slice(1);
  }
  if (positionals.length > 0) {
    console.error(`unexpected argument: ${positionals[0]!}`);
    console.error(USAGE);
    return 2;
  }
  const { in: inDir, out: outDir, format } = values;
  if (!inDir || !outDir) {
    console.error("both --in and --out are required");
    console.error(USAGE);
    return 2;
  }
  if (format !== "svg" && format !== "png") {
    console.error(`unknown format ${format!}; choose svg or png`);
    console.error(USAGE);
    return 2;
  }
  try {
    const written = renderDirectory(inDir, outDir, format as Format);
    console.log(`wrote ${written.length} figure(s) to ${outDir}`);
    return 0;
  } catch (error) {
    if (error instanceof RenderError) {
      console.error(error.message);
      return 1;
    }
    if (
      error instanceof Error &&
      (error as NodeJS.ErrnoException).code === "ENOENT"
    ) {
      console.error(`input not readable: ${error.message}`);
      return 1;
    }
    throw error;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
