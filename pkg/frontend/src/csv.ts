/** Strict reading of the experiment runner's CSV artifacts.
 *
 * The producer writes plain comma-separated files with a fixed header
 * and round-trippable number formatting; unknown extra columns are
 * tolerated, missing required ones are a hard error that names them.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

import { EmptyInput, MissingColumns } from "./errors.js";

export type Row = Record<string, string>;

export const MONOTONE_COLUMNS = [
  "model",
  "n",
  "beta",
  "kind",
  "level",
  "r_level",
  "value",
  "d_surface",
  "d_bulk",
  "d_fd",
  "H",
  "grad_conf",
] as const;

export const TRACE_COLUMNS = [
  "model",
  "t",
  "rho",
  "area",
  "volume",
  "D",
] as const;

export function readCsv(
  file: string,
  required: readonly string[],
): Row[] {
  const text = readFileSync(file, "utf8");
  const parsed = Papa.parse<Row>(text, {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  const missing = required.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    throw new MissingColumns(file, missing);
  }
  if (parsed.data.length === 0) {
    throw new EmptyInput(file);
  }
  return parsed.data;
}

/** Parse a required numeric field; NaN propagates loudly. */
export function num(row: Row, column: string): number {
  const raw = row[column];
  const value = Number(raw);
  if (raw === undefined || raw === "" || Number.isNaN(value)) {
    throw new TypeError(`column ${column} holds no number: ${raw!}`);
  }
  return value;
}

/** Parse an optional numeric field; empty cells become null. */
export function numOrNull(row: Row, column: string): number | null {
  const raw = row[column];
  if (raw === undefined || raw === "") {
    return null;
  }
  return num(row, column);
}
