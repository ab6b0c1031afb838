/**
 * Strict readers for the two CSV artifacts the simulator writes.
 *
 * The files are machine-generated with a pinned schema (no quoting, no
 * escapes), so parsing is a line split plus validation; anything that
 * does not match the schema is an error naming the offending column or
 * line rather than a silently skipped row.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export const SINR_COLUMNS = [
  "drop",
  "user_id",
  "kind",
  "scheme",
  "sinr_db",
] as const;

export const TRACKING_COLUMNS = [
  "time_s",
  "scheme",
  "normalized_gain",
  "true_az_deg",
  "true_el_deg",
  "est_az_deg",
  "est_el_deg",
  "trajectory_id",
] as const;

export interface SinrRow {
  drop: number;
  userId: number;
  kind: string;
  scheme: string;
  sinrDb: number;
}

export interface TrackingRow {
  timeS: number;
  scheme: string;
  normalizedGain: number;
  trueAzDeg: number;
  trueElDeg: number;
  estAzDeg: number;
  estElDeg: number;
  trajectoryId: number;
}

interface Table {
  index: Map<string, number>;
  lines: string[][];
}

function parseTable(text: string, required: readonly string[]): Table {
  const rows = text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
  const header = rows.shift();
  if (header === undefined) {
    throw new SchemaError("empty file: no header row");
  }
  for (const col of required) {
    if (!header.includes(col)) {
      throw new SchemaError(`missing column: ${col}`);
    }
  }
  const index = new Map(required.map((col) => [col, header.indexOf(col)]));
  return { index, lines: rows };
}

function numberAt(
  table: Table,
  row: string[],
  line: number,
  col: string,
): number {
  const cell = row[table.index.get(col)!];
  const value = cell === undefined || cell === "" ? NaN : Number(cell);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`line ${line}: column ${col} is not a number: ${cell}`);
  }
  return value;
}

function stringAt(
  table: Table,
  row: string[],
  line: number,
  col: string,
): string {
  const cell = row[table.index.get(col)!];
  if (cell === undefined || cell === "") {
    throw new SchemaError(`line ${line}: column ${col} is empty`);
  }
  return cell;
}

export function parseSinrCsv(text: string): SinrRow[] {
  const table = parseTable(text, SINR_COLUMNS);
  return table.lines.map((row, i) => ({
    drop: numberAt(table, row, i + 2, "drop"),
    userId: numberAt(table, row, i + 2, "user_id"),
    kind: stringAt(table, row, i + 2, "kind"),
    scheme: stringAt(table, row, i + 2, "scheme"),
    sinrDb: numberAt(table, row, i + 2, "sinr_db"),
  }));
}

export function parseTrackingCsv(text: string): TrackingRow[] {
  const table = parseTable(text, TRACKING_COLUMNS);
  return table.lines.map((row, i) => ({
    timeS: numberAt(table, row, i + 2, "time_s"),
    scheme: stringAt(table, row, i + 2, "scheme"),
    normalizedGain: numberAt(table, row, i + 2, "normalized_gain"),
    trueAzDeg: numberAt(table, row, i + 2, "true_az_deg"),
    trueElDeg: numberAt(table, row, i + 2, "true_el_deg"),
    estAzDeg: numberAt(table, row, i + 2, "est_az_deg"),
    estElDeg: numberAt(table, row, i + 2, "est_el_deg"),
    trajectoryId: numberAt(table, row, i + 2, "trajectory_id"),
  }));
}

export function readSinrCsv(path: string): SinrRow[] {
  return parseSinrCsv(readFileSync(path, "utf8"));
}

export function readTrackingCsv(path: string): TrackingRow[] {
  return parseTrackingCsv(readFileSync(path, "utf8"));
}
