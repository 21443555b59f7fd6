import fs from "node:fs";

export interface WindowRow {
  t: number;
  added: number;
  executed: number;
}

export interface SummaryRow {
  algorithm: string;
  agents: number;
  frequency: string;
  seed: number;
  makespan: number;
  avgServiceTime: number;
  avgRuntimeMs: number;
}

export const WINDOW_HEADER = ["t", "added", "executed"];
export const SUMMARY_HEADER = [
  "algorithm",
  "agents",
  "frequency",
  "seed",
  "makespan",
  "avg_service_time",
  "avg_runtime_ms",
];

/** Schema violation in an input CSV; names the offending column. */
export class SchemaError extends Error {
  readonly column: string;

  constructor(source: string, column: string, detail: string) {
    super(`${source}: column '${column}': ${detail}`);
    this.column = column;
  }
}

function splitCsv(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

function checkHeader(source: string, got: string[], expected: string[]): void {
  for (let i = 0; i < expected.length; i++) {
    if (got[i] !== expected[i]) {
      throw new SchemaError(source, expected[i], `expected at position ${i + 1}, found '${got[i] ?? "<missing>"}'`);
    }
  }
  if (got.length > expected.length) {
    throw new SchemaError(source, got[expected.length], "unexpected extra column");
  }
}

function toInt(source: string, column: string, value: string): number {
  const n = Number(value);
  if (!Number.isInteger(n)) {
    throw new SchemaError(source, column, `'${value}' is not an integer`);
  }
  return n;
}

function toFloat(source: string, column: string, value: string): number {
  const n = Number(value);
  if (!Number.isFinite(n)) {
    throw new SchemaError(source, column, `'${value}' is not a number`);
  }
  return n;
}

export function parseWindowCsv(text: string, source = "window csv"): WindowRow[] {
  const rows = splitCsv(text);
  if (rows.length === 0) {
    throw new SchemaError(source, WINDOW_HEADER[0], "file is empty");
  }
  checkHeader(source, rows[0], WINDOW_HEADER);
  return rows.slice(1).map((cells) => ({
    t: toInt(source, "t", cells[0]),
    added: toInt(source, "added", cells[1]),
    executed: toInt(source, "executed", cells[2]),
  }));
}

export function parseSummaryCsv(text: string, source = "summary csv"): SummaryRow[] {
  const rows = splitCsv(text);
  if (rows.length === 0) {
    throw new SchemaError(source, SUMMARY_HEADER[0], "file is empty");
  }
  checkHeader(source, rows[0], SUMMARY_HEADER);
  return rows.slice(1).map((cells) => ({
    algorithm: cells[0],
    agents: toInt(source, "agents", cells[1]),
    frequency: cells[2],
    seed: toInt(source, "seed", cells[3]),
    makespan: toInt(source, "makespan", cells[4]),
    avgServiceTime: toFloat(source, "avg_service_time", cells[5]),
    avgRuntimeMs: toFloat(source, "avg_runtime_ms", cells[6]),
  }));
}

export function readWindowCsv(path: string): WindowRow[] {
  return parseWindowCsv(fs.readFileSync(path, "utf8"), path);
}

export function readSummaryCsv(path: string): SummaryRow[] {
  return parseSummaryCsv(fs.readFileSync(path, "utf8"), path);
}
