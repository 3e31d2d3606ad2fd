import Papa from "papaparse";

import { EmptyInput, HeaderMismatch } from "./errors.js";

export interface Table {
  headers: string[];
  rows: Record<string, string>[];
}

export function parseCsv(content: string, path: string): Table {
  const parsed = Papa.parse<Record<string, string>>(content.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const headers = parsed.meta.fields ?? [];
  if (parsed.data.length === 0) {
    throw new EmptyInput(path);
  }
  return { headers, rows: parsed.data };
}

export function requireHeaders(table: Table, expected: readonly string[]): void {
  const got = new Set(table.headers);
  if (!expected.every((h) => got.has(h))) {
    throw new HeaderMismatch(expected, table.headers);
  }
}

export function numericColumn(table: Table, name: string): number[] {
  return table.rows.map((row) => Number(row[name]));
}

export function distinctSorted(values: readonly number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

export function distinctInOrder(values: readonly string[]): string[] {
  return [...new Set(values)];
}
