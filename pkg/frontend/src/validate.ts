// Measurement-grid validation: every entry must parse as a decimal or be
// explicitly flagged failed before anything is sent to the service.

import type { MeasurementEntry } from "./types.js";

export interface GridRow {
  variant: string;
  text: string; // raw input field contents
  failed: boolean;
}

export interface ValidationResult {
  ok: boolean;
  entries: MeasurementEntry[];
  errors: Map<string, string>; // variant -> message
}

const DECIMAL = /^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/;

export function validateGrid(rows: GridRow[]): ValidationResult {
  const entries: MeasurementEntry[] = [];
  const errors = new Map<string, string>();
  for (const row of rows) {
    const text = row.text.trim();
    if (row.failed) {
      if (text) {
        errors.set(row.variant, "has a value but is marked failed");
        continue;
      }
      entries.push({ variant: row.variant, activity: null, failed: true });
      continue;
    }
    if (!text) {
      errors.set(row.variant, "enter a value or mark failed");
      continue;
    }
    if (!DECIMAL.test(text)) {
      errors.set(row.variant, `"${text}" is not a decimal`);
      continue;
    }
    entries.push({ variant: row.variant, activity: Number(text), failed: false });
  }
  return { ok: errors.size === 0, entries, errors };
}
