// Spreadsheet paste support: lab instruments export tab-separated tables, so
// the measurement grid accepts a block of "variant<TAB>value" rows (or a
// single column of values aligned with the proposed batch).

export interface PastedRow {
  variant: string | null; // null when the row carries only a value
  value: string;
}

export function parseSpreadsheetPaste(text: string): PastedRow[] {
  const rows: PastedRow[] = [];
  for (const rawLine of text.replace(/\r\n?/g, "\n").split("\n")) {
    const line = rawLine.trimEnd();
    if (!line.trim()) continue;
    const cells = line.split("\t").map((c) => c.trim());
    if (cells.length === 1) {
      rows.push({ variant: null, value: cells[0] });
    } else {
      if (isHeaderRow(cells)) continue;
      rows.push({ variant: cells[0], value: cells[1] });
    }
  }
  return rows;
}

function isHeaderRow(cells: string[]): boolean {
  const first = cells[0].toLowerCase();
  return first === "mutant" || first === "variant";
}

export interface GridAssignment {
  values: Map<string, string>; // variant -> raw value text
  unmatched: string[]; // pasted variant names not in the batch
}

/** Map pasted rows onto the proposed batch.
 *
 * Rows naming a variant assign to that variant; value-only rows fill the
 * batch in display order. Variant names not in the batch are reported, not
 * silently dropped, since a typo here means a lost measurement.
 */
export function assignPasteToBatch(
  rows: PastedRow[],
  batch: string[],
): GridAssignment {
  const values = new Map<string, string>();
  const unmatched: string[] = [];
  const batchSet = new Set(batch);
  let cursor = 0;
  for (const row of rows) {
    if (row.variant === null) {
      if (cursor < batch.length) {
        values.set(batch[cursor], row.value);
        cursor += 1;
      }
    } else if (batchSet.has(row.variant)) {
      values.set(row.variant, row.value);
    } else {
      unmatched.push(row.variant);
    }
  }
  return { values, unmatched };
}
