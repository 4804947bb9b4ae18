import { describe, expect, it } from "vitest";

import { assignPasteToBatch, parseSpreadsheetPaste } from "../src/paste.js";

describe("parseSpreadsheetPaste", () => {
  it("splits two-column tab-separated rows", () => {
    const rows = parseSpreadsheetPaste("A23T\t1.5\nG56S\t-0.25\n");
    expect(rows).toEqual([
      { variant: "A23T", value: "1.5" },
      { variant: "G56S", value: "-0.25" },
    ]);
  });

  it("accepts a bare value column", () => {
    const rows = parseSpreadsheetPaste("1.5\n2.5\n");
    expect(rows).toEqual([
      { variant: null, value: "1.5" },
      { variant: null, value: "2.5" },
    ]);
  });

  it("handles windows line endings and blank lines", () => {
    const rows = parseSpreadsheetPaste("A1C\t1\r\n\r\nA2C\t2\r\n");
    expect(rows.map((r) => r.variant)).toEqual(["A1C", "A2C"]);
  });

  it("drops header rows from instrument exports", () => {
    const rows = parseSpreadsheetPaste("mutant\tactivity\nA1C\t3.5\n");
    expect(rows).toEqual([{ variant: "A1C", value: "3.5" }]);
  });

  it("keeps extra columns out of the value", () => {
    const rows = parseSpreadsheetPaste("A1C\t3.5\tnotes here\n");
    expect(rows).toEqual([{ variant: "A1C", value: "3.5" }]);
  });
});

describe("assignPasteToBatch", () => {
  const batch = ["A1C", "A2C", "A3C"];

  it("matches named variants", () => {
    const { values, unmatched } = assignPasteToBatch(
      parseSpreadsheetPaste("A2C\t7\nA1C\t5"),
      batch,
    );
    expect(values.get("A1C")).toBe("5");
    expect(values.get("A2C")).toBe("7");
    expect(unmatched).toEqual([]);
  });

  it("fills value-only rows in batch order", () => {
    const { values } = assignPasteToBatch(parseSpreadsheetPaste("5\n6\n7"), batch);
    expect(values.get("A1C")).toBe("5");
    expect(values.get("A2C")).toBe("6");
    expect(values.get("A3C")).toBe("7");
  });

  it("reports unknown variants instead of dropping them", () => {
    const { values, unmatched } = assignPasteToBatch(
      parseSpreadsheetPaste("Z9Z\t1\nA1C\t2"),
      batch,
    );
    expect(unmatched).toEqual(["Z9Z"]);
    expect(values.size).toBe(1);
  });

  it("ignores surplus value-only rows", () => {
    const { values } = assignPasteToBatch(
      parseSpreadsheetPaste("1\n2\n3\n4\n5"),
      batch,
    );
    expect(values.size).toBe(3);
  });
});
