/** Counterexample status table: one horizontal bar per check, colored by
 * PASS / FAIL / SKIP, with expected-versus-actual annotations. */

import { Table, requireColumns } from "./csv.js";
import { el, escapeText, svgDocument } from "./svg.js";

const COLORS: Record<string, string> = {
  PASS: "#31a354",
  FAIL: "#de2d26",
  SKIP: "#bdbdbd",
};

export interface CounterexampleFigure {
  svg: string;
  passed: number;
  failed: number;
  skipped: number;
}

export function renderCounterexamples(table: Table): CounterexampleFigure {
  requireColumns(table, ["check", "status"]);
  const rowHeight = 26;
  const top = 40;
  const labelWidth = 230;
  const body: string[] = [];
  body.push(el("text", {
    x: 20, y: 24, "font-size": 15, "font-family": "sans-serif", "font-weight": "bold",
  }, "Counterexample checks"));
  let passed = 0;
  let failed = 0;
  let skipped = 0;
  table.rows.forEach((row, i) => {
    const status = row.status ?? "";
    if (status === "PASS") passed++;
    else if (status === "FAIL") failed++;
    else skipped++;
    const y = top + i * rowHeight;
    body.push(el("text", {
      x: labelWidth - 8, y: y + 15, "text-anchor": "end",
      "font-size": 12, "font-family": "monospace",
    }, escapeText(row.check)));
    body.push(el("rect", {
      x: labelWidth, y: y + 2, width: 130, height: rowHeight - 8,
      fill: COLORS[status] ?? COLORS.SKIP, rx: 3,
    }));
    body.push(el("text", {
      x: labelWidth + 65, y: y + 15, "text-anchor": "middle",
      "font-size": 12, "font-family": "sans-serif", fill: "white",
    }, escapeText(status)));
    const note = [row.expected, row.actual].filter((s) => s).join(" vs ");
    body.push(el("text", {
      x: labelWidth + 140, y: y + 15, "font-size": 11, "font-family": "monospace",
    }, escapeText(note)));
  });
  const height = top + table.rows.length * rowHeight + 16;
  return { svg: svgDocument(body, height), passed, failed, skipped };
}
