/** Convergence figure: discrete estimates against p, with the torus value
 * drawn as a horizontal band of width two standard errors either side. */

import { Table, numeric, requireColumns } from "./csv.js";
import {
  FRAME,
  MARGINS,
  axes,
  el,
  escapeText,
  fmt,
  linearScale,
  svgDocument,
  ticks,
} from "./svg.js";

export interface ConvergenceFigure {
  svg: string;
  primeCount: number;
  torusEstimate: number;
}

export interface AxisLabels {
  xLabel?: string;
  yLabel?: string;
}

export function renderConvergence(table: Table, labels: AxisLabels = {}): ConvergenceFigure {
  requireColumns(table, ["group", "estimate", "stderr"]);
  const primeRows = table.rows.filter((r) => /^\d+$/.test(r.group));
  const torusRows = table.rows.filter((r) => r.group === "torus");
  if (primeRows.length === 0) {
    throw new Error("no prime rows in convergence CSV");
  }
  if (torusRows.length === 0) {
    throw new Error("no torus row in convergence CSV");
  }
  const points = primeRows
    .map((r) => ({ p: numeric(r, "group"), value: numeric(r, "estimate") }))
    .sort((a, b) => a.p - b.p);
  const torus = numeric(torusRows[0], "estimate");
  const torusErr = numeric(torusRows[0], "stderr");

  const values = points.map((pt) => pt.value).concat([torus - 2 * torusErr, torus + 2 * torusErr]);
  const yLo = Math.min(0, Math.min(...values));
  const yHi = Math.max(...values) * 1.15 || 1;
  const xLo = points[0].p;
  const xHi = points[points.length - 1].p;
  const m = MARGINS;
  const xScale = linearScale(
    [xLo - 1, xHi + 1],
    [m.left, FRAME.width - m.right],
  );
  const yScale = linearScale([yLo, yHi], [FRAME.height - m.bottom, m.top]);

  const body: string[] = [];
  body.push(...axes({
    xLabel: labels.xLabel ?? "modulus p",
    yLabel: labels.yLabel ?? "minimal average (upper bounds where inexact)",
    xScale,
    yScale,
    xTicks: points.map((pt) => pt.p),
    yTicks: ticks(yLo, yHi),
  }));

  const bandTop = yScale(torus + 2 * torusErr);
  const bandBottom = yScale(torus - 2 * torusErr);
  body.push(el("rect", {
    x: m.left,
    y: bandTop,
    width: FRAME.width - m.left - m.right,
    height: Math.max(bandBottom - bandTop, 1),
    fill: "#9ecae1",
    "fill-opacity": 0.6,
  }));
  body.push(el("line", {
    x1: m.left, y1: yScale(torus), x2: FRAME.width - m.right, y2: yScale(torus),
    stroke: "#3182bd", "stroke-width": 1.5, "stroke-dasharray": "6 3",
  }));
  body.push(el("text", {
    x: FRAME.width - m.right - 4, y: yScale(torus) - 6, "text-anchor": "end",
    "font-size": 12, "font-family": "sans-serif", fill: "#3182bd",
  }, escapeText(`torus bound ${fmt(torus)} (band: 2 standard errors)`)));

  const path = points
    .map((pt, i) => `${i === 0 ? "M" : "L"}${fmt(xScale(pt.p), 6)},${fmt(yScale(pt.value), 6)}`)
    .join(" ");
  body.push(el("path", { d: path, fill: "none", stroke: "#636363", "stroke-width": 1 }));
  for (const pt of points) {
    body.push(el("circle", {
      cx: xScale(pt.p), cy: yScale(pt.value), r: 4, fill: "#d95f0e",
    }));
    body.push(el("text", {
      x: xScale(pt.p), y: yScale(pt.value) - 10, "text-anchor": "middle",
      "font-size": 11, "font-family": "sans-serif",
    }, escapeText(fmt(pt.value))));
  }

  return { svg: svgDocument(body), primeCount: points.length, torusEstimate: torus };
}
