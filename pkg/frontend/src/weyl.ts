/** Weyl-decay figure: log-log plot of maximal character sums against p,
 * with a least-squares slope fitted and annotated. */

import { Table, numeric, requireColumns } from "./csv.js";
import {
  FRAME,
  MARGINS,
  axes,
  el,
  escapeText,
  fmt,
  logScale,
  svgDocument,
} from "./svg.js";

export interface SlopeFit {
  slope: number;
  intercept: number;
}

export function fitLogLogSlope(points: { p: number; value: number }[]): SlopeFit {
  if (points.length < 2) {
    throw new Error("need at least two points to fit a slope");
  }
  const xs = points.map((pt) => Math.log(pt.p));
  const ys = points.map((pt) => Math.log(pt.value));
  const n = xs.length;
  const xbar = xs.reduce((a, b) => a + b, 0) / n;
  const ybar = ys.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (xs[i] - xbar) ** 2;
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  const slope = sxy / sxx;
  return { slope, intercept: ybar - slope * xbar };
}

export interface WeylFigure {
  svg: string;
  slope: number;
  pointCount: number;
}

export interface AxisLabels {
  xLabel?: string;
  yLabel?: string;
}

export function renderWeylDecay(table: Table, labels: AxisLabels = {}): WeylFigure {
  requireColumns(table, ["group", "estimate"]);
  const points = table.rows
    .filter((r) => /^\d+$/.test(r.group))
    .map((r) => ({ p: numeric(r, "group"), value: numeric(r, "estimate") }))
    .filter((pt) => pt.value > 0)
    .sort((a, b) => a.p - b.p);
  if (points.length < 2) {
    throw new Error("need at least two positive data points for the decay plot");
  }
  const fit = fitLogLogSlope(points);

  const m = MARGINS;
  const xDomain: [number, number] = [points[0].p / 1.3, points[points.length - 1].p * 1.3];
  const vals = points.map((pt) => pt.value);
  const yDomain: [number, number] = [Math.min(...vals) / 1.5, Math.max(...vals) * 1.5];
  const xScale = logScale(xDomain, [m.left, FRAME.width - m.right]);
  const yScale = logScale(yDomain, [FRAME.height - m.bottom, m.top]);

  const body: string[] = [];
  body.push(...axes({
    xLabel: labels.xLabel ?? "modulus p (log scale)",
    yLabel: labels.yLabel ?? "max |character sum| (log scale)",
    xScale,
    yScale,
    xTicks: points.map((pt) => pt.p),
    yTicks: vals,
    yFormat: (v) => fmt(v, 3),
  }));

  const lineAt = (p: number) => Math.exp(fit.intercept + fit.slope * Math.log(p));
  body.push(el("line", {
    x1: xScale(xDomain[0]), y1: yScale(lineAt(xDomain[0])),
    x2: xScale(xDomain[1]), y2: yScale(lineAt(xDomain[1])),
    stroke: "#31a354", "stroke-width": 1.5, "stroke-dasharray": "5 3",
  }));
  for (const pt of points) {
    body.push(el("circle", {
      cx: xScale(pt.p), cy: yScale(pt.value), r: 4, fill: "#756bb1",
    }));
  }
  body.push(el("text", {
    x: FRAME.width - m.right - 4, y: m.top + 14, "text-anchor": "end",
    "font-size": 13, "font-family": "sans-serif", fill: "#31a354",
  }, escapeText(`log-log slope = ${fit.slope.toFixed(3)} (reference -0.5)`)));

  return { svg: svgDocument(body), slope: fit.slope, pointCount: points.length };
}
