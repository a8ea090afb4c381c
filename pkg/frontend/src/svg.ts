/** Tiny SVG plot scaffolding: scales, ticks, and element builders.
 *
 * Output is deterministic text: fixed styling, fixed decimal formatting,
 * and no timestamps or generated ids.
 */

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const FRAME = { width: 640, height: 420 };
export const MARGINS: Margins = { top: 30, right: 30, bottom: 50, left: 70 };

export type Scale = (value: number) => number;

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  return (v) => inner(Math.log10(v));
}

export function fmt(value: number, digits = 4): string {
  if (value === 0) return "0";
  const rounded = Number(value.toPrecision(digits));
  return String(rounded);
}

export function ticks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => (hi - lo) / s <= count) ?? candidates[3];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  body = "",
): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v, 6) : v}"`)
    .join(" ");
  return body === "" && tag !== "text"
    ? `<${tag} ${parts}/>`
    : `<${tag} ${parts}>${body}</${tag}>`;
}

export function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function svgDocument(body: string[], height = FRAME.height): string {
  const { width } = FRAME;
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    el("rect", { x: 0, y: 0, width, height, fill: "white" }),
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

export interface AxisSpec {
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  xTicks: number[];
  yTicks: number[];
  xFormat?: (v: number) => string;
  yFormat?: (v: number) => string;
}

export function axes(spec: AxisSpec): string[] {
  const { width, height } = FRAME;
  const m = MARGINS;
  const xf = spec.xFormat ?? ((v) => fmt(v));
  const yf = spec.yFormat ?? ((v) => fmt(v));
  const out: string[] = [];
  out.push(el("line", {
    x1: m.left, y1: height - m.bottom, x2: width - m.right, y2: height - m.bottom,
    stroke: "black", "stroke-width": 1,
  }));
  out.push(el("line", {
    x1: m.left, y1: m.top, x2: m.left, y2: height - m.bottom,
    stroke: "black", "stroke-width": 1,
  }));
  for (const t of spec.xTicks) {
    const x = spec.xScale(t);
    out.push(el("line", {
      x1: x, y1: height - m.bottom, x2: x, y2: height - m.bottom + 5,
      stroke: "black", "stroke-width": 1,
    }));
    out.push(el("text", {
      x, y: height - m.bottom + 20, "text-anchor": "middle",
      "font-size": 12, "font-family": "sans-serif",
    }, escapeText(xf(t))));
  }
  for (const t of spec.yTicks) {
    const y = spec.yScale(t);
    out.push(el("line", {
      x1: m.left - 5, y1: y, x2: m.left, y2: y,
      stroke: "black", "stroke-width": 1,
    }));
    out.push(el("text", {
      x: m.left - 8, y: y + 4, "text-anchor": "end",
      "font-size": 12, "font-family": "sans-serif",
    }, escapeText(yf(t))));
  }
  out.push(el("text", {
    x: (m.left + FRAME.width - m.right) / 2, y: height - 10,
    "text-anchor": "middle", "font-size": 13, "font-family": "sans-serif",
  }, escapeText(spec.xLabel)));
  out.push(el("text", {
    x: 18, y: (m.top + height - m.bottom) / 2, "text-anchor": "middle",
    "font-size": 13, "font-family": "sans-serif",
    transform: `rotate(-90 18 ${(m.top + height - m.bottom) / 2})`,
  }, escapeText(spec.yLabel)));
  return out;
}
