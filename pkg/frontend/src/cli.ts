#!/usr/bin/env node
/** plot <convergence|weyl-decay|counterexample> --in table.csv --out fig.svg
 *
 * Reads one of the linforms CSV outputs and writes a deterministic SVG
 * figure.  Exits nonzero (without writing the output file) on malformed
 * or empty input; missing-column errors name the column.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { parseCsv } from "./csv.js";
import { renderConvergence } from "./convergence.js";
import { renderWeylDecay } from "./weyl.js";
import { renderCounterexamples } from "./counterexample.js";

const KINDS = ["convergence", "weyl-decay", "counterexample"] as const;
type Kind = (typeof KINDS)[number];

export interface PlotSpec {
  kind: Kind;
  input: string;
  output: string;
  xLabel?: string;
  yLabel?: string;
}

export function parseArgs(argv: string[]): PlotSpec {
  const [kind, ...rest] = argv;
  if (!KINDS.includes(kind as Kind)) {
    throw new Error(`plot kind must be one of ${KINDS.join(", ")}, got ${kind ?? "nothing"}`);
  }
  const spec: PlotSpec = { kind: kind as Kind, input: "", output: "" };
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) throw new Error(`flag ${flag} needs a value`);
    if (flag === "--in") spec.input = value;
    else if (flag === "--out") spec.output = value;
    else if (flag === "--xlabel") spec.xLabel = value;
    else if (flag === "--ylabel") spec.yLabel = value;
    else throw new Error(`unknown flag ${flag}`);
  }
  if (!spec.input || !spec.output) throw new Error("both --in and --out are required");
  return spec;
}

export interface PlotResult {
  svg: string;
  summary: string;
}

export function renderSpec(spec: PlotSpec): PlotResult {
  const text = fs.readFileSync(spec.input, "utf-8");
  const table = parseCsv(text);
  const labels = { xLabel: spec.xLabel, yLabel: spec.yLabel };
  if (spec.kind === "convergence") {
    const fig = renderConvergence(table, labels);
    return {
      svg: fig.svg,
      summary: `convergence: ${fig.primeCount} prime points, torus ${fig.torusEstimate}`,
    };
  }
  if (spec.kind === "weyl-decay") {
    const fig = renderWeylDecay(table, labels);
    return {
      svg: fig.svg,
      summary: `weyl-decay: ${fig.pointCount} points, slope ${fig.slope.toFixed(3)}`,
    };
  }
  const fig = renderCounterexamples(table);
  return {
    svg: fig.svg,
    summary: `counterexample: ${fig.passed} pass, ${fig.failed} fail, ${fig.skipped} skip`,
  };
}

export function runCli(argv: string[]): number {
  let spec: PlotSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(`usage: plot <${KINDS.join("|")}> --in table.csv --out fig.svg`);
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const result = renderSpec(spec);
    fs.mkdirSync(path.dirname(path.resolve(spec.output)), { recursive: true });
    fs.writeFileSync(spec.output, result.svg, "utf-8");
    console.log(`${result.summary} -> ${spec.output}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (invokedDirectly) {
  process.exit(runCli(process.argv.slice(2)));
}
