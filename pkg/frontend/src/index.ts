export { parseCsv, requireColumns, numeric } from "./csv.js";
export type { Table } from "./csv.js";
export { renderConvergence } from "./convergence.js";
export type { ConvergenceFigure } from "./convergence.js";
export { renderWeylDecay, fitLogLogSlope } from "./weyl.js";
export type { WeylFigure, SlopeFit } from "./weyl.js";
export { renderCounterexamples } from "./counterexample.js";
export type { CounterexampleFigure } from "./counterexample.js";
export { parseArgs, renderSpec, runCli } from "./cli.js";
export type { PlotSpec, PlotResult } from "./cli.js";
