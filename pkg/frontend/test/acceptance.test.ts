/** Secondary acceptance: regenerate both figures from the shipped CSVs and
 * check the fitted Weyl slope annotation. */

import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { runCli } from "../src/cli.js";
import { parseCsv } from "../src/csv.js";
import { renderWeylDecay } from "../src/weyl.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const dataDir = path.join(here, "..", "data");

describe("acceptance: figures regenerate from shipped CSVs", () => {
  it("criterion 13", () => {
    const start = Date.now();
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-acceptance-"));

    const convergenceOut = path.join(dir, "convergence.svg");
    expect(
      runCli([
        "convergence",
        "--in", path.join(dataDir, "convergence_ap3.csv"),
        "--out", convergenceOut,
      ]),
    ).toBe(0);
    const convergenceSvg = fs.readFileSync(convergenceOut, "utf-8");
    expect((convergenceSvg.match(/<circle /g) ?? []).length).toBeGreaterThanOrEqual(3);
    expect(convergenceSvg).toContain("torus bound");

    const weylOut = path.join(dir, "weyl.svg");
    expect(
      runCli([
        "weyl-decay",
        "--in", path.join(dataDir, "weyl_decay.csv"),
        "--out", weylOut,
      ]),
    ).toBe(0);
    const fig = renderWeylDecay(
      parseCsv(fs.readFileSync(path.join(dataDir, "weyl_decay.csv"), "utf-8")),
    );
    expect(Math.abs(fig.slope - -0.5)).toBeLessThanOrEqual(0.15);
    expect(fs.readFileSync(weylOut, "utf-8")).toContain(
      `log-log slope = ${fig.slope.toFixed(3)}`,
    );

    const elapsed = (Date.now() - start) / 1000;
    expect(elapsed).toBeLessThan(30);
    console.log(`ACCEPTANCE 13 PASS ${elapsed.toFixed(2)}s  figures regenerated, slope ${fig.slope.toFixed(3)}`);
  });
});
