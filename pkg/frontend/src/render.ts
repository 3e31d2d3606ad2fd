#!/usr/bin/env node
/**
 * render --csv <path> --kind <histogram|line|grouped-line> --out <path.svg>
 *
 * Reads one experiment-results or collapse CSV and writes SVG figure(s).
 * A grid CSV rendered as grouped-line writes one file per spillover value,
 * inserting the suffix before the extension. Exit codes: 0 ok, 1 bad input.
 */
import { readFileSync, writeFileSync } from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { parseCsv } from "./csv.js";
import { EmptyInput, HeaderMismatch } from "./errors.js";
import { FigureKind, buildFigures } from "./figures.js";

export function renderToFiles(csvPath: string, kind: FigureKind,
                              outPath: string): string[] {
  const table = parseCsv(readFileSync(csvPath, "utf-8"), csvPath);
  const figures = buildFigures(table, kind);
  const parsed = path.parse(outPath);
  const written: string[] = [];
  for (const figure of figures) {
    const target = figure.suffix === ""
      ? outPath
      : path.join(parsed.dir, `${parsed.name}${figure.suffix}${parsed.ext}`);
    writeFileSync(target, figure.svg, "utf-8");
    written.push(target);
  }
  return written;
}

export function main(argv: string[]): number {
  const args = yargs(argv)
    .option("csv", { type: "string", demandOption: true })
    .option("kind", {
      type: "string",
      demandOption: true,
      choices: ["histogram", "line", "grouped-line"] as const,
    })
    .option("out", { type: "string", demandOption: true })
    .strict()
    .exitProcess(false)
    .parseSync();
  try {
    const written = renderToFiles(args.csv, args.kind as FigureKind, args.out);
    for (const file of written) {
      console.log(file);
    }
    return 0;
  } catch (err) {
    if (err instanceof EmptyInput || err instanceof HeaderMismatch) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const entry = process.argv[1] ? path.resolve(process.argv[1]) : "";
if (entry === fileURLToPath(import.meta.url)) {
  process.exit(main(hideBin(process.argv)));
}
