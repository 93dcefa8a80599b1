#!/usr/bin/env node
/**
 * Render one experiment figure from a tidy results CSV:
 *
 *   cdna-figures render --csv results.csv --experiment range --out fig.svg
 *
 * Exits non-zero (writing no file) on unknown experiments, schema mismatches
 * or empty CSVs.
 */
import { readFileSync, writeFileSync } from "node:fs";
import { CsvSchemaError } from "./csv.js";
import { renderFigure } from "./render.js";

interface Args {
  csv: string;
  experiment: string;
  out: string;
}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== "render") {
    throw new UsageError(`unknown command "${argv[0] ?? ""}"; only "render" is supported`);
  }
  const values = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new UsageError(`malformed arguments near "${flag}"`);
    }
    values.set(flag.slice(2), value);
  }
  for (const required of ["csv", "experiment", "out"]) {
    if (!values.has(required)) {
      throw new UsageError(`missing --${required}`);
    }
  }
  return {
    csv: values.get("csv")!,
    experiment: values.get("experiment")!,
    out: values.get("out")!,
  };
}

class UsageError extends Error {}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    console.error("usage: cdna-figures render --csv FILE --experiment NAME --out FILE.svg");
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(args.csv, "utf8");
  } catch (err) {
    console.error(`cannot read ${args.csv}: ${(err as Error).message}`);
    return 2;
  }
  try {
    const svg = renderFigure(text, args.experiment);
    writeFileSync(args.out, svg);
  } catch (err) {
    if (err instanceof CsvSchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  console.error(`wrote ${args.out}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
