#!/usr/bin/env node
/** spikes-plot --csv <file> --kind <k> --out <file.svg> [--no-overlay]
 *
 * Kinds: mean_vs_b, var_vs_b, alpha_sweep (result-CSV schema) and
 * trajectory (time,state dumps). Exit codes: 0 ok, 2 schema/usage error.
 */

import * as fs from "fs";
import { parseResultCsv, parseTrajectoryCsv, SchemaError } from "./csv";
import {
  DEFAULT_SPEC, FigureKind, renderResultFigure, renderTrajectoryFigure,
} from "./figure";

interface Args {
  csv: string;
  kind: FigureKind;
  out: string;
  overlay: boolean;
  title?: string;
}

function parseArgs(argv: string[]): Args {
  const out: Partial<Args> = { overlay: true };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--csv") out.csv = argv[++i];
    else if (a === "--kind") out.kind = argv[++i] as FigureKind;
    else if (a === "--out") out.out = argv[++i];
    else if (a === "--title") out.title = argv[++i];
    else if (a === "--no-overlay") out.overlay = false;
    else if (a === "--overlay") out.overlay = true;
    else throw new UsageError(`unknown argument ${a}`);
  }
  if (!out.csv || !out.kind || !out.out) {
    throw new UsageError("required: --csv <file> --kind <kind> --out <file>");
  }
  const kinds: FigureKind[] = ["mean_vs_b", "var_vs_b", "trajectory", "alpha_sweep"];
  if (!kinds.includes(out.kind)) {
    throw new UsageError(`unknown kind ${out.kind}; expected one of ${kinds.join(", ")}`);
  }
  return out as Args;
}

class UsageError extends Error {}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    if (e instanceof UsageError) {
      process.stderr.write(`usage error: ${e.message}\n`);
      return 2;
    }
    throw e;
  }
  let textIn: string;
  try {
    textIn = fs.readFileSync(args.csv, "utf8");
  } catch (e) {
    process.stderr.write(`cannot read ${args.csv}\n`);
    return 2;
  }
  const spec = { ...DEFAULT_SPEC, kind: args.kind, overlay: args.overlay, title: args.title };
  let svg: string;
  try {
    if (args.kind === "trajectory") {
      svg = renderTrajectoryFigure(parseTrajectoryCsv(textIn), spec);
    } else {
      svg = renderResultFigure(parseResultCsv(textIn), spec);
    }
  } catch (e) {
    if (e instanceof SchemaError) {
      process.stderr.write(`schema error: ${e.message}\n`);
      return 2;
    }
    throw e;
  }
  fs.writeFileSync(args.out, svg);
  process.stdout.write(`wrote ${args.out}\n`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
