/** Shared flag handling for the two plot entry points. */

import { parseArgs } from "node:util";

import { SchemaError } from "./csv.js";
import { FigureKind, writeFigureFile } from "./figures.js";

export function runPlot(
  kind: FigureKind,
  defaultOut: string,
  argv: string[],
): number {
  let values: { in?: string; out?: string };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        in: { type: "string" },
        out: { type: "string", default: defaultOut },
      },
    }));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  if (values.in === undefined) {
    console.error("error: --in <csv> is required");
    return 2;
  }
  const spec = { input: values.in, output: values.out!, kind };
  try {
    writeFigureFile(spec);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  console.log(`wrote ${spec.output}`);
  return 0;
}
