import fs from "node:fs";
import path from "node:path";

import { readSummaryCsv, readWindowCsv, SchemaError, type WindowRow } from "./csv.js";
import { discoverWindowFiles } from "./discover.js";
import { buildSummaryTable, tableSvg } from "./summaryTable.js";
import { buildWindowChartData, renderChartSvg, windowChartOption } from "./windowChart.js";

interface Args {
  inDir: string;
  outDir: string;
  algos?: string[];
  agents?: number;
  seed?: number;
}

function parseArgs(argv: string[]): Args {
  let inDir: string | undefined;
  let outDir: string | undefined;
  let algos: string[] | undefined;
  let agents: number | undefined;
  let seed: number | undefined;
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = () => {
      const v = argv[++i];
      if (v === undefined) throw new Error(`missing value for ${flag}`);
      return v;
    };
    switch (flag) {
      case "--in":
        inDir = value();
        break;
      case "--out":
        outDir = value();
        break;
      case "--algos":
        algos = value().split(",").filter((x) => x.length > 0);
        break;
      case "--agents":
        agents = Number(value());
        break;
      case "--seed":
        seed = Number(value());
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!inDir || !outDir) throw new Error("usage: charts --in DIR --out DIR [--algos tp,tpts,central] [--agents N] [--seed N]");
  return { inDir, outDir, algos, agents, seed };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  try {
    fs.mkdirSync(args.outDir, { recursive: true });
    const written: string[] = [];

    let files = discoverWindowFiles(args.inDir);
    if (args.algos) files = files.filter((f) => args.algos!.includes(f.algorithm));
    if (args.agents !== undefined) files = files.filter((f) => f.agents === args.agents);
    if (args.seed !== undefined) files = files.filter((f) => f.seed === args.seed);

    const byFrequency = new Map<string, Map<string, WindowRow[]>>();
    for (const file of files) {
      const perAlgo = byFrequency.get(file.frequency) ?? new Map<string, WindowRow[]>();
      if (perAlgo.has(file.algorithm)) {
        console.error(
          `error: multiple window files for algorithm '${file.algorithm}' at frequency ` +
          `${file.frequency}; narrow the selection with --agents/--seed`,
        );
        return 1;
      }
      perAlgo.set(file.algorithm, readWindowCsv(file.path));
      byFrequency.set(file.frequency, perAlgo);
    }
    for (const frequency of [...byFrequency.keys()].sort((a, b) => Number(a) - Number(b))) {
      const data = buildWindowChartData(frequency, byFrequency.get(frequency)!);
      const svg = renderChartSvg(windowChartOption(data));
      const name = `window_f${frequency}.svg`;
      fs.writeFileSync(path.join(args.outDir, name), svg);
      written.push(name);
    }

    const summaryPath = path.join(args.inDir, "summary.csv");
    if (fs.existsSync(summaryPath)) {
      const table = buildSummaryTable(readSummaryCsv(summaryPath), args.algos);
      for (const warning of table.warnings) console.error(`warning: ${warning}`);
      fs.writeFileSync(path.join(args.outDir, "summary_table.txt"), table.text);
      fs.writeFileSync(path.join(args.outDir, "summary_table.svg"), tableSvg(table.text));
      written.push("summary_table.txt", "summary_table.svg");
    }

    if (written.length === 0) {
      console.error(`error: nothing to render in ${args.inDir}`);
      return 1;
    }
    console.log(`wrote ${written.join(", ")} to ${args.outDir}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && /cli\.js$/.test(process.argv[1])) {
  process.exit(run(process.argv.slice(2)));
}
