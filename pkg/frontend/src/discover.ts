import fs from "node:fs";
import path from "node:path";

/** A window-counts file as written by the simulator, metadata in the name:
 * window_{algorithm}_f{frequency}_a{agents}_s{seed}.csv */
export interface WindowFile {
  path: string;
  algorithm: string;
  frequency: string;
  agents: number;
  seed: number;
}

const WINDOW_NAME = /^window_([a-z]+)_f([^_]+)_a(\d+)_s(\d+)\.csv$/;

export function discoverWindowFiles(dir: string): WindowFile[] {
  const out: WindowFile[] = [];
  for (const name of fs.readdirSync(dir).sort()) {
    const match = WINDOW_NAME.exec(name);
    if (!match) continue;
    out.push({
      path: path.join(dir, name),
      algorithm: match[1],
      frequency: match[2],
      agents: Number(match[3]),
      seed: Number(match[4]),
    });
  }
  return out;
}
