/** Command-line entry point.
 *
 * Usage: main.js --task detect|extract [--model-dir DIR] [--device HINT] INPUT
 *
 * INPUT is a JSON-lines file of requirement objects; the matching interchange
 * JSON is written to stdout. Exit codes: 0 success, 1 bad arguments or input,
 * 2 model load failure.
 */

import { readFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { DEFAULT_CONFIG, loadBackend, ModelLoadError } from "./backend.js";
import { RequirementSchema, type Requirement } from "./schema.js";

interface CliArgs {
  task: "detect" | "extract";
  modelDir: string | null;
  device: string;
  input: string;
}

function parseArgs(argv: string[]): CliArgs {
  let task: string | null = null;
  let modelDir: string | null = null;
  let device = "cpu";
  const positional: string[] = [];
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (arg === "--task") task = argv[++i] ?? null;
    else if (arg === "--model-dir") modelDir = argv[++i] ?? null;
    else if (arg === "--device") device = argv[++i] ?? "cpu";
    else if (arg.startsWith("--")) throw new Error(`unknown flag ${arg}`);
    else positional.push(arg);
  }
  if (task !== "detect" && task !== "extract") {
    throw new Error("--task must be detect or extract");
  }
  if (positional.length !== 1) {
    throw new Error("exactly one input path is required");
  }
  return { task, modelDir, device, input: positional[0] };
}

function readRequirements(path: string): Requirement[] {
  const lines = readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0);
  return lines.map((line, i) => {
    const parsed = RequirementSchema.safeParse(JSON.parse(line));
    if (!parsed.success) {
      throw new Error(`line ${i + 1}: ${parsed.error.message}`);
    }
    return parsed.data;
  });
}

export function run(argv: string[]): number {
  const args = parseArgs(argv);
  const requirements = readRequirements(args.input);
  const backend = loadBackend({ ...DEFAULT_CONFIG, device: args.device }, args.modelDir);
  const records =
    args.task === "detect" ? backend.detect(requirements) : backend.extract(requirements);
  process.stdout.write(JSON.stringify(records, null, 2) + "\n");
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  try {
    process.exitCode = run(process.argv.slice(2));
  } catch (err) {
    if (err instanceof ModelLoadError) {
      process.stderr.write(`model load failure: ${err.message}\n`);
      process.exitCode = 2;
    } else {
      process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
      process.exitCode = 1;
    }
  }
}
