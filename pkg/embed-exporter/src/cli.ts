#!/usr/bin/env node
/**
 * Command-line front end: embed every document named by a corpus manifest
 * and write PSEM matrices plus an index CSV for the similarity pipeline.
 */
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { MODELS } from "./encoder.js";
import { DEFAULT_BATCH_SIZE, DEFAULT_MAX_SEQ_LEN, runExport } from "./export.js";

export function main(argv: string[]): number {
  const args = yargs(argv)
    .scriptName("embed-export")
    .usage("$0 --manifest <csv> --sentences <dir> --model <id> --out <dir>")
    .option("manifest", {
      type: "string",
      demandOption: true,
      describe: "corpus manifest CSV (doc_id,party_id,election_id,path)",
    })
    .option("sentences", {
      type: "string",
      demandOption: true,
      describe: "directory with <doc_id>.sentences.json files",
    })
    .option("model", {
      type: "string",
      demandOption: true,
      choices: Object.keys(MODELS).sort(),
      describe: "embedding model identifier (recorded as producer)",
    })
    .option("unit", {
      type: "string",
      choices: ["token", "sentence"] as const,
      default: "sentence" as const,
      describe: "one row per token position or per sentence",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output directory for .psem files and index.csv",
    })
    .option("max-len", {
      type: "number",
      default: DEFAULT_MAX_SEQ_LEN,
      describe: "maximum window length for token models",
    })
    .option("batch", {
      type: "number",
      default: DEFAULT_BATCH_SIZE,
      describe: "documents per progress batch",
    })
    .strict()
    .version(false)
    .help()
    .parseSync();

  try {
    const result = runExport(
      {
        manifestPath: args.manifest,
        sentencesDir: args.sentences,
        model: args.model,
        unit: args.unit as "token" | "sentence",
        maxSeqLen: args["max-len"],
        batchSize: args.batch,
        outDir: args.out,
      },
      (message) => console.error(message),
    );
    console.log(
      `wrote ${result.docs.length} matrices ` +
      `(producer=${result.producer} dim=${result.dim}) to ${args.out}; ` +
      `index: ${result.indexPath}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(hideBin(process.argv)));
}
