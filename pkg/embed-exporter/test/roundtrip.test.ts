/**
 * Cross-package contract: matrices exported here must be accepted by the
 * similarity pipeline's own `psem-check` validator, header fields must
 * round-trip exactly, and in sentence mode every document's row count must
 * equal the pipeline's own sentence count — for 100% of a 20-document
 * corpus whose sentence lists were produced by `progsim export-sentences`.
 */
import { execFileSync } from "node:child_process";
import {
  existsSync,
  mkdirSync,
  mkdtempSync,
  readFileSync,
  readdirSync,
  rmSync,
  writeFileSync,
} from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { readPsem } from "../src/psem.js";
import { readSentenceList } from "../src/sentences.js";

const root = mkdtempSync(join(tmpdir(), "roundtrip-"));
afterAll(() => rmSync(root, { recursive: true, force: true }));

const CLI = fileURLToPath(new URL("../dist/cli.js", import.meta.url));
const N_DOCS = 20;
const SENTENCE_COUNTS = [
  1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16, 18, 20, 22, 25, 28, 30, 40, 50, 80,
];

const TOPICS = [
  "wages", "rents", "pensions", "schools", "railways", "hospitals",
  "farming", "industry", "housing", "taxation",
];
const VERBS = ["strengthen", "protect", "modernise", "expand", "reform"];

function docId(i: number): string {
  return `party${String(i + 1).padStart(2, "0")}#1990`;
}

function docText(i: number): string {
  const sentences: string[] = [];
  for (let j = 0; j < SENTENCE_COUNTS[i]; j++) {
    const topic = TOPICS[(i + j) % TOPICS.length];
    const verb = VERBS[(i * 3 + j) % VERBS.length];
    sentences.push(
      `We will ${verb} ${topic} across every region of the country.`);
  }
  return sentences.join(" ") + "\n";
}

function progsim(args: string[]): string {
  return execFileSync("progsim", args, { cwd: root, encoding: "utf-8" });
}

beforeAll(() => {
  expect(existsSync(CLI), `missing build output, run "npm run build" first: ${CLI}`).toBe(true);

  const manifestLines = ["doc_id,party_id,election_id,path"];
  for (let i = 0; i < N_DOCS; i++) {
    const id = docId(i);
    const file = `doc${i + 1}.txt`;
    writeFileSync(join(root, file), docText(i));
    manifestLines.push(`${id},party${String(i + 1).padStart(2, "0")},1990,${file}`);
  }
  writeFileSync(join(root, "manifest.csv"), manifestLines.join("\n") + "\n");
  writeFileSync(join(root, "run.toml"), [
    "[corpus]",
    'manifest = "manifest.csv"',
    "",
    "[run]",
    "seed = 7",
    "jobs = 1",
    'output = "out"',
    "",
    "[[measures]]",
    'family = "wordfreq"',
    'weighting = ["tf"]',
    'metric = ["cos"]',
    "",
  ].join("\n"));
  mkdirSync(join(root, "sents"), { recursive: true });
  progsim(["export-sentences", "--config", "run.toml", "--target", "sents"]);
});

function exportCorpus(model: string, unit: string, outName: string): string {
  const outDir = join(root, outName);
  execFileSync(process.execPath, [
    CLI,
    "--manifest", join(root, "manifest.csv"),
    "--sentences", join(root, "sents"),
    "--model", model,
    "--unit", unit,
    "--out", outDir,
  ], { encoding: "utf-8" });
  return outDir;
}

function checkAll(outDir: string): Map<string, { dim: number; rows: number; producer: string }> {
  const files = readdirSync(outDir).filter((f) => f.endsWith(".psem")).sort();
  expect(files).toHaveLength(N_DOCS);
  const report = progsim(["psem-check", ...files.map((f) => join(outDir, f))]);
  const parsed = new Map<string, { dim: number; rows: number; producer: string }>();
  for (const line of report.trimEnd().split("\n")) {
    const m = /^(.+\.psem): producer=(\S+) dim=(\d+) rows=(\d+)$/.exec(line);
    expect(m, `unparseable validator line: ${line}`).toBeTruthy();
    const name = m![1].split("/").pop()!;
    parsed.set(name, {
      producer: m![2],
      dim: Number(m![3]),
      rows: Number(m![4]),
    });
  }
  expect(parsed.size).toBe(N_DOCS);
  return parsed;
}

describe("pipeline round-trip over a 20-document corpus", () => {
  it("sentence mode: validator passes and row counts equal the pipeline's sentence counts for every document", () => {
    const outDir = exportCorpus("sentpool-32", "sentence", "psem-sentence");
    const checked = checkAll(outDir);

    let matching = 0;
    for (let i = 0; i < N_DOCS; i++) {
      const id = docId(i);
      const sentences = readSentenceList(
        join(root, "sents", `${id}.sentences.json`)).sentences;
      expect(sentences.length).toBeGreaterThan(0);

      const fileName = `${id}.psem`;
      const fromValidator = checked.get(fileName)!;
      expect(fromValidator.producer).toBe("sentpool-32");

      // header fields round-trip exactly through write → validate → read
      const back = readPsem(join(outDir, fileName));
      expect(back.dim).toBe(32);
      expect(back.dim).toBe(fromValidator.dim);
      expect(back.m).toBe(fromValidator.rows);

      if (back.m === sentences.length) {
        matching += 1;
      }
    }
    expect(matching).toBe(N_DOCS);
  });

  it("token mode: windowed long documents still pass the validator", () => {
    const outDir = exportCorpus("hashproj-16", "token", "psem-token");
    const checked = checkAll(outDir);
    for (const info of checked.values()) {
      expect(info.producer).toBe("hashproj-16");
      expect(info.dim).toBe(16);
      expect(info.rows).toBeGreaterThan(0);
    }
    // the 80-sentence document exceeds one 512-token window
    const longest = checked.get(`${docId(N_DOCS - 1)}.psem`)!;
    expect(longest.rows).toBeGreaterThan(512);
  });

  it("identical jobs export byte-identical trees", () => {
    const first = exportCorpus("sentpool-32", "sentence", "psem-a");
    const second = exportCorpus("sentpool-32", "sentence", "psem-b");
    const names = readdirSync(first).sort();
    expect(readdirSync(second).sort()).toEqual(names);
    for (const name of names) {
      const a = readFileSync(join(first, name));
      const b = readFileSync(join(second, name));
      expect(a.equals(b), `differs: ${name}`).toBe(true);
    }
  });
});
