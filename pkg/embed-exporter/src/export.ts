/**
 * Export job: turn a corpus's sentence lists into one PSEM matrix per
 * document plus a `doc_id,producer,path` index CSV that the similarity
 * pipeline consumes directly.
 */
import { mkdirSync, renameSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import {
  encodeSentence,
  encodeTokenWindow,
  resolveModel,
  tokenize,
  type EncoderModel,
} from "./encoder.js";
import { readManifest } from "./manifest.js";
import { writePsem } from "./psem.js";
import { readSentenceList } from "./sentences.js";
import { assembleRows } from "./windows.js";

export interface ExportJob {
  /** Corpus manifest CSV (`doc_id,party_id,election_id,path`). */
  manifestPath: string;
  /** Directory holding `<doc_id>.sentences.json` files. */
  sentencesDir: string;
  /** Model identifier; recorded verbatim as each file's producer. */
  model: string;
  /** One row per token position, or one row per sentence. */
  unit: "token" | "sentence";
  /** Maximum window length for token models (default 512). */
  maxSeqLen?: number;
  /** Documents encoded per batch; affects progress reporting only. */
  batchSize?: number;
  /** Output directory for the matrices and the index CSV. */
  outDir: string;
}

export interface ExportedDoc {
  docId: string;
  /** Matrix file name, relative to the output directory. */
  path: string;
  rows: number;
}

export interface ExportResult {
  indexPath: string;
  producer: string;
  dim: number;
  docs: ExportedDoc[];
}

export const DEFAULT_MAX_SEQ_LEN = 512;
export const DEFAULT_BATCH_SIZE = 16;

function csvField(value: string): string {
  if (/[",\r\n]/.test(value)) {
    return `"${value.replace(/"/g, '""')}"`;
  }
  return value;
}

function fileNameFor(docId: string, taken: Set<string>): string {
  const name = `${docId.replace(/[/\\:]/g, "_")}.psem`;
  if (taken.has(name)) {
    throw new Error(
      `document ids collide after path sanitising: ${JSON.stringify(docId)}`);
  }
  taken.add(name);
  return name;
}

function encodeDoc(
  model: EncoderModel,
  unit: "token" | "sentence",
  maxSeqLen: number,
  sentences: string[],
): Float64Array[] {
  if (unit === "sentence") {
    return sentences.map((sentence) => encodeSentence(model, sentence));
  }
  const tokens = sentences.flatMap((sentence) => tokenize(sentence));
  return assembleRows(tokens.length, maxSeqLen, (start, end) =>
    encodeTokenWindow(model, tokens.slice(start, end)));
}

export function runExport(
  job: ExportJob,
  log: (message: string) => void = () => {},
): ExportResult {
  const model = resolveModel(job.model);
  if (job.unit === "sentence" && model.kind !== "sentence") {
    throw new Error(
      `model ${model.id} embeds tokens; unit "sentence" needs a sentence encoder`);
  }
  if (job.unit === "token" && model.kind !== "token") {
    throw new Error(
      `model ${model.id} pools sentences; unit "token" needs a token encoder`);
  }
  const maxSeqLen = job.maxSeqLen ?? DEFAULT_MAX_SEQ_LEN;
  const batchSize = job.batchSize ?? DEFAULT_BATCH_SIZE;
  if (batchSize < 1) {
    throw new Error(`batch size must be positive, got ${batchSize}`);
  }

  const manifest = readManifest(job.manifestPath);
  mkdirSync(job.outDir, { recursive: true });
  const taken = new Set<string>();
  const docs: ExportedDoc[] = [];

  for (let lo = 0; lo < manifest.length; lo += batchSize) {
    const batch = manifest.slice(lo, lo + batchSize);
    for (const entry of batch) {
      const sentencePath = join(job.sentencesDir, `${entry.docId}.sentences.json`);
      let sentences: string[];
      try {
        const list = readSentenceList(sentencePath);
        if (list.docId !== entry.docId) {
          throw new Error(
            `file names ${JSON.stringify(entry.docId)} but contains ` +
            `${JSON.stringify(list.docId)}`);
        }
        sentences = list.sentences;
      } catch (err) {
        throw new Error(
          `doc ${JSON.stringify(entry.docId)}: ${(err as Error).message}`);
      }
      const rows = encodeDoc(model, job.unit, maxSeqLen, sentences);
      for (const row of rows) {
        for (const value of row) {
          if (!Number.isFinite(value)) {
            throw new Error(
              `doc ${JSON.stringify(entry.docId)}: non-finite embedding value`);
          }
        }
      }
      const name = fileNameFor(entry.docId, taken);
      writePsem(join(job.outDir, name), {
        producer: model.id,
        dim: model.dim,
        rows,
      });
      docs.push({ docId: entry.docId, path: name, rows: rows.length });
    }
    log(`encoded ${Math.min(lo + batchSize, manifest.length)}/${manifest.length} documents`);
  }

  const indexPath = join(job.outDir, "index.csv");
  const lines = ["doc_id,producer,path"];
  for (const doc of docs) {
    lines.push([doc.docId, model.id, doc.path].map(csvField).join(","));
  }
  const tmp = `${indexPath}.tmp`;
  writeFileSync(tmp, lines.join("\n") + "\n", "utf-8");
  renameSync(tmp, indexPath);

  return { indexPath, producer: model.id, dim: model.dim, docs };
}
