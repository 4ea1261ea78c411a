/**
 * Per-document sentence lists, as produced by `progsim export-sentences`:
 * one `<doc_id>.sentences.json` per document containing
 * `{"doc_id": ..., "sentences": [...]}`.  These files are the contract
 * boundary: the exporter never re-segments text, so row counts line up
 * with the pipeline's own sentence counts by construction.
 */
import { readFileSync } from "node:fs";

export interface SentenceList {
  docId: string;
  sentences: string[];
}

export function readSentenceList(path: string): SentenceList {
  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`${path}: unreadable sentence list (${(err as Error).message})`);
  }
  if (typeof parsed !== "object" || parsed === null) {
    throw new Error(`${path}: sentence list must be a JSON object`);
  }
  const record = parsed as Record<string, unknown>;
  const docId = record["doc_id"];
  const sentences = record["sentences"];
  if (typeof docId !== "string" || docId.length === 0) {
    throw new Error(`${path}: missing or empty "doc_id"`);
  }
  if (!Array.isArray(sentences) || sentences.some((s) => typeof s !== "string")) {
    throw new Error(`${path}: "sentences" must be an array of strings`);
  }
  return { docId, sentences: sentences as string[] };
}
