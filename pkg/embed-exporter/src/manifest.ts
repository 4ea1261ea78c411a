/**
 * Corpus manifest reader.  The manifest is the pipeline's own CSV with
 * header `doc_id,party_id,election_id,path`; the exporter only needs the
 * document identifiers (and keeps their order for the output index).
 */
import { readFileSync } from "node:fs";

export interface ManifestRow {
  docId: string;
  partyId: string;
  electionId: string;
  path: string;
}

export const MANIFEST_HEADER = ["doc_id", "party_id", "election_id", "path"];

/** Split one CSV record, honouring double-quoted fields with "" escapes. */
export function splitCsvLine(line: string): string[] {
  const fields: string[] = [];
  let field = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"' && field === "") {
      quoted = true;
    } else if (ch === ",") {
      fields.push(field);
      field = "";
    } else {
      field += ch;
    }
  }
  fields.push(field);
  return fields;
}

export function readManifest(path: string): ManifestRow[] {
  const text = readFileSync(path, "utf-8");
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty manifest`);
  }
  const header = splitCsvLine(lines[0]);
  if (header.join(",") !== MANIFEST_HEADER.join(",")) {
    throw new Error(
      `${path}: manifest header must be ${MANIFEST_HEADER.join(",")}`);
  }
  const rows: ManifestRow[] = [];
  const seen = new Set<string>();
  for (const line of lines.slice(1)) {
    const fields = splitCsvLine(line);
    if (fields.length !== 4) {
      throw new Error(`${path}: bad manifest row: ${line}`);
    }
    const [docId, partyId, electionId, docPath] = fields;
    if (seen.has(docId)) {
      throw new Error(`${path}: duplicate doc_id ${JSON.stringify(docId)}`);
    }
    seen.add(docId);
    rows.push({ docId, partyId, electionId, path: docPath });
  }
  return rows;
}
