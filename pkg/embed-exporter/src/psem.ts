/**
 * PSEM v1: a minimal binary container for one document's embedding matrix.
 *
 * Layout (all integers little-endian):
 *   bytes 0..3    magic "PSEM"
 *   uint32        version (always 1)
 *   uint32        dim  (columns)
 *   uint32        m    (rows)
 *   uint16        byte length of the producer string
 *   bytes         producer, UTF-8
 *   m*dim*4 bytes row-major float32 payload
 */
import { mkdirSync, readFileSync, renameSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

export const PSEM_MAGIC = "PSEM";
export const PSEM_VERSION = 1;

export interface PsemMatrix {
  producer: string;
  dim: number;
  rows: Float64Array[];
}

export function encodePsem(matrix: PsemMatrix): Buffer {
  const { producer, dim, rows } = matrix;
  const producerBytes = Buffer.from(producer, "utf-8");
  if (producerBytes.length > 0xffff) {
    throw new Error(`producer string too long (${producerBytes.length} bytes)`);
  }
  const m = rows.length;
  const headerLen = 4 + 4 + 4 + 4 + 2 + producerBytes.length;
  const buf = Buffer.alloc(headerLen + m * dim * 4);
  buf.write(PSEM_MAGIC, 0, "ascii");
  buf.writeUInt32LE(PSEM_VERSION, 4);
  buf.writeUInt32LE(dim, 8);
  buf.writeUInt32LE(m, 12);
  buf.writeUInt16LE(producerBytes.length, 16);
  producerBytes.copy(buf, 18);
  const view = new DataView(buf.buffer, buf.byteOffset + headerLen);
  for (let i = 0; i < m; i++) {
    const row = rows[i];
    if (row.length !== dim) {
      throw new Error(`row ${i} has ${row.length} values, expected ${dim}`);
    }
    for (let j = 0; j < dim; j++) {
      const value = row[j];
      if (!Number.isFinite(value)) {
        throw new Error(`non-finite value at row ${i}, column ${j}`);
      }
      view.setFloat32((i * dim + j) * 4, value, true);
    }
  }
  return buf;
}

/** Write atomically: a reader never observes a half-written file. */
export function writePsem(path: string, matrix: PsemMatrix): void {
  mkdirSync(dirname(path), { recursive: true });
  const tmp = `${path}.tmp`;
  writeFileSync(tmp, encodePsem(matrix));
  renameSync(tmp, path);
}

export interface PsemHeader {
  producer: string;
  dim: number;
  m: number;
}

export function readPsem(path: string): PsemHeader & { values: Float32Array } {
  const buf = readFileSync(path);
  if (buf.length < 18 || buf.toString("ascii", 0, 4) !== PSEM_MAGIC) {
    throw new Error(`${path}: not a PSEM file`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== PSEM_VERSION) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const dim = buf.readUInt32LE(8);
  const m = buf.readUInt32LE(12);
  const producerLen = buf.readUInt16LE(16);
  const payloadStart = 18 + producerLen;
  const producer = buf.toString("utf-8", 18, payloadStart);
  const expected = payloadStart + m * dim * 4;
  if (buf.length !== expected) {
    throw new Error(`${path}: expected ${expected} bytes, found ${buf.length}`);
  }
  const values = new Float32Array(m * dim);
  const view = new DataView(buf.buffer, buf.byteOffset + payloadStart);
  for (let k = 0; k < m * dim; k++) {
    values[k] = view.getFloat32(k * 4, true);
  }
  return { producer, dim, m, values };
}
