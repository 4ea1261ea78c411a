export {
  MODELS,
  encodeSentence,
  encodeTokenWindow,
  resolveModel,
  tokenize,
  type EncoderKind,
  type EncoderModel,
} from "./encoder.js";
export {
  DEFAULT_BATCH_SIZE,
  DEFAULT_MAX_SEQ_LEN,
  runExport,
  type ExportJob,
  type ExportResult,
  type ExportedDoc,
} from "./export.js";
export {
  MANIFEST_HEADER,
  readManifest,
  splitCsvLine,
  type ManifestRow,
} from "./manifest.js";
export {
  PSEM_MAGIC,
  PSEM_VERSION,
  encodePsem,
  readPsem,
  writePsem,
  type PsemHeader,
  type PsemMatrix,
} from "./psem.js";
export { readSentenceList, type SentenceList } from "./sentences.js";
export { assembleRows, planWindows, type WindowSlice } from "./windows.js";
