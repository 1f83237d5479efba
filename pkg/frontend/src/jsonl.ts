/**
 * Knowledge-model JSONL handling for the review grid.
 *
 * Untouched rows keep their original line text, so a load followed by a
 * save with no edits produces a PUT body byte-equal to the GET body.
 * Only rows the instructor actually changed are re-serialized, using the
 * same canonical shape the service emits: the three keys in QUESTION,
 * ANSWER, isTrue order, compact separators, non-ASCII kept literal.
 */

export const PLACEHOLDER = "Change this to TRUE or FALSE or PARTIAL";

export type Verdict = "TRUE" | "FALSE" | "PARTIAL";
export type Flag = Verdict | typeof PLACEHOLDER;

export interface ModelRow {
  question: string;
  answer: string;
  flag: Flag;
  /** The line exactly as received; reused verbatim while the row is clean. */
  raw: string;
  dirty: boolean;
}

const FLAGS: readonly string[] = ["TRUE", "FALSE", "PARTIAL", PLACEHOLDER];

export function parseModelJsonl(text: string): ModelRow[] {
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  return lines.map((line, index) => {
    let payload: unknown;
    try {
      payload = JSON.parse(line);
    } catch {
      throw new Error(`line ${index + 1}: not valid JSON`);
    }
    if (payload === null || typeof payload !== "object" || Array.isArray(payload)) {
      throw new Error(`line ${index + 1}: expected a JSON object`);
    }
    const entry = payload as Record<string, unknown>;
    const question = entry["QUESTION"];
    const answer = entry["ANSWER"];
    const flag = entry["isTrue"];
    if (typeof question !== "string" || typeof answer !== "string" || typeof flag !== "string") {
      throw new Error(`line ${index + 1}: QUESTION, ANSWER and isTrue must be strings`);
    }
    if (!FLAGS.includes(flag)) {
      throw new Error(`line ${index + 1}: unknown isTrue value ${JSON.stringify(flag)}`);
    }
    return { question, answer, flag: flag as Flag, raw: line, dirty: false };
  });
}

export function serializeRow(row: ModelRow): string {
  if (!row.dirty) return row.raw;
  return JSON.stringify({ QUESTION: row.question, ANSWER: row.answer, isTrue: row.flag });
}

export function serializeModelJsonl(rows: readonly ModelRow[]): string {
  return rows.map(serializeRow).join("\n") + (rows.length ? "\n" : "");
}

/** Publish is allowed only once every row carries a real verdict. */
export function hasPlaceholderRows(rows: readonly ModelRow[]): boolean {
  return rows.some((row) => row.flag === PLACEHOLDER);
}
