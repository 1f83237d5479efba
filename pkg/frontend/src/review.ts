/**
 * Instructor review dashboard.
 *
 * The grid mirrors the draft model line for line. Verdicts come from a
 * dropdown; the answer editor unlocks only under a FALSE verdict, which
 * is the one case where the service accepts a changed answer. Saving
 * re-serializes dirty rows only, so a save with no edits sends back the
 * exact bytes the draft endpoint returned. Publish stays disabled while
 * any row still carries the placeholder; the server enforces the same
 * rule, and its diagnostics are rendered verbatim when it objects.
 */

import { ApiError, type VirtualTaClient } from "./api";
import {
  PLACEHOLDER,
  hasPlaceholderRows,
  parseModelJsonl,
  serializeModelJsonl,
  serializeRow,
  type Flag,
  type ModelRow,
} from "./jsonl";

const VERDICT_OPTIONS: ReadonlyArray<{ value: Flag; label: string }> = [
  { value: PLACEHOLDER, label: "unreviewed" },
  { value: "TRUE", label: "TRUE" },
  { value: "FALSE", label: "FALSE" },
  { value: "PARTIAL", label: "PARTIAL" },
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export interface GridRow {
  model: ModelRow;
  answerInput: HTMLTextAreaElement;
  verdictSelect: HTMLSelectElement;
  tr: HTMLTableRowElement;
}

export class ReviewDashboard {
  rows: GridRow[] = [];

  private readonly table: HTMLTableElement;
  private readonly tbody: HTMLTableSectionElement;
  private readonly saveButton: HTMLButtonElement;
  private readonly publishButton: HTMLButtonElement;
  private readonly statusEl: HTMLDivElement;
  private readonly diagnosticsEl: HTMLDivElement;

  constructor(
    readonly root: HTMLElement,
    private readonly client: VirtualTaClient,
    private readonly courseId: string,
  ) {
    root.classList.add("review");
    this.table = el("table", "review-grid");
    const head = this.table.createTHead().insertRow();
    for (const title of ["Question", "Answer", "Verdict"]) {
      head.append(el("th", undefined, title));
    }
    this.tbody = this.table.createTBody();

    this.saveButton = el("button", "review-save", "Save review");
    this.saveButton.type = "button";
    this.saveButton.addEventListener("click", () => void this.save());
    this.publishButton = el("button", "review-publish", "Publish");
    this.publishButton.type = "button";
    this.publishButton.addEventListener("click", () => void this.publish());

    this.statusEl = el("div", "review-status");
    this.diagnosticsEl = el("div", "review-diagnostics");

    const actions = el("div", "review-actions");
    actions.append(this.saveButton, this.publishButton);
    root.append(this.table, actions, this.statusEl, this.diagnosticsEl);
    this.refreshButtons();
  }

  get publishDisabled(): boolean {
    return this.publishButton.disabled;
  }

  get status(): string {
    return this.statusEl.textContent ?? "";
  }

  get diagnostics(): HTMLDivElement {
    return this.diagnosticsEl;
  }

  /** The PUT body the current grid state would produce. */
  serialize(): string {
    return serializeModelJsonl(this.rows.map((row) => row.model));
  }

  async load(): Promise<void> {
    const jsonl = await this.client.getDraft(this.courseId);
    this.setRows(parseModelJsonl(jsonl));
    this.setStatus(`${this.rows.length} entries loaded`);
    this.clearDiagnostics();
  }

  private setRows(models: ModelRow[]): void {
    this.tbody.replaceChildren();
    this.rows = models.map((model) => this.buildRow(model));
    this.refreshButtons();
  }

  private buildRow(model: ModelRow): GridRow {
    const tr = this.tbody.insertRow();
    tr.append(el("td", "cell-question", model.question));

    const answerCell = el("td", "cell-answer");
    const answerInput = document.createElement("textarea");
    answerInput.value = model.answer;
    answerCell.append(answerInput);
    tr.append(answerCell);

    const verdictCell = el("td", "cell-verdict");
    const verdictSelect = document.createElement("select");
    for (const option of VERDICT_OPTIONS) {
      const node = el("option", undefined, option.label);
      node.value = option.value;
      verdictSelect.append(node);
    }
    verdictSelect.value = model.flag;
    verdictCell.append(verdictSelect);
    tr.append(verdictCell);

    const row: GridRow = { model, answerInput, verdictSelect, tr };
    verdictSelect.addEventListener("change", () => {
      this.setVerdict(row, verdictSelect.value as Flag);
    });
    answerInput.addEventListener("input", () => {
      row.model.answer = answerInput.value;
      row.model.dirty = true;
      tr.classList.add("dirty");
    });
    this.applyVerdictState(row);
    return row;
  }

  /** Change a row's verdict, mirroring the dropdown handler (test hook). */
  setVerdict(row: GridRow, flag: Flag): void {
    row.model.flag = flag;
    row.model.dirty = true;
    row.verdictSelect.value = flag;
    row.tr.classList.add("dirty");
    this.applyVerdictState(row);
    this.refreshButtons();
  }

  setAnswer(row: GridRow, answer: string): void {
    row.model.answer = answer;
    row.model.dirty = true;
    row.answerInput.value = answer;
    row.tr.classList.add("dirty");
  }

  private applyVerdictState(row: GridRow): void {
    const editable = row.model.flag === "FALSE";
    row.answerInput.disabled = !editable;
    row.answerInput.required = editable;
    row.tr.classList.toggle("needs-correction", editable);
  }

  private refreshButtons(): void {
    this.publishButton.disabled =
      this.rows.length === 0 || hasPlaceholderRows(this.rows.map((r) => r.model));
    this.saveButton.disabled = this.rows.length === 0;
  }

  async save(): Promise<boolean> {
    this.clearDiagnostics();
    try {
      const counts = await this.client.putModel(this.courseId, this.serialize());
      for (const row of this.rows) {
        row.model.raw = serializeRow(row.model);
        row.model.dirty = false;
        row.tr.classList.remove("dirty");
      }
      this.setStatus(
        `saved: ${counts.reviewed} reviewed, ${counts.unreviewed} to go`,
      );
      return true;
    } catch (error) {
      if (error instanceof ApiError) {
        this.showDiagnostics(error);
        return false;
      }
      throw error;
    }
  }

  async publish(): Promise<boolean> {
    this.clearDiagnostics();
    try {
      const result = await this.client.publish(this.courseId);
      this.setStatus(`published version ${result.version}`);
      this.refreshButtons();
      return true;
    } catch (error) {
      if (error instanceof ApiError) {
        this.showDiagnostics(error);
        return false;
      }
      throw error;
    }
  }

  private setStatus(text: string): void {
    this.statusEl.textContent = text;
  }

  private clearDiagnostics(): void {
    this.diagnosticsEl.replaceChildren();
  }

  /** Render a service error verbatim: the message plus any detail lists. */
  private showDiagnostics(error: ApiError): void {
    this.clearDiagnostics();
    this.diagnosticsEl.append(
      el("div", "diagnostic-status", `service rejected the request (${error.status})`),
      el("div", "diagnostic-message", error.detail.message),
    );
    if (error.detail.line !== undefined) {
      this.diagnosticsEl.append(el("div", "diagnostic-line", `line ${error.detail.line}`));
    }
    if (error.detail.question !== undefined) {
      this.diagnosticsEl.append(el("div", "diagnostic-question", error.detail.question));
    }
    for (const [label, values] of [
      ["questions", error.detail.questions],
      ["missing", error.detail.missing],
      ["extra", error.detail.extra],
    ] as const) {
      if (!values || values.length === 0) continue;
      const list = el("ul", `diagnostic-${label}`);
      for (const value of values) list.append(el("li", undefined, value));
      this.diagnosticsEl.append(list);
    }
  }
}
