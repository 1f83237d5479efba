/**
 * Student chat widget.
 *
 * The transcript is append-only and at most one request is in flight at
 * a time. Answer bubbles show the service's answer string untouched;
 * not-found answers get a distinct style plus a contact-your-instructor
 * hint in a separate element so the answer text itself stays byte-equal
 * to what the service sent.
 */

import { ApiError, type AskResponse, type VirtualTaClient } from "./api";

export interface TranscriptEntry {
  question: string;
  answer: string;
  found: boolean;
  sentiment: string;
  partial: boolean;
}

const FALLBACK_LANGUAGES = ["en", "es", "fr", "de"];
export const NOT_FOUND_HINT =
  "The course materials do not cover this yet. Please contact your instructor.";

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

export class ChatWidget {
  readonly transcript: TranscriptEntry[] = [];
  pending = false;

  private readonly transcriptEl: HTMLDivElement;
  private readonly form: HTMLFormElement;
  private readonly langSelect: HTMLSelectElement;
  private readonly input: HTMLInputElement;
  private readonly sendButton: HTMLButtonElement;

  constructor(
    readonly root: HTMLElement,
    private readonly client: VirtualTaClient,
    private readonly courseId: string,
  ) {
    root.classList.add("chat");
    this.transcriptEl = el("div", "chat-transcript");
    this.form = el("form", "chat-form");
    this.langSelect = el("select", "chat-lang");
    this.input = el("input", "chat-input");
    this.input.type = "text";
    this.input.placeholder = "Ask about the course";
    this.sendButton = el("button", "chat-send", "Send");
    this.sendButton.type = "submit";

    this.setLanguages(FALLBACK_LANGUAGES);
    this.form.append(this.langSelect, this.input, this.sendButton);
    root.append(this.transcriptEl, this.form);

    this.input.addEventListener("input", () => this.refreshSendState());
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.send();
    });
    this.refreshSendState();
  }

  /** Replace the selector options with the gateway-advertised tags. */
  setLanguages(tags: readonly string[]): void {
    const previous = this.langSelect.value || "auto";
    this.langSelect.replaceChildren();
    const auto = el("option", undefined, "auto");
    auto.value = "auto";
    this.langSelect.append(auto);
    for (const tag of tags) {
      const option = el("option", undefined, tag);
      option.value = tag;
      this.langSelect.append(option);
    }
    this.langSelect.value = [...this.langSelect.options].some((o) => o.value === previous)
      ? previous
      : "auto";
  }

  async loadLanguages(): Promise<void> {
    try {
      const health = await this.client.health();
      if (health.languages.length) this.setLanguages(health.languages);
    } catch {
      // keep the fallback tags; the selector is a convenience, not a gate
    }
  }

  get language(): string {
    return this.langSelect.value;
  }

  set language(tag: string) {
    this.langSelect.value = tag;
  }

  get inputText(): string {
    return this.input.value;
  }

  set inputText(text: string) {
    this.input.value = text;
    this.refreshSendState();
  }

  get sendDisabled(): boolean {
    return this.sendButton.disabled;
  }

  private refreshSendState(): void {
    this.sendButton.disabled = this.pending || this.input.value.trim() === "";
  }

  async send(): Promise<AskResponse | undefined> {
    const question = this.input.value.trim();
    if (this.pending || question === "") return undefined;

    this.pending = true;
    this.refreshSendState();
    this.appendQuestion(question);
    this.input.value = "";
    try {
      const response = await this.client.ask(this.courseId, question, this.language);
      this.appendAnswer(question, response);
      return response;
    } catch (error) {
      if (error instanceof ApiError) {
        this.appendError(error.detail.message);
        return undefined;
      }
      throw error;
    } finally {
      this.pending = false;
      this.refreshSendState();
    }
  }

  private appendQuestion(question: string): void {
    this.transcriptEl.append(el("div", "bubble question", question));
  }

  private appendAnswer(question: string, response: AskResponse): void {
    this.transcript.push({
      question,
      answer: response.answer,
      found: response.found,
      sentiment: response.sentiment,
      partial: response.partial_flag,
    });

    const bubble = el("div", response.found ? "bubble answer" : "bubble answer not-found");
    bubble.append(el("div", "answer-text", response.answer));

    const badges = el("div", "badges");
    badges.append(
      el("span", `badge sentiment-${response.sentiment.toLowerCase()}`, response.sentiment),
    );
    if (response.partial_flag) badges.append(el("span", "badge partial", "PARTIAL"));
    bubble.append(badges);

    if (!response.found) bubble.append(el("div", "hint", NOT_FOUND_HINT));
    this.transcriptEl.append(bubble);
  }

  private appendError(message: string): void {
    this.transcriptEl.append(el("div", "bubble error", message));
  }
}
