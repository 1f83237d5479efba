/**
 * Typed client for the virtualta service HTTP API.
 *
 * The client never invents or rewrites answer text: response bodies are
 * surfaced exactly as the service sent them so the UI can render them
 * byte-equal. Model JSONL travels as opaque text for the same reason.
 */

export interface AskResponse {
  answer: string;
  found: boolean;
  partial_flag: boolean;
  sentiment: "POSITIVE" | "NEUTRAL" | "NEGATIVE";
  model_version: number;
  latency_ms: number;
}

export interface HealthResponse {
  status: string;
  gateway: string[];
  languages: string[];
}

export interface ReviewCounts {
  entries: number;
  reviewed: number;
  unreviewed: number;
}

export interface PublishResponse {
  course_id: string;
  version: number;
}

/** Error detail shape used by every non-2xx service response. */
export interface ErrorDetail {
  message: string;
  line?: number;
  question?: string;
  questions?: string[];
  missing?: string[];
  extra?: string[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ErrorDetail,
  ) {
    super(detail.message);
    this.name = "ApiError";
  }
}

export interface ClientOptions {
  baseUrl?: string;
  token?: string;
  fetchFn?: typeof fetch;
}

function errorDetail(payload: unknown): ErrorDetail {
  if (payload && typeof payload === "object" && "detail" in payload) {
    const detail = (payload as { detail: unknown }).detail;
    if (detail && typeof detail === "object" && "message" in detail) {
      return detail as ErrorDetail;
    }
    if (typeof detail === "string") {
      return { message: detail };
    }
  }
  return { message: "unexpected service error" };
}

export class VirtualTaClient {
  private readonly baseUrl: string;
  private readonly token: string;
  private readonly fetchFn: typeof fetch;

  constructor(options: ClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.token = options.token ?? "";
    // Bind so a bare `fetch` keeps its global receiver in browsers.
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
  }

  private async request(
    method: string,
    path: string,
    body?: string,
    contentType?: string,
  ): Promise<Response> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (contentType) headers["Content-Type"] = contentType;
    return this.fetchFn(this.baseUrl + path, { method, headers, body });
  }

  private async requestJson<T>(
    method: string,
    path: string,
    body?: string,
    contentType?: string,
  ): Promise<T> {
    const response = await this.request(method, path, body, contentType);
    const payload: unknown = await response.json();
    if (!response.ok) throw new ApiError(response.status, errorDetail(payload));
    return payload as T;
  }

  health(): Promise<HealthResponse> {
    return this.requestJson("GET", "/health");
  }

  /**
   * Ask a question. A 503 still carries a well-formed body (the degraded
   * not-found case), so it is returned rather than thrown.
   */
  async ask(courseId: string, question: string, lang: string): Promise<AskResponse> {
    const body = JSON.stringify({ question, lang });
    const response = await this.request(
      "POST",
      `/courses/${encodeURIComponent(courseId)}/ask`,
      body,
      "application/json",
    );
    const payload: unknown = await response.json();
    if (!response.ok && response.status !== 503) {
      throw new ApiError(response.status, errorDetail(payload));
    }
    return payload as AskResponse;
  }

  /** Fetch the draft model as raw JSONL text. */
  async getDraft(courseId: string): Promise<string> {
    const response = await this.request(
      "GET",
      `/courses/${encodeURIComponent(courseId)}/model/draft`,
    );
    if (!response.ok) {
      throw new ApiError(response.status, errorDetail(await response.json()));
    }
    return response.text();
  }

  /** PUT the edited model JSONL exactly as given. */
  putModel(courseId: string, jsonl: string): Promise<ReviewCounts> {
    return this.requestJson(
      "PUT",
      `/courses/${encodeURIComponent(courseId)}/model`,
      jsonl,
      "application/x-ndjson",
    );
  }

  publish(courseId: string): Promise<PublishResponse> {
    return this.requestJson(
      "POST",
      `/courses/${encodeURIComponent(courseId)}/publish`,
    );
  }

  async getPublished(courseId: string, version?: number): Promise<string> {
    const query = version === undefined ? "" : `?version=${version}`;
    const response = await this.request(
      "GET",
      `/courses/${encodeURIComponent(courseId)}/model/published${query}`,
    );
    if (!response.ok) {
      throw new ApiError(response.status, errorDetail(await response.json()));
    }
    return response.text();
  }
}
