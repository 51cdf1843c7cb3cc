/**
 * Wire types for the coreference session protocol.
 *
 * These mirror the JSON shapes the session service emits; the component
 * never reaches into engine internals, only these payloads.
 */

export type Mode = "annotate" | "review" | "tutorial" | "guided";

export interface SpanJson {
  doc: number;
  start: number;
  end: number;
}

export interface SpanView extends SpanJson {
  text: string;
}

export interface DocumentView {
  id: string;
  tokens: string[];
}

export interface BankEntry {
  id: string;
  label: string;
  size: number;
  selected: boolean;
}

export interface CandidateEntry {
  id: string;
  label: string;
}

export interface PromptView {
  text: string;
  target: string;
}

export interface ViewModel {
  mode: Mode;
  version: number;
  complete: boolean;
  documents: DocumentView[];
  /** Per document, one cluster id (or null) per token. */
  memberships: (string | null)[][];
  current: SpanView | null;
  pending_count: number;
  bank: BankEntry[];
  candidates: CandidateEntry[];
  prompt: PromptView | null;
  feedback: string | null;
  toast: string | null;
}

export interface ViewDelta {
  regions: string[];
  view: ViewModel;
}

export interface RequestMessage {
  session_id: string;
  seq: number;
  op: string;
  params: Record<string, unknown>;
}

export interface OkResponse {
  seq: number;
  ok: true;
  version: number;
  result: Record<string, unknown>;
  view_delta: ViewDelta;
}

export interface ErrorResponse {
  seq: number;
  ok: false;
  error: { code: string; message: string };
}

export type SessionResponse = OkResponse | ErrorResponse;

export interface OpenResult {
  session_id: string;
  view_delta: ViewDelta;
}

export type SessionConfig = { mode: Mode } & Record<string, unknown>;

/** Anything able to carry protocol messages to a session service. */
export interface Transport {
  open(config: SessionConfig): Promise<OpenResult>;
  send(message: RequestMessage): Promise<SessionResponse>;
  exportSession(sessionId: string, format: string): Promise<string>;
}

/** Default transport: the REST binding of the session service. */
export class HttpTransport implements Transport {
  constructor(private readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async open(config: SessionConfig): Promise<OpenResult> {
    const response = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    if (!response.ok) throw new Error(await describeFailure(response));
    return (await response.json()) as OpenResult;
  }

  async send(message: RequestMessage): Promise<SessionResponse> {
    const { session_id, ...body } = message;
    const response = await fetch(
      this.url(`/sessions/${session_id}/messages`),
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    if (!response.ok) throw new Error(await describeFailure(response));
    return (await response.json()) as SessionResponse;
  }

  async exportSession(sessionId: string, format: string): Promise<string> {
    const response = await fetch(
      this.url(`/sessions/${sessionId}/export?format=${format}`),
    );
    if (!response.ok) throw new Error(await describeFailure(response));
    return await response.text();
  }
}

async function describeFailure(response: {
  status: number;
  text(): Promise<string>;
}): Promise<string> {
  const body = await response.text();
  try {
    const detail = JSON.parse(body).detail;
    if (detail && detail.message) return `${detail.code}: ${detail.message}`;
  } catch {
    /* not JSON — fall through to the raw body */
  }
  return `HTTP ${response.status}: ${body}`;
}
