/**
 * Session client: owns the sequence counter and keeps at most one
 * action in flight, so messages reach the service strictly ordered.
 */
import type {
  SessionConfig,
  SessionResponse,
  Transport,
  ViewDelta,
  ViewModel,
} from "./protocol.js";

export class SessionClient {
  sessionId = "";
  view: ViewModel | null = null;
  onView: ((delta: ViewDelta) => void) | null = null;

  private seq = 0;
  private chain: Promise<unknown> = Promise.resolve();

  constructor(readonly transport: Transport) {}

  async open(config: SessionConfig): Promise<ViewModel> {
    const opened = await this.transport.open(config);
    this.sessionId = opened.session_id;
    this.view = opened.view_delta.view;
    this.onView?.(opened.view_delta);
    return this.view;
  }

  /**
   * Send one action. Calls made while another action is in flight are
   * queued and dispatched in call order, each with a fresh seq.
   */
  apply(
    op: string,
    params: Record<string, unknown> = {},
  ): Promise<SessionResponse> {
    const turn = this.chain.then(async () => {
      const response = await this.transport.send({
        session_id: this.sessionId,
        seq: ++this.seq,
        op,
        params,
      });
      if (response.ok) {
        this.view = response.view_delta.view;
        this.onView?.(response.view_delta);
      }
      return response;
    });
    // keep the chain alive even when a send rejects
    this.chain = turn.catch(() => undefined);
    return turn;
  }

  exportPayload(format: string): Promise<string> {
    return this.transport.exportSession(this.sessionId, format);
  }
}
