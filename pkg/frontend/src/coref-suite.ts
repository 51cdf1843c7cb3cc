/**
 * `<coref-suite>` — embeddable annotation surface for coreference
 * sessions.
 *
 * The element owns no annotation state: it renders the session view
 * model verbatim and turns keyboard chords and pointer clicks into
 * protocol messages. Task config arrives as a JSON attribute so the
 * element drops into crowdsourcing iframes without script glue:
 *
 *   <coref-suite mode="annotate" service-url="/api"
 *                task='{"corpus": ..., "mentions": ...}'></coref-suite>
 *
 * Tests (or embedders with their own plumbing) inject a `transport`
 * property instead of `service-url`.
 */
import { LitElement, css, html, nothing } from "lit";

import { SessionClient } from "./client.js";
import { chordToAction, normalizeSelection } from "./keymap.js";
import type { ChordContext } from "./keymap.js";
import type {
  Mode,
  SessionResponse,
  SpanJson,
  Transport,
  ViewModel,
} from "./protocol.js";
import { HttpTransport } from "./protocol.js";

const TOAST_MS = 2500;

export class CorefSuite extends LitElement {
  static properties = {
    task: { type: String },
    mode: { type: String },
    serviceUrl: { type: String, attribute: "service-url" },
    _view: { state: true },
    _localSelected: { state: true },
    _selection: { state: true },
    _feedbackDismissed: { state: true },
    _toastVisible: { state: true },
    _banner: { state: true },
    _notice: { state: true },
  };

  declare task: string;
  declare mode: Mode;
  declare serviceUrl: string;

  client: SessionClient | null = null;
  /** review mode: "span" while the span is under decision. */
  reviewPhase: "span" | "cluster" = "span";

  declare _view: ViewModel | null;
  declare _localSelected: string | null;
  declare _selection: SpanJson | null;
  declare _feedbackDismissed: boolean;
  declare _toastVisible: boolean;
  declare _banner: string | null;
  declare _notice: string | null;

  private _sweepAnchor: { doc: number; index: number } | null = null;
  private _toastTimer: ReturnType<typeof setTimeout> | null = null;
  private _transport: Transport | null = null;

  /** Injectable transport; assigning one (re)tries opening the session. */
  get transport(): Transport | null {
    return this._transport;
  }

  set transport(transport: Transport | null) {
    this._transport = transport;
    void this._openSession();
  }

  constructor() {
    super();
    this.task = "";
    this.mode = "annotate";
    this.serviceUrl = "";
    this._view = null;
    this._localSelected = null;
    this._selection = null;
    this._feedbackDismissed = false;
    this._toastVisible = false;
    this._banner = null;
    this._notice = null;
  }

  static styles = css`
    :host {
      display: block;
      font-family: system-ui, sans-serif;
      outline: none;
    }
    .suite {
      position: relative;
    }
    .pane {
      line-height: 2;
      padding: 0.5rem;
    }
    .tok {
      padding: 0 0.12em;
      border-radius: 2px;
      cursor: default;
    }
    .tok.mention {
      background: #eee;
      cursor: pointer;
    }
    .tok.current {
      text-decoration: underline;
      text-decoration-color: rebeccapurple;
      text-decoration-thickness: 2px;
    }
    .tok.selected {
      background: #cfe3ff;
    }
    .candidates {
      display: flex;
      gap: 0.4rem;
      padding: 0.25rem 0.5rem;
    }
    .chip.candidate {
      border: 1px solid rebeccapurple;
      color: rebeccapurple;
      border-radius: 1em;
      padding: 0 0.6em;
      background: white;
      cursor: pointer;
    }
    .bank {
      display: flex;
      flex-wrap: wrap;
      gap: 0.4rem;
      padding: 0.5rem;
      border-top: 1px solid #ddd;
    }
    .chip.bank-entry {
      border: 1px solid #888;
      border-radius: 1em;
      padding: 0 0.6em;
      background: white;
      cursor: pointer;
    }
    .chip.bank-entry.selected {
      background: #cfe3ff;
      border-color: #2a6fdb;
    }
    .actions {
      display: inline-flex;
      gap: 0.4rem;
      margin-left: 1rem;
    }
    .submit {
      margin-left: auto;
    }
    .overlay {
      position: absolute;
      inset: 0;
      display: grid;
      place-items: center;
      background: rgba(0, 0, 0, 0.35);
    }
    .overlay[data-target="cluster_bank"] {
      place-items: end center;
    }
    .overlay[data-target="text_pane"] {
      place-items: start center;
    }
    .dialog {
      background: white;
      border-radius: 6px;
      padding: 1rem 1.5rem;
      max-width: 28rem;
    }
    .toast {
      position: fixed;
      bottom: 1rem;
      left: 50%;
      transform: translateX(-50%);
      background: #222;
      color: white;
      border-radius: 4px;
      padding: 0.4rem 1rem;
    }
    .banner,
    .notice {
      padding: 0.3rem 0.6rem;
    }
    .keys {
      padding: 0.25rem 0.5rem;
      font-size: 0.75rem;
      color: #666;
    }
    .banner {
      background: #b00020;
      color: white;
    }
    .notice {
      background: #fff3cd;
    }
  `;

  connectedCallback(): void {
    super.connectedCallback();
    this.tabIndex = 0;
    this.addEventListener("keydown", this._onKeydown);
    void this._openSession();
  }

  disconnectedCallback(): void {
    this.removeEventListener("keydown", this._onKeydown);
    if (this._toastTimer) clearTimeout(this._toastTimer);
    super.disconnectedCallback();
  }

  get view(): ViewModel | null {
    return this._view;
  }

  private async _openSession(): Promise<void> {
    if (this.client || (!this.transport && !this.serviceUrl)) return;
    const transport = this.transport ?? new HttpTransport(this.serviceUrl);
    this.client = new SessionClient(transport);
    this.client.onView = (delta) => this._takeView(delta.view);
    try {
      const config = this.task ? JSON.parse(this.task) : {};
      await this.client.open({ ...config, mode: this.mode });
    } catch (error) {
      this._banner = String(error);
    }
  }

  private _takeView(view: ViewModel): void {
    this._view = view;
    this._feedbackDismissed = false;
    this._notice = null;
    if (view.toast) {
      this._toastVisible = true;
      if (this._toastTimer) clearTimeout(this._toastTimer);
      this._toastTimer = setTimeout(() => {
        this._toastVisible = false;
      }, TOAST_MS);
    } else {
      this._toastVisible = false;
    }
  }

  /** Single entry point every user gesture funnels through. */
  async send(
    op: string,
    params: Record<string, unknown> = {},
  ): Promise<SessionResponse | null> {
    if (!this.client) return null;
    const response = await this.client.apply(op, params);
    if (!response.ok) {
      if (response.error.code === "conflict") {
        this._banner = `session out of sync — ${response.error.message}`;
      } else {
        this._notice = response.error.message;
      }
      return response;
    }
    if (this._view?.mode === "review") {
      if (op === "review") this.reviewPhase = "cluster";
      else this.reviewPhase = "span";
      if (op !== "review") this._localSelected = null;
    }
    this._selection = null;
    return response;
  }

  /** Token-range sweep used by the fix chord; exposed for embedders. */
  setTokenSelection(doc: number, a: number, b: number): void {
    this._selection = normalizeSelection(doc, a, b);
  }

  /** The cluster whose chip is highlighted, if any. */
  private _activeCluster(): string | null {
    const view = this._view;
    if (!view) return null;
    return view.mode === "review"
      ? this._localSelected
      : (view.bank.find((b) => b.selected)?.id ?? null);
  }

  private _chordContext(): ChordContext {
    const view = this._view;
    return {
      mode: view?.mode ?? this.mode,
      reviewPhase: this.reviewPhase,
      selectedCluster: this._activeCluster(),
      candidateCount: view?.candidates.length ?? 0,
      selection: this._selection,
    };
  }

  private _onKeydown = (event: KeyboardEvent): void => {
    if (this._feedbackOpen()) {
      if (event.key === "Enter" || event.key === "Escape") {
        this._feedbackDismissed = true;
      }
      event.preventDefault();
      return;
    }
    const action = chordToAction(
      { key: event.key, ctrlKey: event.ctrlKey },
      this._chordContext(),
    );
    if (!action) return;
    event.preventDefault();
    if (action.kind === "message") {
      void this.send(action.op, action.params);
    } else {
      this._navigateBank(action.direction);
    }
  };

  private _navigateBank(direction: -1 | 1): void {
    const view = this._view;
    if (!view || view.bank.length === 0) return;
    const ids = view.bank.map((b) => b.id);
    const currentId = this._activeCluster();
    const at = currentId ? ids.indexOf(currentId) : -1;
    const next =
      at < 0
        ? ids[direction === 1 ? 0 : ids.length - 1]
        : ids[(at + direction + ids.length) % ids.length];
    this._selectCluster(next);
  }

  private _selectCluster(clusterId: string): void {
    if (this._view?.mode === "review") {
      this._localSelected = clusterId;
    } else {
      void this.send("select", { cluster: clusterId });
    }
  }

  private _feedbackOpen(): boolean {
    return Boolean(this._view?.feedback) && !this._feedbackDismissed;
  }

  private async _submit(): Promise<void> {
    if (!this.client || !this._view?.complete) return;
    const mode = this._view.mode;
    const format = mode === "tutorial" || mode === "guided" ? "json" : "conll";
    const payload = await this.client.exportPayload(format);
    this.dispatchEvent(
      new CustomEvent("coref-complete", {
        detail: { sessionId: this.client.sessionId, format, payload },
        bubbles: true,
        composed: true,
      }),
    );
  }

  // -- pointer handlers ------------------------------------------------

  private _onTokenDown(doc: number, index: number): void {
    this._sweepAnchor = { doc, index };
  }

  private _onTokenUp(doc: number, index: number): void {
    const anchor = this._sweepAnchor;
    this._sweepAnchor = null;
    if (anchor && anchor.doc === doc && anchor.index !== index) {
      this.setTokenSelection(doc, anchor.index, index);
      return;
    }
    const cluster = this._view?.memberships[doc]?.[index];
    if (cluster) this._selectCluster(cluster);
  }

  // -- rendering ---------------------------------------------------------

  render() {
    const view = this._view;
    if (!view) {
      return html`<div class="suite">
        <div class="banner" ?hidden=${!this._banner}>${this._banner ?? ""}</div>
      </div>`;
    }
    // the single wrapper keeps all child bindings off the template root
    return html`<div class="suite">
      ${this._banner
        ? html`<div class="banner">${this._banner}</div>`
        : nothing}
      ${this._notice ? html`<div class="notice">${this._notice}</div>` : nothing}
      <div class="pane">${view.documents.map((d, i) => this._doc(view, i))}</div>
      ${view.mode === "review" && view.candidates.length
        ? html`<div class="candidates">
            ${view.candidates.map(
              (c, i) => html`<button
                class="chip candidate"
                data-cluster-id=${c.id}
                @click=${() => void this.send("select_candidate", { index: i })}
              >
                ${i + 1} ${c.label}
              </button>`,
            )}
          </div>`
        : nothing}
      <div class="bank">
        ${view.bank.map(
          (entry) => html`<button
            class="chip bank-entry ${this._isSelected(entry.id)
              ? "selected"
              : ""}"
            data-cluster-id=${entry.id}
            @click=${() => this._selectCluster(entry.id)}
          >
            ${entry.label} (${entry.size})
          </button>`,
        )}
        ${this._toolbar(view)}
        <button
          class="submit"
          ?disabled=${!view.complete}
          @click=${() => void this._submit()}
        >
          Submit
        </button>
      </div>
      ${view.prompt
        ? html`<div class="overlay prompt" data-target=${view.prompt.target}>
            <div class="dialog">
              <p>${view.prompt.text}</p>
              <button class="ack" @click=${() => void this.send("ack")}>
                OK
              </button>
            </div>
          </div>`
        : nothing}
      ${this._feedbackOpen()
        ? html`<div class="overlay feedback">
            <div class="dialog">
              <p>${view.feedback}</p>
              <button
                class="dismiss"
                @click=${() => (this._feedbackDismissed = true)}
              >
                Got it
              </button>
            </div>
          </div>`
        : nothing}
      ${this._toastVisible && view.toast
        ? html`<div class="toast">${view.toast}</div>`
        : nothing}
      <div class="keys">
        Space assign &middot; Ctrl+Space new cluster &middot; F fix span
        &middot; &larr;/&rarr; clusters &middot; 1&ndash;9 candidates
      </div>
    </div>`;
  }

  private _doc(view: ViewModel, doc: number) {
    const tokens = view.documents[doc].tokens;
    const memberships = view.memberships[doc] ?? [];
    const active = this._activeCluster();
    const current = view.current;
    return html`<p class="doc" data-doc-id=${view.documents[doc].id}>
      ${tokens.map((text, i) => {
        const cluster = memberships[i];
        const isCurrent =
          current !== null &&
          current.doc === doc &&
          i >= current.start &&
          i <= current.end;
        const classes = [
          "tok",
          cluster ? "mention" : "",
          isCurrent ? "current" : "",
          cluster && cluster === active ? "selected" : "",
        ]
          .filter(Boolean)
          .join(" ");
        return html`<span
          class=${classes}
          data-doc=${doc}
          data-index=${i}
          data-cluster=${cluster ?? nothing}
          @mousedown=${() => this._onTokenDown(doc, i)}
          @mouseup=${() => this._onTokenUp(doc, i)}>${text}</span> `;
      })}
    </p>`;
  }

  /** Pointer equivalents of the chords, so no action needs a keyboard. */
  private _toolbar(view: ViewModel) {
    if (view.mode === "review" && this.reviewPhase === "span") {
      return html`<span class="actions">
        <button
          class="act act-review"
          @click=${() =>
            void this.send(
              "review",
              this._selection ? { span: this._selection } : {},
            )}
        >
          ${this._selection ? "Edit span" : "Accept span"}
        </button>
      </span>`;
    }
    const active = this._activeCluster();
    return html`<span class="actions">
      <button
        class="act act-assign"
        ?disabled=${!active}
        @click=${() => active && void this.send("assign", { cluster: active })}
      >
        Assign
      </button>
      <button class="act act-new" @click=${() => void this.send("assign_new")}>
        New cluster
      </button>
      ${this._selection && view.mode !== "review"
        ? html`<button
            class="act act-fix"
            @click=${() => void this.send("fix", { span: this._selection })}
          >
            Fix span
          </button>`
        : nothing}
    </span>`;
  }

  private _isSelected(clusterId: string): boolean {
    const view = this._view;
    if (!view) return false;
    if (view.mode === "review") return this._localSelected === clusterId;
    return view.bank.find((b) => b.id === clusterId)?.selected ?? false;
  }
}
