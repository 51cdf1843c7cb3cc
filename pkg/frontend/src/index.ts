export { CorefSuite } from "./coref-suite.js";
export { SessionClient } from "./client.js";
export { chordToAction, normalizeSelection } from "./keymap.js";
export type { ChordContext, KeyInput, UiAction } from "./keymap.js";
export { HttpTransport } from "./protocol.js";
export type {
  BankEntry,
  CandidateEntry,
  DocumentView,
  Mode,
  OpenResult,
  RequestMessage,
  SessionConfig,
  SessionResponse,
  SpanJson,
  Transport,
  ViewDelta,
  ViewModel,
} from "./protocol.js";

import { CorefSuite } from "./coref-suite.js";

if (!customElements.get("coref-suite")) {
  customElements.define("coref-suite", CorefSuite);
}
