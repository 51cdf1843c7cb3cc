/**
 * Keyboard chords. Every chord resolves to exactly one protocol op (or
 * a local navigation); every action is also reachable by pointer.
 *
 * Space        assign the current mention to the selected cluster
 * Ctrl+Space   assign to a brand-new cluster
 * F            fix the current span to the text selection (review mode:
 *              propose the edited span for the mention under review)
 * 1..9         pick the nth candidate chip (review cluster phase)
 * Arrow keys   move the cluster-bank selection
 */
import type { Mode, SpanJson } from "./protocol.js";

export interface KeyInput {
  key: string;
  ctrlKey?: boolean;
}

export interface ChordContext {
  mode: Mode;
  /** review only: "span" while deciding the span, "cluster" after. */
  reviewPhase: "span" | "cluster";
  selectedCluster: string | null;
  candidateCount: number;
  /** token range the user has swept in the text pane, if any */
  selection: SpanJson | null;
}

export type UiAction =
  | { kind: "message"; op: string; params: Record<string, unknown> }
  | { kind: "navigate"; direction: -1 | 1 };

const message = (
  op: string,
  params: Record<string, unknown> = {},
): UiAction => ({ kind: "message", op, params });

export function chordToAction(
  input: KeyInput,
  ctx: ChordContext,
): UiAction | null {
  const { key, ctrlKey } = input;

  if (key === "ArrowLeft") return { kind: "navigate", direction: -1 };
  if (key === "ArrowRight") return { kind: "navigate", direction: 1 };

  const reviewing = ctx.mode === "review";
  if (reviewing && ctx.reviewPhase === "span") {
    if (key === " " && !ctrlKey) return message("review");
    if ((key === "f" || key === "F") && ctx.selection) {
      return message("review", { span: ctx.selection });
    }
    return null;
  }

  if (key === " " && ctrlKey) {
    return message("assign_new");
  }
  if (key === " ") {
    return ctx.selectedCluster
      ? message("assign", { cluster: ctx.selectedCluster })
      : null;
  }
  if ((key === "f" || key === "F") && !reviewing && ctx.selection) {
    return message("fix", { span: ctx.selection });
  }
  if (reviewing && /^[1-9]$/.test(key)) {
    const index = Number(key) - 1;
    if (index < ctx.candidateCount) {
      return message("select_candidate", { index });
    }
  }
  return null;
}

/** Snap an arbitrary token range outward so start ≤ end. */
export function normalizeSelection(
  doc: number,
  a: number,
  b: number,
): SpanJson {
  return { doc, start: Math.min(a, b), end: Math.max(a, b) };
}
