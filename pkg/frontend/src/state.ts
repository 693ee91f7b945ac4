// Pure UI state and its transitions. The tutoring logic itself lives on the
// server; this module only decides what the page shows and which buttons are
// live, so it can be tested without a DOM and rebuilt from a session fetch.

import type { HintView, SessionView, SkillView, TransactionOut, VerdictView } from "./api.js";

export type BannerKind = "idle" | "correct" | "incorrect" | "info";

export interface Banner {
  kind: BannerKind;
  message: string;
}

export interface UiState {
  sessionId: string | null;
  graphTitle: string;
  instructions: string[];
  cursor: number; // index of the instruction on display, -1 before any
  banner: Banner;
  done: boolean;
  resultId: string | null;
  resultDownloaded: boolean;
  files: string[];
  skills: SkillView[];
  busy: boolean; // one in-flight mutating request at a time
}

export interface ButtonSet {
  hint: boolean;
  prev: boolean;
  next: boolean;
  done: boolean;
  chooseFile: boolean;
  addFile: boolean;
  processFiles: boolean;
  downloadTxt: boolean;
}

export function initialState(): UiState {
  return {
    sessionId: null,
    graphTitle: "",
    instructions: [],
    cursor: -1,
    banner: { kind: "idle", message: "" },
    done: false,
    resultId: null,
    resultDownloaded: false,
    files: [],
    skills: [],
    busy: false,
  };
}

function bannerFor(verdict: VerdictView | null): Banner {
  if (verdict === null) {
    return { kind: "idle", message: "" };
  }
  if (verdict.kind === "correct") {
    return { kind: "correct", message: verdict.message ?? "Correct!" };
  }
  return { kind: "incorrect", message: verdict.message ?? "Incorrect." };
}

/** Rebuild display state from a session fetch; reload-safe by construction. */
export function withSession(state: UiState, session: SessionView, skills: SkillView[]): UiState {
  const instructions = session.hints_shown.map((hint: HintView) => hint.message);
  return {
    ...state,
    sessionId: session.session_id,
    graphTitle: session.graph_title,
    instructions,
    cursor: instructions.length - 1,
    banner: bannerFor(session.last_verdict),
    done: session.done,
    resultId: session.result_id,
    resultDownloaded: false,
    files: [...session.files],
    skills,
  };
}

export function withHint(state: UiState, hint: HintView): UiState {
  const instructions = [...state.instructions, hint.message];
  return { ...state, instructions, cursor: instructions.length - 1 };
}

export function withVerdict(state: UiState, out: TransactionOut): UiState {
  return {
    ...state,
    banner: bannerFor(out.verdict),
    done: out.done,
    skills: out.mastery,
  };
}

export function withUpload(state: UiState, name: string): UiState {
  return { ...state, files: [...state.files, name] };
}

export function withResult(state: UiState, resultId: string): UiState {
  return { ...state, resultId, resultDownloaded: false };
}

export function withDownloaded(state: UiState): UiState {
  return { ...state, resultDownloaded: true };
}

export function withBusy(state: UiState, busy: boolean): UiState {
  return { ...state, busy };
}

export function withBanner(state: UiState, banner: Banner): UiState {
  return { ...state, banner };
}

export function navPrev(state: UiState): UiState {
  return state.cursor > 0 ? { ...state, cursor: state.cursor - 1 } : state;
}

/** Page forward through shown instructions only; caller handles hint fetch. */
export function navNextLocal(state: UiState): UiState {
  return state.cursor < state.instructions.length - 1
    ? { ...state, cursor: state.cursor + 1 }
    : state;
}

export function atLatestInstruction(state: UiState): boolean {
  return state.cursor === state.instructions.length - 1;
}

export function currentInstruction(state: UiState): string {
  return state.cursor >= 0 ? (state.instructions[state.cursor] ?? "") : "";
}

export function buttons(state: UiState): ButtonSet {
  const live = state.sessionId !== null && !state.busy;
  const open = live && !state.done;
  return {
    hint: open,
    // paging backward needs something before the instruction on display
    prev: live && state.cursor > 0,
    // forward either pages through history or asks for the next hint
    next: live && (!atLatestInstruction(state) || !state.done),
    // the final step only unlocks once the report has been saved
    done: live && (state.done || state.resultDownloaded),
    chooseFile: open,
    addFile: open,
    processFiles: open,
    downloadTxt: live && state.resultId !== null,
  };
}
