// In-memory stand-in for the tutor service implementing the same wire
// contract and the six-step fixture's semantics, so UI tests can script the
// whole flow without a network.

import {
  Api,
  ApiError,
  HintView,
  ProblemListOut,
  SessionView,
  SkillView,
  TransactionIn,
  TransactionOut,
  UploadOut,
  VerdictView,
} from "../src/api.js";

interface Step {
  link: string;
  selection: string;
  action: string;
  hints: [string, string];
  skill: string | null;
}

export const PLAN: Step[] = [
  {
    link: "c1",
    selection: "CHOOSE FILE",
    action: "FileSelected",
    hints: [
      "The tutor will walk you through processing genome annotation files. Start by adding one.",
      "Click CHOOSE FILE and pick a RefSeq coding-sequence file; its name ends with .RefSeq.cds.tab.",
    ],
    skill: "select-file",
  },
  {
    link: "c2",
    selection: "ADD FILE",
    action: "ButtonPressed",
    hints: [
      "You can compare genomes by processing more than one file.",
      "Click ADD FILE to open a slot for a second RefSeq file.",
    ],
    skill: "select-file",
  },
  {
    link: "c3",
    selection: "CHOOSE FILE",
    action: "FileSelected",
    hints: [
      "Fill the new slot with another annotation file.",
      "Click CHOOSE FILE and pick the second RefSeq file.",
    ],
    skill: "select-file",
  },
  {
    link: "c4",
    selection: "PROCESS FILES",
    action: "ButtonPressed",
    hints: [
      "The files are ready. Run the adjacency analysis.",
      "Click PROCESS FILES to compute the binary codes.",
    ],
    skill: "process-files",
  },
  {
    link: "c5",
    selection: "DOWNLOAD TXT",
    action: "ButtonPressed",
    hints: [
      "Your results are ready to save.",
      "Click DOWNLOAD TXT to save the report as plain text.",
    ],
    skill: null,
  },
  {
    link: "c6",
    selection: "DONE",
    action: "ButtonPressed",
    hints: ["That is the whole workflow.", "Click DONE to finish the tutoring session."],
    skill: null,
  },
];

export const REPORT_TEXT = [
  "gene adjacency report",
  "genomes 2",
  "",
  "genome genomeA",
  "genes 3",
  "code 11",
  "unit genes 1..3",
  "",
  "genome genomeB",
  "genes 4",
  "code 110",
  "unit genes 1..3",
  "unit genes 4..4",
  "",
  "matches 1",
  "match genomeA genomeB offsets 0 0 length 2 code 11",
  "",
].join("\n");

const GENERIC_MESSAGE = "That step doesn't match. Try HINT.";

export class MockApi implements Api {
  stepIndex = 0;
  done = false;
  files: string[] = [];
  resultId: string | null = null;
  hintsShown: HintView[] = [];
  lastVerdict: VerdictView | null = null;
  private hintLevels = new Map<string, number>();
  private opportunities = new Map<string, number>([
    ["select-file", 0],
    ["process-files", 0],
  ]);

  listProblems(): Promise<ProblemListOut> {
    return Promise.resolve({
      problems: [
        {
          graph_id: "six-step-flow",
          title: "Process RefSeq files into adjacency codes",
          steps: 6,
          skills: ["process-files", "select-file"],
        },
      ],
      recommended: "six-step-flow",
    });
  }

  createSession(): Promise<SessionView> {
    return this.getSession("mock-session");
  }

  getSession(sessionId: string): Promise<SessionView> {
    if (sessionId !== "mock-session") {
      return Promise.reject(new ApiError(404, "UnknownSession", "no such session"));
    }
    return Promise.resolve({
      session_id: "mock-session",
      graph_id: "six-step-flow",
      graph_title: "Process RefSeq files into adjacency codes",
      created_at: 1_700_000_000_000,
      done: this.done,
      steps_taken: this.stepIndex,
      files: [...this.files],
      result_id: this.resultId,
      hints_shown: [...this.hintsShown],
      last_verdict: this.lastVerdict,
    });
  }

  getSkills(): Promise<SkillView[]> {
    return Promise.resolve(this.mastery());
  }

  private mastery(): SkillView[] {
    return [...this.opportunities.entries()]
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([skill, opportunities]) => ({
        skill,
        p_know: Math.min(0.25 + 0.15 * opportunities, 1),
        opportunities,
      }));
  }

  postTransaction(_sid: string, txn: TransactionIn): Promise<TransactionOut> {
    if (this.done) {
      return Promise.reject(new ApiError(409, "SessionDone", "session is complete"));
    }
    const expected = PLAN[this.stepIndex]!;
    const inputOk =
      expected.action !== "FileSelected" || txn.input.endsWith(".RefSeq.cds.tab");
    let verdict: VerdictView;
    if (
      txn.selection === expected.selection &&
      txn.action === expected.action &&
      inputOk
    ) {
      this.stepIndex += 1;
      this.done = this.stepIndex === PLAN.length;
      if (expected.skill) {
        this.opportunities.set(
          expected.skill,
          (this.opportunities.get(expected.skill) ?? 0) + 1,
        );
      }
      verdict = {
        kind: "correct",
        message: null,
        matched_links: [expected.link],
        hint_target: null,
      };
    } else if (this.stepIndex === 0 && txn.selection === "PROCESS FILES") {
      verdict = {
        kind: "incorrect",
        message: "Select a RefSeq file first",
        matched_links: ["b1"],
        hint_target: null,
      };
    } else {
      verdict = {
        kind: "incorrect",
        message: GENERIC_MESSAGE,
        matched_links: [],
        hint_target: expected.link,
      };
    }
    this.lastVerdict = verdict;
    return Promise.resolve({
      verdict,
      done: this.done,
      mastery: this.mastery(),
    });
  }

  requestHint(): Promise<HintView> {
    if (this.done) {
      return Promise.reject(new ApiError(409, "AlreadyDone", "session is complete"));
    }
    const step = PLAN[this.stepIndex]!;
    const level = this.hintLevels.get(step.link) ?? 0;
    const hint: HintView = {
      target_link: step.link,
      level,
      message: step.hints[Math.min(level, 1)]!,
      is_bottom_out: level >= 1,
    };
    this.hintLevels.set(step.link, Math.min(level + 1, 1));
    this.hintsShown.push(hint);
    return Promise.resolve(hint);
  }

  uploadFile(_sid: string, name: string): Promise<UploadOut> {
    if (this.files.includes(name)) {
      return Promise.reject(new ApiError(409, "DuplicateName", "already uploaded"));
    }
    this.files.push(name);
    return Promise.resolve({ name, records: 3, genome_ids: ["genomeA"] });
  }

  processFiles(): Promise<string> {
    if (this.files.length === 0) {
      return Promise.reject(new ApiError(409, "NoFiles", "nothing uploaded"));
    }
    this.resultId = "mock-result";
    return Promise.resolve(this.resultId);
  }

  fetchResult(resultId: string): Promise<string> {
    if (resultId !== this.resultId) {
      return Promise.reject(new ApiError(404, "UnknownResult", "no such result"));
    }
    return Promise.resolve(REPORT_TEXT);
  }
}
