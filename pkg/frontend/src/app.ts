// DOM wiring for the Gene Adjacency Program page with the embedded tutor
// panel. Every handler maps one user action to one service call (plus the
// paired upload/process call where the workflow requires it), pushes the
// outcome through the pure state transitions, and re-renders.

import { Api, ApiError } from "./api.js";
import {
  UiState,
  atLatestInstruction,
  buttons,
  currentInstruction,
  initialState,
  navNextLocal,
  navPrev,
  withBanner,
  withBusy,
  withDownloaded,
  withHint,
  withResult,
  withSession,
  withUpload,
  withVerdict,
} from "./state.js";

export type SaveFile = (name: string, text: string) => void;

function browserSave(name: string, text: string): void {
  const blob = new Blob([text], { type: "text/plain" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = name;
  anchor.click();
  URL.revokeObjectURL(url);
}

export class TutorApp {
  state: UiState = initialState();

  constructor(
    private readonly root: Document,
    private readonly api: Api,
    private readonly save: SaveFile = browserSave,
  ) {}

  private element<T extends HTMLElement>(id: string): T {
    const found = this.root.getElementById(id);
    if (!found) {
      throw new Error(`missing element #${id}`);
    }
    return found as T;
  }

  async start(): Promise<void> {
    const problems = await this.api.listProblems();
    const select = this.element<HTMLSelectElement>("problem-select");
    select.innerHTML = "";
    for (const problem of problems.problems) {
      const option = this.root.createElement("option");
      option.value = problem.graph_id;
      option.textContent = `${problem.title} (${problem.steps} steps)`;
      if (problem.graph_id === (problems.recommended ?? "")) {
        option.selected = true;
      }
      select.appendChild(option);
    }
    this.wire();
    const rehydrateId = new URLSearchParams(
      this.root.location?.hash.replace(/^#/, "") ?? "",
    ).get("session");
    if (rehydrateId) {
      await this.rehydrate(rehydrateId);
    }
    this.render();
  }

  private wire(): void {
    this.element("start").addEventListener("click", () => {
      void this.createSession();
    });
    this.element("hint").addEventListener("click", () => {
      void this.requestHint();
    });
    this.element("prev").addEventListener("click", () => {
      this.state = navPrev(this.state);
      this.render();
    });
    this.element("next").addEventListener("click", () => {
      if (atLatestInstruction(this.state)) {
        void this.requestHint(); // paging past the end asks the tutor
      } else {
        this.state = navNextLocal(this.state);
        this.render();
      }
    });
    this.element("done").addEventListener("click", () => {
      void this.finish();
    });
    this.element("choose-file").addEventListener("click", () => {
      this.element<HTMLInputElement>("file-input").click();
    });
    this.element<HTMLInputElement>("file-input").addEventListener("change", (event) => {
      const input = event.target as HTMLInputElement;
      const file = input.files?.[0];
      if (file) {
        void file.text().then((content) => this.selectFile(file.name, content));
      }
      input.value = "";
    });
    this.element("add-file").addEventListener("click", () => {
      void this.pressButton("ADD FILE");
    });
    this.element("process-files").addEventListener("click", () => {
      void this.processFiles();
    });
    this.element("download-txt").addEventListener("click", () => {
      void this.downloadResult();
    });
  }

  async createSession(): Promise<void> {
    await this.mutate(async () => {
      const graphId = this.element<HTMLSelectElement>("problem-select").value;
      const session = await this.api.createSession(graphId);
      const skills = await this.api.getSkills(session.session_id);
      this.state = withSession(this.state, session, skills);
      if (this.root.location) {
        this.root.location.hash = `session=${session.session_id}`;
      }
    });
  }

  async rehydrate(sessionId: string): Promise<void> {
    const session = await this.api.getSession(sessionId);
    const skills = await this.api.getSkills(sessionId);
    this.state = withSession(this.state, session, skills);
  }

  async requestHint(): Promise<void> {
    await this.mutate(async () => {
      const hint = await this.api.requestHint(this.sessionId());
      this.state = withHint(this.state, hint);
    });
  }

  /** Upload the picked file, then post the matching FileSelected step. */
  async selectFile(name: string, content: string): Promise<void> {
    await this.mutate(async () => {
      await this.api.uploadFile(this.sessionId(), name, content);
      this.state = withUpload(this.state, name);
      const out = await this.api.postTransaction(this.sessionId(), {
        selection: "CHOOSE FILE",
        action: "FileSelected",
        input: name,
      });
      this.state = withVerdict(this.state, out);
    });
  }

  async pressButton(selection: string): Promise<void> {
    await this.mutate(async () => {
      const out = await this.api.postTransaction(this.sessionId(), {
        selection,
        action: "ButtonPressed",
        input: "",
      });
      this.state = withVerdict(this.state, out);
    });
  }

  /** Post the PROCESS FILES step; run the analysis when the tutor accepts. */
  async processFiles(): Promise<void> {
    await this.mutate(async () => {
      const out = await this.api.postTransaction(this.sessionId(), {
        selection: "PROCESS FILES",
        action: "ButtonPressed",
        input: "",
      });
      this.state = withVerdict(this.state, out);
      if (out.verdict.kind === "correct") {
        const resultId = await this.api.processFiles(this.sessionId());
        this.state = withResult(this.state, resultId);
      }
    });
  }

  /** Post the DOWNLOAD TXT step and save the report locally. */
  async downloadResult(): Promise<void> {
    await this.mutate(async () => {
      const out = await this.api.postTransaction(this.sessionId(), {
        selection: "DOWNLOAD TXT",
        action: "ButtonPressed",
        input: "",
      });
      this.state = withVerdict(this.state, out);
      if (this.state.resultId) {
        const text = await this.api.fetchResult(this.state.resultId);
        this.save("gene-adjacency-report.txt", text);
        this.state = withDownloaded(this.state);
        this.element<HTMLElement>("report").textContent = text;
        this.element<HTMLElement>("report").hidden = false;
      }
    });
  }

  async finish(): Promise<void> {
    if (this.state.done) {
      this.state = withBanner(this.state, {
        kind: "info",
        message: "Tutoring session complete.",
      });
      this.render();
      return;
    }
    await this.pressButton("DONE");
  }

  private sessionId(): string {
    if (!this.state.sessionId) {
      throw new Error("no active session");
    }
    return this.state.sessionId;
  }

  /** Run one mutating interaction with the buttons locked while in flight. */
  private async mutate(action: () => Promise<void>): Promise<void> {
    if (this.state.busy) {
      return;
    }
    this.state = withBusy(this.state, true);
    this.render();
    try {
      await action();
    } catch (error) {
      const message =
        error instanceof ApiError ? error.message : `request failed: ${String(error)}`;
      this.state = withBanner(this.state, { kind: "incorrect", message });
    } finally {
      this.state = withBusy(this.state, false);
      this.render();
    }
  }

  render(): void {
    const state = this.state;
    const set = buttons(state);
    this.element<HTMLElement>("setup").hidden = state.sessionId !== null;
    this.element<HTMLElement>("workbench").hidden = state.sessionId === null;
    this.element<HTMLElement>("problem-title").textContent = state.graphTitle;

    const banner = this.element<HTMLElement>("banner");
    banner.className = `banner ${state.banner.kind}`;
    banner.textContent = state.banner.message;

    this.element<HTMLElement>("instruction").textContent =
      currentInstruction(state) ||
      "Click HINT to get the first instruction from the tutor.";

    const files = this.element<HTMLElement>("file-list");
    files.innerHTML = "";
    for (const name of state.files) {
      const item = this.root.createElement("li");
      item.textContent = name;
      files.appendChild(item);
    }

    const skills = this.element<HTMLElement>("skills");
    skills.innerHTML = "";
    for (const skill of state.skills) {
      const row = this.root.createElement("div");
      row.className = "skill-row";
      const label = this.root.createElement("span");
      label.textContent = `${skill.skill} (${skill.opportunities})`;
      const meter = this.root.createElement("div");
      meter.className = "skill-meter";
      const fill = this.root.createElement("div");
      fill.className = "skill-fill";
      fill.style.width = `${Math.round(skill.p_know * 100)}%`;
      meter.appendChild(fill);
      row.appendChild(label);
      row.appendChild(meter);
      skills.appendChild(row);
    }

    const toggles: Array<[string, boolean]> = [
      ["hint", set.hint],
      ["prev", set.prev],
      ["next", set.next],
      ["done", set.done],
      ["choose-file", set.chooseFile],
      ["add-file", set.addFile],
      ["process-files", set.processFiles],
      ["download-txt", set.downloadTxt],
    ];
    for (const [id, enabled] of toggles) {
      this.element<HTMLButtonElement>(id).disabled = !enabled;
    }
  }
}
