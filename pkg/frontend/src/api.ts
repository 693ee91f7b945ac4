// Typed client for the tutor service. Field names mirror the service's
// docs/api-reference.md contract exactly; nothing else talks to the network.

export interface VerdictView {
  kind: "correct" | "incorrect";
  message: string | null;
  matched_links: string[];
  hint_target: string | null;
}

export interface SkillView {
  skill: string;
  p_know: number;
  opportunities: number;
}

export interface HintView {
  target_link: string;
  level: number;
  message: string;
  is_bottom_out: boolean;
}

export interface SessionView {
  session_id: string;
  graph_id: string;
  graph_title: string;
  created_at: number;
  done: boolean;
  steps_taken: number;
  files: string[];
  result_id: string | null;
  hints_shown: HintView[];
  last_verdict: VerdictView | null;
}

export interface TransactionOut {
  verdict: VerdictView;
  done: boolean;
  mastery: SkillView[];
}

export interface TransactionIn {
  selection: string;
  action: string;
  input: string;
}

export interface UploadOut {
  name: string;
  records: number;
  genome_ids: string[];
}

export interface ProblemView {
  graph_id: string;
  title: string;
  steps: number;
  skills: string[];
}

export interface ProblemListOut {
  problems: ProblemView[];
  recommended: string | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** What the app needs from the backend; TutorApi is the real implementation. */
export interface Api {
  listProblems(): Promise<ProblemListOut>;
  createSession(graphId: string): Promise<SessionView>;
  getSession(sessionId: string): Promise<SessionView>;
  getSkills(sessionId: string): Promise<SkillView[]>;
  postTransaction(sessionId: string, txn: TransactionIn): Promise<TransactionOut>;
  requestHint(sessionId: string): Promise<HintView>;
  uploadFile(sessionId: string, name: string, content: string): Promise<UploadOut>;
  processFiles(sessionId: string): Promise<string>;
  fetchResult(resultId: string): Promise<string>;
}

export class TutorApi implements Api {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = "HttpError";
      let message = `${response.status} ${response.statusText}`;
      try {
        const body = (await response.json()) as { error?: { code?: string; message?: string } };
        code = body.error?.code ?? code;
        message = body.error?.message ?? message;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, code, message);
    }
    if (response.headers.get("content-type")?.includes("text/plain")) {
      return (await response.text()) as unknown as T;
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
  }

  listProblems(): Promise<ProblemListOut> {
    return this.request("/problems");
  }

  createSession(graphId: string): Promise<SessionView> {
    return this.post("/sessions", { graph_id: graphId });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}`);
  }

  async getSkills(sessionId: string): Promise<SkillView[]> {
    const body = await this.request<{ skills: SkillView[] }>(
      `/sessions/${sessionId}/skills`,
    );
    return body.skills;
  }

  postTransaction(sessionId: string, txn: TransactionIn): Promise<TransactionOut> {
    return this.post(`/sessions/${sessionId}/transactions`, txn);
  }

  requestHint(sessionId: string): Promise<HintView> {
    return this.post(`/sessions/${sessionId}/hint`);
  }

  uploadFile(sessionId: string, name: string, content: string): Promise<UploadOut> {
    return this.post(`/sessions/${sessionId}/files`, { name, content });
  }

  async processFiles(sessionId: string): Promise<string> {
    const body = await this.post<{ result_id: string }>(
      `/sessions/${sessionId}/process`,
    );
    return body.result_id;
  }

  fetchResult(resultId: string): Promise<string> {
    return this.request(`/results/${resultId}`);
  }
}
