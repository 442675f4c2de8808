/** Typed client for the exam service HTTP API (see docs/api.md). */

export interface MarkupIssue {
  kind: string;
  message: string;
  offset: number;
  line: number;
  column: number;
  snippet: string;
}

export interface RenderResult {
  html: string | null;
  errors: MarkupIssue[];
}

export interface LoginResult {
  token: string;
  user_id: string;
  username: string;
  role: "Manager" | "Student";
  expires_at: string;
}

export interface ExamSummary {
  id: string;
  title: string;
  course_code: string;
  duration_minutes: number;
  state: "Draft" | "Started" | "Stopped";
  question_count: number;
}

export interface StudentExamCard {
  exam_id: string;
  title: string;
  course_code: string;
  duration_minutes: number;
}

export interface AttemptOption {
  label: string;
  html: string;
}

export interface AttemptQuestion {
  id: string;
  stem_html: string;
  points: number;
  options: AttemptOption[];
}

export interface AttemptExam {
  id: string;
  title: string;
  course_code: string;
  duration_minutes: number;
  questions: AttemptQuestion[];
}

export interface AttemptPayload {
  attempt_id: string;
  exam: AttemptExam;
  answers: Record<string, string>;
  deadline: string;
  server_time: string;
  state: "InProgress" | "Submitted";
}

export interface Score {
  points_earned: number;
  points_total: number;
  per_question: Record<string, { chosen: string | null; earned: number }>;
}

export interface SubmitResult {
  attempt_id: string;
  submitted_at: string;
  score: Score;
}

export interface ResultRow {
  student_id: string;
  username: string | null;
  score: Score & { per_question: Record<string, { chosen: string | null; earned: number; correct: string }> };
  submitted_at: string;
}

export interface QuestionCreated {
  id: string;
  points: number;
  labels: string[];
  correct_label: string;
}

/** Machine-readable failure from the error envelope. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Raised when the server cannot be reached at all. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super("server unreachable");
    this.name = "NetworkError";
    this.cause = cause;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  token: string | null = null;

  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token !== null) headers["Authorization"] = `Bearer ${this.token}`;
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new NetworkError(cause);
    }
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      const err = (payload as { error?: { code?: string; message?: string; detail?: unknown } } | null)?.error;
      throw new ApiError(
        response.status,
        err?.code ?? "unknown",
        err?.message ?? `HTTP ${response.status}`,
        err?.detail ?? null,
      );
    }
    return payload as T;
  }

  async login(username: string, password: string): Promise<LoginResult> {
    const result = await this.request<LoginResult>("POST", "/api/login", { username, password });
    this.token = result.token;
    return result;
  }

  createUser(username: string, password: string, role: "Manager" | "Student"): Promise<{ id: string }> {
    return this.request("POST", "/api/users", { username, password, role });
  }

  createExam(title: string, courseCode: string, durationMinutes: number): Promise<ExamSummary> {
    return this.request("POST", "/api/exams", {
      title,
      course_code: courseCode,
      duration_minutes: durationMinutes,
    });
  }

  listExams(): Promise<{ exams: ExamSummary[] }> {
    return this.request("GET", "/api/exams");
  }

  addQuestion(
    examId: string,
    stemSource: string,
    options: string[],
    correctLabel: string,
    points = 1,
  ): Promise<QuestionCreated> {
    return this.request("POST", `/api/exams/${examId}/questions`, {
      stem_source: stemSource,
      options,
      correct_label: correctLabel,
      points,
    });
  }

  render(source: string): Promise<RenderResult> {
    return this.request("POST", "/api/render", { source });
  }

  setExamState(examId: string, state: "Started" | "Stopped"): Promise<ExamSummary> {
    return this.request("POST", `/api/exams/${examId}/state`, { state });
  }

  getResults(examId: string): Promise<{ results: ResultRow[] }> {
    return this.request("GET", `/api/exams/${examId}/results`);
  }

  listStudentExams(): Promise<{ exams: StudentExamCard[] }> {
    return this.request("GET", "/api/student/exams");
  }

  beginAttempt(examId: string): Promise<AttemptPayload> {
    return this.request("POST", `/api/student/exams/${examId}/attempts`);
  }

  getAttempt(attemptId: string): Promise<AttemptPayload> {
    return this.request("GET", `/api/attempts/${attemptId}`);
  }

  putAnswer(attemptId: string, questionId: string, label: string): Promise<{ ok: boolean; answers: Record<string, string> }> {
    return this.request("PUT", `/api/attempts/${attemptId}/answers`, {
      question_id: questionId,
      label,
    });
  }

  submit(attemptId: string): Promise<SubmitResult> {
    return this.request("POST", `/api/attempts/${attemptId}/submit`);
  }
}
