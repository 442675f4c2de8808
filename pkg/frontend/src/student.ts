/** Student-side screen flow: dashboard, taking, score.
 *
 * All transitions go through the server; this class only holds the screen
 * state the DOM layer renders. Answer state is always taken from server
 * responses, never assumed locally.
 */
import { ApiClient, ApiError, AttemptPayload, Score, StudentExamCard } from "./api.js";

export type StudentScreen =
  | { kind: "loading" }
  | { kind: "dashboard"; exams: StudentExamCard[] }
  | {
      kind: "taking";
      attempt: AttemptPayload;
      answers: Record<string, string>;
      /** True once the deadline or an exam stop closed the answer controls;
       * submit stays available. */
      answersClosed: boolean;
      notice: string | null;
    }
  | { kind: "score"; score: Score; submittedAt: string }
  | { kind: "blocked"; code: string; message: string };

export class StudentFlow {
  screen: StudentScreen = { kind: "loading" };

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (screen: StudentScreen) => void = () => {},
  ) {}

  private show(screen: StudentScreen): void {
    this.screen = screen;
    this.onChange(screen);
  }

  async loadDashboard(): Promise<void> {
    const { exams } = await this.api.listStudentExams();
    this.show({ kind: "dashboard", exams });
  }

  async begin(examId: string): Promise<void> {
    let attempt: AttemptPayload;
    try {
      attempt = await this.api.beginAttempt(examId);
    } catch (err) {
      if (err instanceof ApiError) {
        this.show({ kind: "blocked", code: err.code, message: err.message });
        return;
      }
      throw err;
    }
    this.show({
      kind: "taking",
      attempt,
      answers: { ...attempt.answers },
      answersClosed: false,
      notice: null,
    });
  }

  /** Re-enter an in-progress attempt, e.g. after a page reload. */
  async resume(attemptId: string): Promise<void> {
    let attempt: AttemptPayload;
    try {
      attempt = await this.api.getAttempt(attemptId);
    } catch (err) {
      if (err instanceof ApiError) {
        this.show({ kind: "blocked", code: err.code, message: err.message });
        return;
      }
      throw err;
    }
    this.show({
      kind: "taking",
      attempt,
      answers: { ...attempt.answers },
      answersClosed: false,
      notice: null,
    });
  }

  async choose(questionId: string, label: string): Promise<void> {
    if (this.screen.kind !== "taking" || this.screen.answersClosed) return;
    const taking = this.screen;
    try {
      const result = await this.api.putAnswer(taking.attempt.attempt_id, questionId, label);
      this.show({ ...taking, answers: { ...result.answers }, notice: null });
    } catch (err) {
      if (err instanceof ApiError && (err.code === "deadline_passed" || err.code === "wrong_state")) {
        this.show({
          ...taking,
          answersClosed: true,
          notice:
            err.code === "deadline_passed"
              ? "Time is up. Submit to finalize your answers."
              : "The exam has been closed. Submit to finalize your answers.",
        });
        return;
      }
      throw err;
    }
  }

  /** Called by the countdown when it hits zero: disable answering locally. */
  deadlineReached(): void {
    if (this.screen.kind !== "taking" || this.screen.answersClosed) return;
    this.show({
      ...this.screen,
      answersClosed: true,
      notice: "Time is up. Submit to finalize your answers.",
    });
  }

  async submit(): Promise<void> {
    if (this.screen.kind !== "taking") return;
    try {
      const result = await this.api.submit(this.screen.attempt.attempt_id);
      this.show({ kind: "score", score: result.score, submittedAt: result.submitted_at });
    } catch (err) {
      if (err instanceof ApiError) {
        this.show({ kind: "blocked", code: err.code, message: err.message });
        return;
      }
      throw err;
    }
  }
}
