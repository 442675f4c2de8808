/** Authoring-form model and helpers for the manager dashboard. */
import { ApiError } from "./api.js";

export interface QuestionIssue {
  where: string;
  message: string;
  markup?: {
    kind: string;
    message: string;
    offset: number;
    line: number;
    column: number;
    snippet: string;
  };
}

/** Unpack a 422 validation_failed response; null for any other failure. */
export function validationIssues(err: unknown): QuestionIssue[] | null {
  if (err instanceof ApiError && err.code === "validation_failed" && Array.isArray(err.detail)) {
    return err.detail as QuestionIssue[];
  }
  return null;
}

export interface QuestionDraft {
  stem: string;
  options: string[];
  correctIndex: number;
  points: number;
}

export function emptyDraft(): QuestionDraft {
  return { stem: "", options: ["", ""], correctIndex: 0, points: 1 };
}

export function withOptionAdded(draft: QuestionDraft): QuestionDraft {
  if (draft.options.length >= 26) return draft;
  return { ...draft, options: [...draft.options, ""] };
}

export function withOptionRemoved(draft: QuestionDraft, index: number): QuestionDraft {
  if (draft.options.length <= 2) return draft; // an MCQ needs two choices
  const options = draft.options.filter((_, i) => i !== index);
  let correctIndex = draft.correctIndex;
  if (index < correctIndex) correctIndex -= 1;
  if (correctIndex >= options.length) correctIndex = options.length - 1;
  return { ...draft, options, correctIndex };
}

export function optionLabel(index: number): string {
  return String.fromCharCode(65 + index); // A, B, C, ...
}

/** Request payload for POST /api/exams/{id}/questions. */
export function draftToRequest(draft: QuestionDraft): {
  stem_source: string;
  options: string[];
  correct_label: string;
  points: number;
} {
  return {
    stem_source: draft.stem,
    options: draft.options,
    correct_label: optionLabel(draft.correctIndex),
    points: draft.points,
  };
}
