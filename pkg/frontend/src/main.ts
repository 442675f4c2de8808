/** DOM wiring. All decision logic lives in the imported modules; this file
 * only builds elements and forwards events.
 *
 * Server-rendered fragment HTML is the only thing ever assigned to
 * innerHTML, and only through setServerHtml; everything else goes through
 * textContent, so author input can never become live markup here.
 */
import { ApiClient, ApiError, AttemptPayload, ExamSummary, MarkupIssue } from "./api.js";
import { CountdownTimer } from "./countdown.js";
import { insertFormulaField } from "./editor.js";
import {
  QuestionDraft,
  draftToRequest,
  emptyDraft,
  optionLabel,
  validationIssues,
  withOptionAdded,
  withOptionRemoved,
} from "./manager.js";
import { PreviewController } from "./preview.js";
import { StudentFlow, StudentScreen } from "./student.js";

const api = new ApiClient("");
const root = document.getElementById("app") as HTMLElement;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function setServerHtml(target: HTMLElement, html: string): void {
  target.innerHTML = html; // server-escaped fragment; sole injection point
}

function button(label: string, onClick: () => void, className = "btn"): HTMLButtonElement {
  const b = el("button", className, label);
  b.type = "button";
  b.addEventListener("click", onClick);
  return b;
}

function banner(message: string): HTMLElement {
  return el("div", "banner", message);
}

// -- login ------------------------------------------------------------------

function showLogin(problem = ""): void {
  root.replaceChildren();
  const box = el("div", "card login");
  box.append(el("h1", "", "texam"));
  if (problem) box.append(banner(problem));
  const user = el("input") as HTMLInputElement;
  user.placeholder = "username";
  const pass = el("input") as HTMLInputElement;
  pass.type = "password";
  pass.placeholder = "password";
  const go = button("Log in", async () => {
    try {
      const session = await api.login(user.value, pass.value);
      if (session.role === "Manager") showManagerHome();
      else showStudentHome();
    } catch (err) {
      showLogin(err instanceof ApiError ? err.message : "server unreachable");
    }
  });
  box.append(user, pass, go);
  root.append(box);
}

// -- manager ----------------------------------------------------------------

async function showManagerHome(): Promise<void> {
  root.replaceChildren(el("p", "", "Loading..."));
  const { exams } = await api.listExams();
  root.replaceChildren();
  const page = el("div", "page");
  page.append(el("h1", "", "Exams"));

  const list = el("div", "cards");
  for (const exam of exams) list.append(managerExamCard(exam));
  page.append(list);

  page.append(el("h2", "", "New exam"));
  const title = el("input") as HTMLInputElement;
  title.placeholder = "title";
  const code = el("input") as HTMLInputElement;
  code.placeholder = "course code";
  const minutes = el("input") as HTMLInputElement;
  minutes.type = "number";
  minutes.value = "60";
  const create = button("Create", async () => {
    try {
      await api.createExam(title.value, code.value, Number(minutes.value));
      await showManagerHome();
    } catch (err) {
      page.prepend(banner(err instanceof ApiError ? err.message : String(err)));
    }
  });
  page.append(el("div", "row"), title, code, minutes, create);
  root.append(page);
}

function managerExamCard(exam: ExamSummary): HTMLElement {
  const card = el("div", "card");
  card.append(el("h3", "", `${exam.title} (${exam.course_code})`));
  card.append(
    el("p", "meta", `${exam.state} · ${exam.question_count} questions · ${exam.duration_minutes} min`),
  );
  if (exam.state === "Draft") {
    card.append(button("Add question", () => showAuthoring(exam)));
    if (exam.question_count > 0) {
      card.append(
        button("Start", async () => {
          await api.setExamState(exam.id, "Started");
          await showManagerHome();
        }),
      );
    }
  }
  if (exam.state === "Started") {
    card.append(
      button("Stop", async () => {
        await api.setExamState(exam.id, "Stopped");
        await showManagerHome();
      }),
    );
  }
  if (exam.state !== "Draft") {
    card.append(button("Results", () => showResults(exam)));
  }
  return card;
}

function showAuthoring(exam: ExamSummary): void {
  root.replaceChildren();
  const page = el("div", "page");
  page.append(el("h1", "", `${exam.title}: new question`));
  const problems = el("div");
  page.append(problems);

  let draft: QuestionDraft = emptyDraft();

  const stem = el("textarea") as HTMLTextAreaElement;
  stem.rows = 5;
  stem.placeholder = "Question stem; use $...$ for formulas";

  const previewPane = el("div", "preview");
  const preview = new PreviewController(
    (source) => api.render(source),
    {
      showHtml: (html) => setServerHtml(previewPane, html),
      showErrors: (errors) => renderIssueList(previewPane, errors),
      showNetworkProblem: (message) => {
        problems.replaceChildren(banner(`preview unavailable: ${message}`));
      },
    },
  );
  stem.addEventListener("input", () => {
    draft = { ...draft, stem: stem.value };
    preview.onInput(stem.value);
  });

  const insert = button("Insert formula", () => {
    const patch = insertFormulaField(stem.value, stem.selectionStart, stem.selectionEnd);
    stem.value = patch.text;
    stem.focus();
    stem.setSelectionRange(patch.cursor, patch.cursor);
    draft = { ...draft, stem: stem.value };
    preview.onInput(stem.value);
  });

  const optionsBox = el("div");
  const redrawOptions = (): void => {
    optionsBox.replaceChildren();
    draft.options.forEach((text, i) => {
      const row = el("div", "option-row");
      const pick = el("input") as HTMLInputElement;
      pick.type = "radio";
      pick.name = "correct";
      pick.checked = i === draft.correctIndex;
      pick.addEventListener("change", () => {
        draft = { ...draft, correctIndex: i };
      });
      const label = el("span", "option-label", optionLabel(i));
      const input = el("input") as HTMLInputElement;
      input.value = text;
      input.placeholder = `option ${optionLabel(i)}`;
      input.addEventListener("input", () => {
        const options = [...draft.options];
        options[i] = input.value;
        draft = { ...draft, options };
      });
      row.append(pick, label, input);
      row.append(
        button("x", () => {
          draft = withOptionRemoved(draft, i);
          redrawOptions();
        }, "btn small"),
      );
      optionsBox.append(row);
    });
  };
  redrawOptions();

  const addOption = button("Add option", () => {
    draft = withOptionAdded(draft);
    redrawOptions();
  });

  const points = el("input") as HTMLInputElement;
  points.type = "number";
  points.value = "1";
  points.addEventListener("input", () => {
    draft = { ...draft, points: Number(points.value) };
  });

  const save = button("Save question", async () => {
    try {
      const body = draftToRequest(draft);
      await api.addQuestion(exam.id, body.stem_source, body.options, body.correct_label, body.points);
      await showManagerHome();
    } catch (err) {
      const issues = validationIssues(err);
      if (issues !== null) {
        problems.replaceChildren(
          ...issues.map((issue) => {
            const where = issue.markup
              ? `${issue.where} (line ${issue.markup.line}, column ${issue.markup.column})`
              : issue.where;
            return banner(`${where}: ${issue.message}`);
          }),
        );
        return;
      }
      problems.replaceChildren(banner(err instanceof ApiError ? err.message : String(err)));
    }
  });

  page.append(stem, insert, el("h2", "", "Preview"), previewPane);
  page.append(el("h2", "", "Options"), optionsBox, addOption);
  page.append(el("h2", "", "Points"), points, el("div", "row"), save);
  page.append(button("Back", () => void showManagerHome(), "btn link"));
  root.append(page);
}

function renderIssue(container: HTMLElement, issue: MarkupIssue): void {
  const line = el("div", "issue");
  line.append(el("strong", "", `${issue.kind} at line ${issue.line}, column ${issue.column}: `));
  line.append(document.createTextNode(issue.message));
  const snippet = el("pre", "snippet", issue.snippet);
  container.append(line, snippet);
}

function renderIssueList(container: HTMLElement, errors: MarkupIssue[]): void {
  container.replaceChildren();
  for (const issue of errors) renderIssue(container, issue);
}

async function showResults(exam: ExamSummary): Promise<void> {
  const { results } = await api.getResults(exam.id);
  root.replaceChildren();
  const page = el("div", "page");
  page.append(el("h1", "", `${exam.title}: results`));
  const table = el("table", "results");
  const head = el("tr");
  for (const h of ["Student", "Score", "Submitted"]) head.append(el("th", "", h));
  table.append(head);
  for (const row of results) {
    const tr = el("tr");
    tr.append(el("td", "", row.username ?? row.student_id));
    tr.append(el("td", "", `${row.score.points_earned} / ${row.score.points_total}`));
    tr.append(el("td", "", row.submitted_at));
    table.append(tr);
  }
  page.append(table, button("Back", () => void showManagerHome(), "btn link"));
  root.append(page);
}

// -- student ----------------------------------------------------------------

let countdown: CountdownTimer | null = null;

function showStudentHome(): void {
  const flow = new StudentFlow(api, (screen) => renderStudent(flow, screen));
  void flow.loadDashboard();
}

function renderStudent(flow: StudentFlow, screen: StudentScreen): void {
  countdown?.stop();
  countdown = null;
  root.replaceChildren();
  const page = el("div", "page");

  switch (screen.kind) {
    case "loading":
      page.append(el("p", "", "Loading..."));
      break;

    case "dashboard": {
      page.append(el("h1", "", "Open exams"));
      if (screen.exams.length === 0) {
        page.append(el("p", "", "No exam is running right now."));
      }
      for (const card of screen.exams) {
        const box = el("div", "card");
        box.append(el("h3", "", `${card.title} (${card.course_code})`));
        box.append(el("p", "meta", `${card.duration_minutes} minutes`));
        box.append(button("Begin", () => void flow.begin(card.exam_id)));
        page.append(box);
      }
      break;
    }

    case "taking": {
      const attempt: AttemptPayload = screen.attempt;
      page.append(el("h1", "", attempt.exam.title));
      const clock = el("div", "clock");
      page.append(clock);
      countdown = new CountdownTimer(
        attempt.deadline,
        attempt.server_time,
        (text) => {
          clock.textContent = text;
        },
        () => flow.deadlineReached(),
      );
      countdown.start();
      if (screen.notice) page.append(banner(screen.notice));

      attempt.exam.questions.forEach((question, index) => {
        const qBox = el("div", "card question");
        const stem = el("div", "stem");
        setServerHtml(stem, question.stem_html);
        qBox.append(el("p", "meta", `Question ${index + 1} · ${question.points} pt`), stem);
        for (const option of question.options) {
          const row = el("label", "option-row");
          const pick = el("input") as HTMLInputElement;
          pick.type = "radio";
          pick.name = `q-${question.id}`;
          pick.checked = screen.answers[question.id] === option.label;
          pick.disabled = screen.answersClosed;
          pick.addEventListener("change", () => void flow.choose(question.id, option.label));
          const body = el("span", "option-body");
          setServerHtml(body, option.html);
          row.append(pick, el("span", "option-label", option.label), body);
          qBox.append(row);
        }
        page.append(qBox);
      });
      page.append(button("Submit", () => void flow.submit(), "btn primary"));
      break;
    }

    case "score": {
      page.append(el("h1", "", "Submitted"));
      page.append(
        el("p", "", `Score: ${screen.score.points_earned} / ${screen.score.points_total}`),
      );
      page.append(el("p", "meta", `at ${screen.submittedAt}`));
      break;
    }

    case "blocked": {
      page.append(el("h1", "", "Not available"));
      page.append(banner(screen.message));
      page.append(button("Back to exams", () => void flow.loadDashboard(), "btn link"));
      break;
    }
  }
  root.append(page);
}

showLogin();
