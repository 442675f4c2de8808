/** Live formula preview: debounced server rendering with stale-response discard.
 *
 * The client never interprets markup itself; the server is the single
 * renderer. Each request carries a sequence number, and only the response
 * to the most recently issued request may touch the pane, so out-of-order
 * completions can never show an earlier input's rendering.
 */
import type { MarkupIssue, RenderResult } from "./api.js";
import { debounce } from "./debounce.js";

export interface PreviewView {
  showHtml(html: string): void;
  showErrors(errors: MarkupIssue[]): void;
  /** Non-blocking notice, e.g. a banner; editor state must stay untouched. */
  showNetworkProblem(message: string): void;
}

export const DEFAULT_DEBOUNCE_MS = 400;

export class PreviewController {
  private seq = 0;
  private readonly schedule: { (source: string): void; flush(): void; cancel(): void };

  constructor(
    private readonly render: (source: string) => Promise<RenderResult>,
    private readonly view: PreviewView,
    debounceMs: number = DEFAULT_DEBOUNCE_MS,
  ) {
    this.schedule = debounce(debounceMs, (source: string) => {
      void this.issue(source);
    });
  }

  /** Call on every keystroke; at most one request per quiet period. */
  onInput(source: string): void {
    this.schedule(source);
  }

  /** Skip the remaining quiet period (e.g. on blur or form submit). */
  flush(): void {
    this.schedule.flush();
  }

  dispose(): void {
    this.schedule.cancel();
    this.seq += 1; // orphan any in-flight response
  }

  private async issue(source: string): Promise<void> {
    const ticket = ++this.seq;
    let result: RenderResult;
    try {
      result = await this.render(source);
    } catch (err) {
      if (ticket === this.seq) {
        this.view.showNetworkProblem(err instanceof Error ? err.message : String(err));
      }
      return;
    }
    if (ticket !== this.seq) return; // a newer request exists; stale
    if (result.errors.length > 0) {
      this.view.showErrors(result.errors);
    } else {
      this.view.showHtml(result.html ?? "");
    }
  }
}
