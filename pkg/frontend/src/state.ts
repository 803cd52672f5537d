import { Api, ApiError, NetworkError } from "./api";
import type { PendingView, DoneView, Verdict } from "./types";

export type Phase =
  | { kind: "signin"; error: string | null }
  | { kind: "loading" }
  | { kind: "network-error"; message: string }
  | {
      kind: "item";
      view: PendingView;
      focus: number;
      confirmingNa: string | null;
      busy: boolean;
      error: string | null;
    }
  | { kind: "done"; view: DoneView };

/**
 * Session state machine. The view layer renders `phase` and calls the
 * methods below; every change goes through emit(). Verdicts shown in the
 * view are updated only after the service acknowledged the submission.
 */
export class AnnotationFlow {
  phase: Phase = { kind: "signin", error: null };
  showInstructions = false;

  private api: Api | null = null;
  private listeners: Array<() => void> = [];

  constructor(private readonly connect: (token: string) => Api) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  async signIn(token: string): Promise<void> {
    if (!token.trim()) {
      this.phase = { kind: "signin", error: "enter your access token" };
      this.emit();
      return;
    }
    this.api = this.connect(token.trim());
    await this.refresh();
  }

  /** Pull the next pending view; routes auth failures back to sign-in. */
  async refresh(): Promise<void> {
    if (!this.api) {
      this.phase = { kind: "signin", error: null };
      this.emit();
      return;
    }
    this.phase = { kind: "loading" };
    this.emit();
    try {
      const view = await this.api.next();
      this.phase = view.done
        ? { kind: "done", view }
        : { kind: "item", view, focus: this.firstUnjudged(view), confirmingNa: null, busy: false, error: null };
    } catch (error) {
      if (error instanceof ApiError && (error.status === 401 || error.status === 403)) {
        this.api = null;
        this.phase = { kind: "signin", error: error.message };
      } else if (error instanceof NetworkError) {
        this.phase = { kind: "network-error", message: error.message };
      } else {
        this.phase = {
          kind: "network-error",
          message: error instanceof Error ? error.message : String(error),
        };
      }
    }
    this.emit();
  }

  private firstUnjudged(view: PendingView): number {
    const index = view.item.outputs.findIndex((output) => output.verdict === null);
    return index === -1 ? 0 : index;
  }

  retry(): Promise<void> {
    return this.refresh();
  }

  toggleInstructions(): void {
    this.showInstructions = !this.showInstructions;
    this.emit();
  }

  moveFocus(delta: number): void {
    if (this.phase.kind !== "item") return;
    const count = this.phase.view.item.outputs.length;
    this.phase.focus = Math.min(Math.max(this.phase.focus + delta, 0), count - 1);
    this.phase.confirmingNa = null;
    this.emit();
  }

  focusedLabel(): string | null {
    if (this.phase.kind !== "item") return null;
    return this.phase.view.item.outputs[this.phase.focus]?.label ?? null;
  }

  /**
   * Record a verdict for one blinded output. "na" is gated behind an
   * explicit confirmation: the first call arms it, confirmNa() fires it.
   */
  judge(label: string, verdict: Verdict): Promise<void> | void {
    if (this.phase.kind !== "item" || this.phase.busy) return;
    const index = this.phase.view.item.outputs.findIndex((o) => o.label === label);
    if (index === -1) return;
    this.phase.focus = index;
    if (verdict === "na" && this.phase.confirmingNa !== label) {
      this.phase.confirmingNa = label;
      this.emit();
      return;
    }
    return this.doSubmit(label, verdict);
  }

  confirmNa(): Promise<void> | void {
    if (this.phase.kind !== "item" || this.phase.confirmingNa === null) return;
    return this.doSubmit(this.phase.confirmingNa, "na");
  }

  cancelNa(): void {
    if (this.phase.kind !== "item") return;
    this.phase.confirmingNa = null;
    this.emit();
  }

  private async doSubmit(label: string, verdict: Verdict): Promise<void> {
    if (this.phase.kind !== "item" || !this.api) return;
    const phase = this.phase;
    phase.busy = true;
    phase.error = null;
    phase.confirmingNa = null;
    this.emit();
    try {
      await this.api.submit(phase.view.item.item_id, label, verdict);
    } catch (error) {
      phase.busy = false;
      phase.error =
        error instanceof ApiError
          ? `${error.code}: ${error.message}`
          : error instanceof NetworkError
            ? `no connection: ${error.message}`
            : String(error);
      this.emit();
      return;
    }
    // acknowledged: now the view may change
    const output = phase.view.item.outputs.find((o) => o.label === label);
    if (output) {
      if (output.verdict === null) phase.view.judged_slots += 1;
      output.verdict = verdict;
    }
    phase.busy = false;
    const pending = phase.view.item.outputs.findIndex((o) => o.verdict === null);
    if (pending === -1) {
      await this.refresh(); // whole item judged: advance
    } else {
      phase.focus = pending;
      this.emit();
    }
  }
}
