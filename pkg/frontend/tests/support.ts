import type { Api } from "../src/api";
import type {
  DoneView,
  JudgmentAck,
  NextView,
  PendingView,
  Verdict,
} from "../src/types";

export function pendingView(
  itemId: string,
  translations: Record<string, string>,
  overrides: Partial<PendingView> = {},
): PendingView {
  return {
    done: false,
    position: 1,
    total_items: 3,
    judged_slots: 0,
    total_slots: 6,
    item: {
      item_id: itemId,
      question: "Does the output keep the emphasized construction?",
      source: "The calls from his mother should have alerted us.",
      source_highlights: [[26, 32]],
      reference: "Les appels de sa mère auraient dû nous alerter.",
      reference_highlights: [[22, 30]],
      outputs: Object.entries(translations).map(([label, translation]) => ({
        label,
        translation,
        verdict: null,
      })),
    },
    ...overrides,
  };
}

export function doneView(verdicts: Record<Verdict, number>): DoneView {
  const judged = verdicts.yes + verdicts.no + verdicts.na;
  return { done: true, judged, total: judged, verdicts };
}

export interface SubmitCall {
  itemId: string;
  label: string;
  verdict: Verdict;
}

/** Test double: next() pulls from a queue, submit() is pluggable. */
export class ScriptedApi implements Api {
  nextQueue: Array<() => Promise<NextView>> = [];
  submits: SubmitCall[] = [];
  onSubmit: (call: SubmitCall) => Promise<JudgmentAck> = (call) =>
    Promise.resolve({
      item_id: call.itemId,
      blind_label: call.label,
      verdict: call.verdict,
      revision: 0,
    });

  queueNext(view: NextView): void {
    this.nextQueue.push(() => Promise.resolve(structuredClone(view)));
  }

  queueNextFailure(error: unknown): void {
    this.nextQueue.push(() => Promise.reject(error));
  }

  next(): Promise<NextView> {
    const producer = this.nextQueue.shift();
    if (!producer) return Promise.reject(new Error("unexpected next() call"));
    return producer();
  }

  submit(itemId: string, label: string, verdict: Verdict): Promise<JudgmentAck> {
    const call = { itemId, label, verdict };
    this.submits.push(call);
    return this.onSubmit(call);
  }

  progress(): Promise<never> {
    return Promise.reject(new Error("not used in these tests"));
  }
}

export function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (error: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

export const flush = () => new Promise<void>((resolve) => setTimeout(resolve, 0));
