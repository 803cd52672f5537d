import { describe, expect, it } from "vitest";

import { ApiError, NetworkError } from "../src/api";
import { AnnotationFlow } from "../src/state";
import { ScriptedApi, deferred, doneView, pendingView } from "./support";
import type { JudgmentAck } from "../src/types";

function makeFlow() {
  const api = new ScriptedApi();
  const flow = new AnnotationFlow(() => api);
  return { api, flow };
}

function itemPhase(flow: AnnotationFlow) {
  if (flow.phase.kind !== "item") throw new Error(`in phase ${flow.phase.kind}`);
  return flow.phase;
}

describe("sign-in", () => {
  it("rejects an empty token locally", async () => {
    const flow = new AnnotationFlow(() => {
      throw new Error("must not connect");
    });
    await flow.signIn("   ");
    expect(flow.phase).toEqual({ kind: "signin", error: "enter your access token" });
  });

  it("lands on the first pending item", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux" }));
    await flow.signIn("tok");
    const phase = itemPhase(flow);
    expect(phase.view.item.item_id).toBe("S1a");
    expect(phase.focus).toBe(0);
    expect(phase.busy).toBe(false);
  });

  it("routes an invalid token back to sign-in with the message", async () => {
    const { api, flow } = makeFlow();
    api.queueNextFailure(new ApiError(401, "invalid-token", "token not in project roster"));
    await flow.signIn("bad");
    expect(flow.phase).toEqual({
      kind: "signin",
      error: "token not in project roster",
    });
  });

  it("shows a retry prompt on network failure, and retry works", async () => {
    const { api, flow } = makeFlow();
    api.queueNextFailure(new NetworkError("cannot reach http://localhost:1"));
    api.queueNext(doneView({ yes: 1, no: 0, na: 0 }));
    await flow.signIn("tok");
    expect(flow.phase.kind).toBe("network-error");
    await flow.retry();
    expect(flow.phase.kind).toBe("done");
  });

  it("shows the completion tallies for a finished session", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(doneView({ yes: 4, no: 1, na: 1 }));
    await flow.signIn("tok");
    expect(flow.phase).toMatchObject({
      kind: "done",
      view: { judged: 6, verdicts: { yes: 4, no: 1, na: 1 } },
    });
  });
});

describe("judging", () => {
  it("updates the view only after the service acknowledged", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux" }));
    await flow.signIn("tok");
    const gate = deferred<JudgmentAck>();
    api.onSubmit = () => gate.promise;
    const submission = flow.judge("A", "yes") as Promise<void>;
    const phase = itemPhase(flow);
    expect(phase.busy).toBe(true);
    expect(phase.view.item.outputs[0].verdict).toBeNull();
    expect(phase.view.judged_slots).toBe(0);
    gate.resolve({ item_id: "S1a", blind_label: "A", verdict: "yes", revision: 0 });
    await submission;
    expect(phase.busy).toBe(false);
    expect(phase.view.item.outputs[0].verdict).toBe("yes");
    expect(phase.view.judged_slots).toBe(1);
    expect(phase.focus).toBe(1); // moved to the unjudged output
  });

  it("re-enables controls and shows the error when the service rejects", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux" }));
    await flow.signIn("tok");
    api.onSubmit = () =>
      Promise.reject(new ApiError(500, "storage-failure", "locked by another writer"));
    await flow.judge("A", "yes");
    const phase = itemPhase(flow);
    expect(phase.busy).toBe(false);
    expect(phase.error).toBe("storage-failure: locked by another writer");
    expect(phase.view.item.outputs[0].verdict).toBeNull();
    expect(phase.view.judged_slots).toBe(0);
  });

  it("requires confirmation before recording not-applicable", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux" }));
    await flow.signIn("tok");
    flow.judge("A", "na");
    expect(itemPhase(flow).confirmingNa).toBe("A");
    expect(api.submits).toEqual([]);
    flow.cancelNa();
    expect(itemPhase(flow).confirmingNa).toBeNull();
    flow.judge("A", "na");
    await flow.confirmNa();
    expect(api.submits).toEqual([{ itemId: "S1a", label: "A", verdict: "na" }]);
    expect(itemPhase(flow).view.item.outputs[0].verdict).toBe("na");
  });

  it("arming not-applicable twice submits without a separate confirm", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux" }));
    await flow.signIn("tok");
    flow.judge("A", "na");
    await flow.judge("A", "na");
    expect(api.submits).toHaveLength(1);
  });

  it("lets a verdict be revised before advancing without double counting", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux" }));
    await flow.signIn("tok");
    let revision = 0;
    api.onSubmit = (call) =>
      Promise.resolve({
        item_id: call.itemId,
        blind_label: call.label,
        verdict: call.verdict,
        revision: revision++,
      });
    await flow.judge("A", "yes");
    await flow.judge("A", "no");
    const phase = itemPhase(flow);
    expect(phase.view.item.outputs[0].verdict).toBe("no");
    expect(phase.view.judged_slots).toBe(1); // tally unchanged by the revision
    expect(api.submits).toHaveLength(2);
  });

  it("advances only once every output of the item is judged", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux" }));
    api.queueNext(
      pendingView("S1b", { A: "trois", B: "quatre" }, { position: 2, judged_slots: 2 }),
    );
    await flow.signIn("tok");
    await flow.judge("A", "yes");
    expect(itemPhase(flow).view.item.item_id).toBe("S1a");
    await flow.judge("B", "no");
    expect(itemPhase(flow).view.item.item_id).toBe("S1b");
    expect(itemPhase(flow).view.position).toBe(2);
  });

  it("finishes on the completion screen after the last judgment", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S2a", { A: "cinq" }, { judged_slots: 5, total_slots: 6 }));
    api.queueNext(doneView({ yes: 6, no: 0, na: 0 }));
    await flow.signIn("tok");
    await flow.judge("A", "yes");
    expect(flow.phase.kind).toBe("done");
  });

  it("ignores judgments while a submission is in flight", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux" }));
    await flow.signIn("tok");
    const gate = deferred<JudgmentAck>();
    api.onSubmit = () => gate.promise;
    const submission = flow.judge("A", "yes") as Promise<void>;
    flow.judge("B", "no");
    expect(api.submits).toHaveLength(1);
    gate.resolve({ item_id: "S1a", blind_label: "A", verdict: "yes", revision: 0 });
    await submission;
  });
});

describe("focus", () => {
  it("moves within bounds and clears a pending confirmation", async () => {
    const { api, flow } = makeFlow();
    api.queueNext(pendingView("S1a", { A: "un", B: "deux", C: "trois" }));
    await flow.signIn("tok");
    flow.judge("B", "na");
    expect(itemPhase(flow).confirmingNa).toBe("B");
    flow.moveFocus(1);
    expect(itemPhase(flow).focus).toBe(2);
    expect(itemPhase(flow).confirmingNa).toBeNull();
    flow.moveFocus(5);
    expect(itemPhase(flow).focus).toBe(2);
    flow.moveFocus(-10);
    expect(itemPhase(flow).focus).toBe(0);
    expect(flow.focusedLabel()).toBe("A");
  });
});

describe("instructions", () => {
  it("toggles from any phase", async () => {
    const { api, flow } = makeFlow();
    expect(flow.showInstructions).toBe(false);
    flow.toggleInstructions();
    expect(flow.showInstructions).toBe(true);
    api.queueNext(doneView({ yes: 0, no: 0, na: 0 }));
    await flow.signIn("tok");
    expect(flow.showInstructions).toBe(true); // survives phase changes
    flow.toggleInstructions();
    expect(flow.showInstructions).toBe(false);
  });
});
