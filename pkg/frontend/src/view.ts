import { escapeHtml, renderHighlighted } from "./highlight";
import { INSTRUCTIONS, INSTRUCTIONS_TITLE } from "./instructions";
import type { AnnotationFlow, Phase } from "./state";
import type { OutputView, Verdict } from "./types";

const VERDICT_BUTTONS: Array<[Verdict, string]> = [
  ["yes", "Yes"],
  ["no", "No"],
  ["na", "Not applicable"],
];

function header(phase: Phase): string {
  let status = "";
  if (phase.kind === "item") {
    const { view } = phase;
    status =
      `Sentence ${view.position} of ${view.total_items} · ` +
      `${view.judged_slots}/${view.total_slots} judged`;
  } else if (phase.kind === "done") {
    status = "Session complete";
  }
  return (
    `<header><h1>Translation judgments</h1>` +
    `<span class="status">${escapeHtml(status)}</span>` +
    `<button type="button" data-action="instructions">Instructions</button>` +
    `</header>`
  );
}

function outputRow(
  output: OutputView,
  focused: boolean,
  busy: boolean,
  confirming: boolean,
): string {
  const buttons = VERDICT_BUTTONS.map(
    ([verdict, caption]) =>
      `<button type="button" class="verdict${output.verdict === verdict ? " chosen" : ""}"` +
      ` data-action="judge" data-label="${escapeHtml(output.label)}"` +
      ` data-verdict="${verdict}"${busy ? " disabled" : ""}>${caption}</button>`,
  ).join("");
  const confirm = confirming
    ? `<span class="confirm-na">Record “not applicable”?` +
      `<button type="button" data-action="confirm-na"${busy ? " disabled" : ""}>Confirm</button>` +
      `<button type="button" data-action="cancel-na"${busy ? " disabled" : ""}>Cancel</button>` +
      `</span>`
    : "";
  return (
    `<li class="output${focused ? " focused" : ""}" data-output="${escapeHtml(output.label)}">` +
    `<span class="blind-label">${escapeHtml(output.label)}</span>` +
    `<span class="translation">${escapeHtml(output.translation)}</span>` +
    `<span class="controls">${buttons}</span>${confirm}</li>`
  );
}

function itemView(phase: Extract<Phase, { kind: "item" }>): string {
  const { item } = phase.view;
  const rows = item.outputs
    .map((output, index) =>
      outputRow(
        output,
        index === phase.focus,
        phase.busy,
        phase.confirmingNa === output.label,
      ),
    )
    .join("");
  const notes = item.notes
    ? `<p class="notes">${escapeHtml(item.notes)}</p>`
    : "";
  const error = phase.error
    ? `<p class="error" role="alert">${escapeHtml(phase.error)}</p>`
    : "";
  return (
    `<section class="item">` +
    `<p class="question">${escapeHtml(item.question)}</p>` +
    `<p class="sentence source"><span class="tag">Source</span> ` +
    renderHighlighted(item.source, item.source_highlights) +
    `</p>` +
    `<p class="sentence reference"><span class="tag">Reference</span> ` +
    renderHighlighted(item.reference, item.reference_highlights) +
    `</p>` +
    notes +
    `<ol class="outputs">${rows}</ol>` +
    error +
    `</section>`
  );
}

function doneView(phase: Extract<Phase, { kind: "done" }>): string {
  const { view } = phase;
  return (
    `<section class="done">` +
    `<h2>All sentences judged</h2>` +
    `<p>${view.judged} of ${view.total} judgments recorded.</p>` +
    `<ul class="tallies">` +
    `<li>Yes: ${view.verdicts.yes}</li>` +
    `<li>No: ${view.verdicts.no}</li>` +
    `<li>Not applicable: ${view.verdicts.na}</li>` +
    `</ul></section>`
  );
}

function signinView(phase: Extract<Phase, { kind: "signin" }>): string {
  const error = phase.error
    ? `<p class="error" role="alert">${escapeHtml(phase.error)}</p>`
    : "";
  return (
    `<section class="signin"><h2>Sign in</h2>` +
    `<p>Paste the access token you received for this study.</p>` +
    `<input type="password" id="token" autocomplete="off" placeholder="access token">` +
    `<button type="button" data-action="signin">Start</button>${error}</section>`
  );
}

function instructionsOverlay(): string {
  const paragraphs = INSTRUCTIONS.map(
    (text) => `<p>${escapeHtml(text)}</p>`,
  ).join("");
  return (
    `<aside class="instructions" role="dialog" aria-label="${INSTRUCTIONS_TITLE}">` +
    `<h2>${INSTRUCTIONS_TITLE}</h2>${paragraphs}` +
    `<button type="button" data-action="instructions">Back</button></aside>`
  );
}

export function render(root: HTMLElement, flow: AnnotationFlow): void {
  const phase = flow.phase;
  let body: string;
  switch (phase.kind) {
    case "signin":
      body = signinView(phase);
      break;
    case "loading":
      body = `<section class="loading"><p>Loading…</p></section>`;
      break;
    case "network-error":
      body =
        `<section class="network-error">` +
        `<p class="error" role="alert">${escapeHtml(phase.message)}</p>` +
        `<button type="button" data-action="retry">Try again</button></section>`;
      break;
    case "item":
      body = itemView(phase);
      break;
    case "done":
      body = doneView(phase);
      break;
  }
  const overlay = flow.showInstructions ? instructionsOverlay() : "";
  root.innerHTML = header(phase) + `<main>${body}</main>` + overlay;
}

/** Attach rendering plus click and keyboard handling to a root element. */
export function mount(root: HTMLElement, flow: AnnotationFlow): void {
  flow.subscribe(() => render(root, flow));
  render(root, flow);

  root.addEventListener("click", (event) => {
    const target = (event.target as Element | null)?.closest("[data-action]");
    if (!target) return;
    switch (target.getAttribute("data-action")) {
      case "signin": {
        const input = root.querySelector<HTMLInputElement>("#token");
        void flow.signIn(input?.value ?? "");
        break;
      }
      case "retry":
        void flow.retry();
        break;
      case "instructions":
        flow.toggleInstructions();
        break;
      case "judge":
        void flow.judge(
          target.getAttribute("data-label") ?? "",
          target.getAttribute("data-verdict") as Verdict,
        );
        break;
      case "confirm-na":
        void flow.confirmNa();
        break;
      case "cancel-na":
        flow.cancelNa();
        break;
    }
  });

  root.ownerDocument.addEventListener("keydown", (event) => {
    if (flow.phase.kind !== "item") return;
    if ((event.target as HTMLElement | null)?.tagName === "INPUT") return;
    const label = flow.focusedLabel();
    switch (event.key) {
      case "y":
      case "Y":
        if (label) void flow.judge(label, "yes");
        break;
      case "n":
      case "N":
        if (label) void flow.judge(label, "no");
        break;
      case "a":
      case "A":
        if (label) void flow.judge(label, "na");
        break;
      case "Enter":
        void flow.confirmNa();
        break;
      case "Escape":
        flow.cancelNa();
        break;
      case "ArrowDown":
      case "ArrowRight":
        flow.moveFocus(1);
        event.preventDefault();
        break;
      case "ArrowUp":
      case "ArrowLeft":
        flow.moveFocus(-1);
        event.preventDefault();
        break;
    }
  });
}
