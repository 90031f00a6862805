// DOM rendering for the chat transcript. The transcript container is rebuilt
// from the model on every change, so the page can never drift from the state
// and re-applied events cannot leave stray nodes behind.

import type { ChatState, StepView, TurnView } from "./state.js";
import { isThinking, visibleReply } from "./state.js";

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function stepLine(step: StepView): string {
  if (step.kind === "Act") {
    return `Act[${step.toolName ?? ""}]{${step.toolArgs ?? ""}}`;
  }
  return `${step.kind}[${step.payload}]`;
}

function renderTrace(view: TurnView): HTMLElement {
  const trace = el("div", "trace");
  const title = view.slowDone
    ? `slow mind · ${view.slowDone.steps} steps · ${view.slowDone.terminatedBy ?? "?"}`
    : "slow mind · working";
  trace.appendChild(el("div", "trace-title", title));
  for (const step of view.steps) {
    trace.appendChild(el("div", `step step-${step.kind.toLowerCase()}`, stepLine(step)));
  }
  if (view.steps.length === 0 && view.slowDone) {
    trace.appendChild(el("div", "step step-hidden", "(steps not exposed for this session)"));
  }
  return trace;
}

function renderTurn(view: TurnView): HTMLElement {
  const wrap = el("div", "turn");
  wrap.dataset.turn = String(view.turn);

  if (view.question !== "") {
    wrap.appendChild(el("div", "bubble user", view.question));
  }

  if (view.holding !== null && view.holding.invoke) {
    const holding = el("div", "bubble agent holding", view.holding.response);
    if (isThinking(view)) {
      holding.appendChild(el("span", "thinking", " …thinking…"));
    }
    wrap.appendChild(holding);
  }

  if (view.steps.length > 0 || view.slowDone !== null) {
    wrap.appendChild(renderTrace(view));
  }

  const reply = visibleReply(view);
  if (reply !== null) {
    const cls = view.holding !== null && view.holding.invoke ? "bubble agent final" : "bubble agent";
    wrap.appendChild(el("div", cls, reply));
  }

  if (view.error !== null) {
    wrap.appendChild(el("div", "bubble error", view.error));
  }

  return wrap;
}

export function renderTranscript(container: HTMLElement, state: ChatState): void {
  container.replaceChildren();
  for (const view of state.turns) {
    container.appendChild(renderTurn(view));
  }
}
