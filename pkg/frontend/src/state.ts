// Chat transcript model. Turn events apply idempotently: replaying a frame
// the model has already absorbed changes nothing, so a re-delivered or
// re-applied event can never duplicate a bubble or a trace step.

import type { SseFrame } from "./api.js";

export interface StepView {
  kind: string;
  payload: string;
  toolName?: string;
  toolArgs?: string;
}

export interface TurnView {
  turn: number;
  question: string;
  /** First fast output of the turn: the reply itself, or the holding line when invoke is true. */
  holding: { response: string; invoke: boolean } | null;
  steps: StepView[];
  slowDone: { finalResult: string | null; terminatedBy: string | null; steps: number } | null;
  finalReply: string | null;
  error: string | null;
}

export interface ChatState {
  turns: TurnView[];
  connected: boolean;
}

export function createState(): ChatState {
  return { turns: [], connected: false };
}

function getOrCreateTurn(state: ChatState, turn: number): TurnView {
  let view = state.turns.find((t) => t.turn === turn);
  if (!view) {
    view = {
      turn,
      question: "",
      holding: null,
      steps: [],
      slowDone: null,
      finalReply: null,
      error: null,
    };
    state.turns.push(view);
    state.turns.sort((a, b) => a.turn - b.turn);
  }
  return view;
}

/** Record the user's question as soon as it is sent, before any frame arrives. */
export function beginTurn(state: ChatState, turn: number, question: string): TurnView {
  const view = getOrCreateTurn(state, turn);
  view.question = question;
  return view;
}

/** The next turn index to send: one past the highest turn the model has seen. */
export function nextTurnIndex(state: ChatState): number {
  return state.turns.length === 0 ? 0 : state.turns[state.turns.length - 1].turn + 1;
}

function sameStep(a: StepView, b: StepView): boolean {
  return (
    a.kind === b.kind &&
    a.payload === b.payload &&
    a.toolName === b.toolName &&
    a.toolArgs === b.toolArgs
  );
}

/**
 * Apply one turn event to the model. Returns true when the model changed;
 * a frame that is already reflected (same holding reply, a step identical to
 * the one just appended, a result already set) returns false and leaves the
 * model untouched.
 */
const TURN_EVENTS = new Set(["fast_reply", "slow_step", "slow_done", "final_reply", "error"]);

export function applyFrame(state: ChatState, frame: SseFrame): boolean {
  if (!TURN_EVENTS.has(frame.event)) return false;
  const data = frame.data as Record<string, unknown>;
  if (typeof data !== "object" || data === null || typeof data.turn !== "number") {
    return false;
  }
  const view = getOrCreateTurn(state, data.turn);

  switch (frame.event) {
    case "fast_reply": {
      if (view.holding !== null) return false;
      view.holding = {
        response: String(data.response ?? ""),
        invoke: Boolean(data.invoke),
      };
      return true;
    }

    case "slow_step": {
      // Once slow_done has arrived the episode is over and its step list is
      // complete; any step frame after that is a replay.
      if (view.slowDone !== null) return false;
      const step: StepView = {
        kind: String(data.kind ?? ""),
        payload: String(data.payload ?? ""),
      };
      if (typeof data.tool_name === "string") step.toolName = data.tool_name;
      if (typeof data.tool_args === "string") step.toolArgs = data.tool_args;
      // Steps arrive in order, and the runtime never produces two identical
      // steps back to back, so an exact repeat of the newest step is a
      // re-delivery, not new progress.
      const last = view.steps[view.steps.length - 1];
      if (last && sameStep(last, step)) return false;
      view.steps.push(step);
      return true;
    }

    case "slow_done": {
      if (view.slowDone !== null) return false;
      view.slowDone = {
        finalResult: typeof data.final_result === "string" ? data.final_result : null,
        terminatedBy: typeof data.terminated_by === "string" ? data.terminated_by : null,
        steps: typeof data.steps === "number" ? data.steps : view.steps.length,
      };
      return true;
    }

    case "final_reply": {
      if (view.finalReply !== null) return false;
      view.finalReply = String(data.response ?? "");
      return true;
    }

    case "error": {
      if (view.error !== null) return false;
      const name = typeof data.error === "string" ? data.error : "error";
      const message = typeof data.message === "string" ? data.message : "";
      view.error = `${name}: ${message}`.trim().replace(/:$/, "");
      return true;
    }

    default:
      return false;
  }
}

/** The reply the user should read for this turn, or null while it is pending. */
export function visibleReply(view: TurnView): string | null {
  if (view.finalReply !== null) return view.finalReply;
  if (view.holding !== null && !view.holding.invoke) return view.holding.response;
  return null;
}

/** True while the turn is invoking and its bridged reply has not arrived. */
export function isThinking(view: TurnView): boolean {
  return (
    view.holding !== null &&
    view.holding.invoke &&
    view.finalReply === null &&
    view.error === null
  );
}
