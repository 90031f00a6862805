import { describe, expect, it } from "vitest";

import type { SseFrame } from "../src/api.js";
import {
  applyFrame,
  beginTurn,
  createState,
  isThinking,
  nextTurnIndex,
  visibleReply,
} from "../src/state.js";

function frame(event: string, data: Record<string, unknown>): SseFrame {
  return { event, data };
}

describe("applyFrame", () => {
  it("treats a non-invoking fast reply as the visible reply", () => {
    const state = createState();
    beginTurn(state, 0, "Hi");
    expect(applyFrame(state, frame("fast_reply", { turn: 0, invoke: false, response: "Hello!" }))).toBe(true);

    const view = state.turns[0];
    expect(visibleReply(view)).toBe("Hello!");
    expect(isThinking(view)).toBe(false);
  });

  it("keeps an invoking turn in the thinking state until the final reply", () => {
    const state = createState();
    beginTurn(state, 0, "lookup");
    applyFrame(state, frame("fast_reply", { turn: 0, invoke: true, response: "One moment." }));

    const view = state.turns[0];
    expect(visibleReply(view)).toBeNull();
    expect(isThinking(view)).toBe(true);

    applyFrame(state, frame("final_reply", { turn: 0, response: "Done." }));
    expect(visibleReply(view)).toBe("Done.");
    expect(isThinking(view)).toBe(false);
  });

  it("applies each set-once event only the first time", () => {
    const state = createState();
    beginTurn(state, 0, "q");
    const events: Array<[string, Record<string, unknown>]> = [
      ["fast_reply", { turn: 0, invoke: true, response: "hold" }],
      ["slow_done", { turn: 0, final_result: "r", terminated_by: "Finish", steps: 1 }],
      ["final_reply", { turn: 0, response: "done" }],
      ["error", { turn: 0, error: "BackendUnavailable", message: "down" }],
    ];
    for (const [name, data] of events) {
      expect(applyFrame(state, frame(name, data))).toBe(true);
      expect(applyFrame(state, frame(name, data))).toBe(false);
    }

    const view = state.turns[0];
    expect(view.holding).toEqual({ response: "hold", invoke: true });
    expect(view.slowDone).toEqual({ finalResult: "r", terminatedBy: "Finish", steps: 1 });
    expect(view.finalReply).toBe("done");
    expect(view.error).toBe("BackendUnavailable: down");
  });

  it("appends distinct steps but drops a re-delivery of the newest step", () => {
    const state = createState();
    beginTurn(state, 0, "q");
    const reason = frame("slow_step", { turn: 0, kind: "Reason", payload: "think" });
    const act = frame("slow_step", {
      turn: 0,
      kind: "Act",
      payload: "",
      tool_name: "calculator",
      tool_args: "1+1",
    });

    expect(applyFrame(state, reason)).toBe(true);
    expect(applyFrame(state, reason)).toBe(false);
    expect(applyFrame(state, act)).toBe(true);
    expect(applyFrame(state, act)).toBe(false);

    expect(state.turns[0].steps).toEqual([
      { kind: "Reason", payload: "think" },
      { kind: "Act", payload: "", toolName: "calculator", toolArgs: "1+1" },
    ]);
  });

  it("allows identical step payloads when they are not adjacent", () => {
    const state = createState();
    beginTurn(state, 0, "q");
    const act = { turn: 0, kind: "Act", payload: "", tool_name: "calculator", tool_args: "1+1" };
    const obs = { turn: 0, kind: "Obs", payload: "2" };

    applyFrame(state, frame("slow_step", act));
    applyFrame(state, frame("slow_step", obs));
    applyFrame(state, frame("slow_step", act));
    applyFrame(state, frame("slow_step", obs));

    expect(state.turns[0].steps.map((s) => s.kind)).toEqual(["Act", "Obs", "Act", "Obs"]);
  });

  it("ignores frames without a numeric turn or with unknown names", () => {
    const state = createState();
    expect(applyFrame(state, frame("fast_reply", { invoke: false, response: "x" }))).toBe(false);
    expect(applyFrame(state, frame("mystery", { turn: 0 }))).toBe(false);
    expect(state.turns).toEqual([]);
  });

  it("creates turn views on demand and keeps them ordered", () => {
    const state = createState();
    applyFrame(state, frame("final_reply", { turn: 2, response: "late" }));
    applyFrame(state, frame("final_reply", { turn: 0, response: "early" }));
    expect(state.turns.map((t) => t.turn)).toEqual([0, 2]);
    expect(nextTurnIndex(state)).toBe(3);
  });

  it("starts turn numbering at zero", () => {
    expect(nextTurnIndex(createState())).toBe(0);
  });
});
