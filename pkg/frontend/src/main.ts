// Page wiring: one session against the chat service, one streaming turn at a
// time, with the transcript re-rendered after every event.

import { createSession, streamTurn } from "./api.js";
import { renderTranscript } from "./render.js";
import { applyFrame, beginTurn, createState, nextTurnIndex } from "./state.js";

const state = createState();
let sessionId: string | null = null;
let sending = false;

const transcript = document.getElementById("transcript") as HTMLElement;
const form = document.getElementById("composer") as HTMLFormElement;
const input = document.getElementById("question") as HTMLInputElement;
const sendButton = document.getElementById("send") as HTMLButtonElement;
const serverInput = document.getElementById("server") as HTMLInputElement;
const statusLine = document.getElementById("status") as HTMLElement;

function setStatus(text: string, kind: "ok" | "busy" | "error" = "ok"): void {
  statusLine.textContent = text;
  statusLine.className = `status ${kind}`;
}

function setSending(value: boolean): void {
  sending = value;
  sendButton.disabled = value;
  input.disabled = value;
}

function render(): void {
  renderTranscript(transcript, state);
  transcript.scrollTop = transcript.scrollHeight;
}

async function ensureSession(baseUrl: string): Promise<string> {
  if (sessionId !== null) return sessionId;
  sessionId = await createSession(baseUrl);
  setStatus(`session ${sessionId.slice(0, 12)}…`);
  return sessionId;
}

async function send(question: string): Promise<void> {
  const baseUrl = serverInput.value.replace(/\/$/, "");
  setSending(true);
  try {
    const sid = await ensureSession(baseUrl);
    const turn = nextTurnIndex(state);
    beginTurn(state, turn, question);
    render();
    setStatus("streaming…", "busy");
    await streamTurn({
      baseUrl,
      sessionId: sid,
      question,
      onFrame: (frame) => {
        if (applyFrame(state, frame)) render();
      },
    });
    setStatus(`session ${sid.slice(0, 12)}…`);
  } catch (err) {
    setStatus(err instanceof Error ? err.message : String(err), "error");
  } finally {
    setSending(false);
    input.focus();
  }
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  const question = input.value.trim();
  if (question === "" || sending) return;
  input.value = "";
  void send(question);
});

serverInput.addEventListener("change", () => {
  // A different server means a fresh session on the next send.
  sessionId = null;
  state.turns.length = 0;
  render();
  setStatus("server changed; a new session starts with the next message");
});

setStatus("ready — a session is created with the first message");
input.focus();
