// HTTP + SSE client for the dual-mind chat service. The page talks to the
// runtime only through the calls in this module.

export interface SseFrame {
  event: string;
  data: unknown;
}

export type FrameHandler = (frame: SseFrame) => void;

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

// ── SSE parsing ───────────────────────────────────────────────────────────────

/**
 * Incremental parser for a text/event-stream body. Feed it decoded chunks in
 * arrival order; it returns the frames completed by each chunk, buffering
 * partial frames across chunk boundaries.
 */
export class SseParser {
  private buffer = "";

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    const parts = this.buffer.split(/\r?\n\r?\n/);
    this.buffer = parts.pop() ?? "";

    for (const part of parts) {
      let event = "message";
      const dataLines: string[] = [];
      for (const rawLine of part.split(/\r?\n/)) {
        if (rawLine.startsWith("event:")) {
          event = rawLine.slice(6).trim();
        } else if (rawLine.startsWith("data:")) {
          dataLines.push(rawLine.slice(5).replace(/^ /, ""));
        }
      }
      if (dataLines.length === 0) continue;
      const dataStr = dataLines.join("\n");
      let data: unknown;
      try {
        data = JSON.parse(dataStr);
      } catch {
        data = dataStr;
      }
      frames.push({ event, data });
    }
    return frames;
  }
}

// ── Service calls ─────────────────────────────────────────────────────────────

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let detail = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { error?: string; message?: string };
    if (body.error) detail = `${body.error}: ${body.message ?? ""}`.trim();
  } catch {
    // keep the bare status line
  }
  throw new Error(detail);
}

export async function createSession(
  baseUrl: string,
  configName = "default",
  fetchImpl: FetchLike = fetch,
): Promise<string> {
  const response = await fetchImpl(`${baseUrl}/v1/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ config_name: configName }),
  });
  await raiseForStatus(response);
  const body = (await response.json()) as { session_id: string };
  return body.session_id;
}

/**
 * Run one turn and stream its events. Resolves when the server closes the
 * stream; every frame (including the terminal `error` frame, if any) has been
 * handed to `onFrame` by then.
 */
export async function streamTurn(args: {
  baseUrl: string;
  sessionId: string;
  question: string;
  onFrame: FrameHandler;
  fetchImpl?: FetchLike;
  signal?: AbortSignal;
}): Promise<void> {
  const fetchImpl = args.fetchImpl ?? fetch;
  const response = await fetchImpl(
    `${args.baseUrl}/v1/sessions/${args.sessionId}/turns`,
    {
      method: "POST",
      headers: {
        "content-type": "application/json",
        accept: "text/event-stream",
      },
      body: JSON.stringify({ question: args.question }),
      signal: args.signal,
    },
  );
  await raiseForStatus(response);
  if (!response.body) throw new Error("response has no body to stream");

  const reader = response.body.getReader();
  const decoder = new TextDecoder("utf-8");
  const parser = new SseParser();
  while (true) {
    const { value, done } = await reader.read();
    if (done) break;
    for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
      args.onFrame(frame);
    }
  }
}

export interface MemoryRecord {
  turn: number;
  kind: string;
  payload: Record<string, unknown>;
  ts: string;
}

export async function fetchMemory(
  baseUrl: string,
  sessionId: string,
  fetchImpl: FetchLike = fetch,
): Promise<{ records: MemoryRecord[]; failed_turns: number[] }> {
  const response = await fetchImpl(`${baseUrl}/v1/sessions/${sessionId}/memory`);
  await raiseForStatus(response);
  return (await response.json()) as { records: MemoryRecord[]; failed_turns: number[] };
}
