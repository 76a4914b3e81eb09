// Server-sent-events reader for the /events endpoint, built on fetch so the
// same code runs in the browser and under node tests. The service closes the
// stream when the game finishes or a `wait` deadline passes; the feed
// reconnects with the last seen id as the cursor.

import type { GameEvent } from './types.js';

export type SseFrame = { id: number | null; event: string; data: string };

/** Incremental parser for `id:`/`event:`/`data:` frames split on blank lines. */
export function createSseParser(onFrame: (frame: SseFrame) => void) {
  let buffer = '';

  function parseBlock(block: string): void {
    let id: number | null = null;
    let event = 'message';
    const data: string[] = [];
    for (const line of block.split('\n')) {
      if (line.startsWith('id:')) id = Number(line.slice(3).trim());
      else if (line.startsWith('event:')) event = line.slice(6).trim();
      else if (line.startsWith('data:')) data.push(line.slice(5).trim());
      // comment lines (":") and unknown fields are ignored per the SSE spec
    }
    if (data.length) onFrame({ id, event, data: data.join('\n') });
  }

  return {
    push(chunk: string): void {
      buffer += chunk.replace(/\r\n/g, '\n');
      let cut = buffer.indexOf('\n\n');
      while (cut >= 0) {
        const block = buffer.slice(0, cut);
        buffer = buffer.slice(cut + 2);
        if (block.trim()) parseBlock(block);
        cut = buffer.indexOf('\n\n');
      }
    },
    flush(): void {
      if (buffer.trim()) parseBlock(buffer);
      buffer = '';
    },
  };
}

export function frameToEvent(frame: SseFrame): GameEvent {
  const payload = JSON.parse(frame.data) as Record<string, unknown>;
  return { id: frame.id ?? 0, type: frame.event, ...payload } as GameEvent;
}

export type StreamOptions = {
  cursor?: number;
  wait?: number;
  signal?: AbortSignal;
  fetchImpl?: typeof fetch;
};

/** One connection: yields the events of a single (replay + live) fetch. */
export async function* streamEvents(
  baseUrl: string,
  sessionId: string,
  opts: StreamOptions = {},
): AsyncGenerator<GameEvent> {
  const doFetch = opts.fetchImpl ?? fetch;
  const cursor = opts.cursor ?? 0;
  const wait = opts.wait ?? 0;
  const url = `${baseUrl}/sessions/${sessionId}/events?cursor=${cursor}&wait=${wait}`;
  const res = await doFetch(url, { signal: opts.signal });
  if (!res.ok || !res.body) {
    throw new Error(`event stream failed with status ${res.status}`);
  }

  const frames: SseFrame[] = [];
  const parser = createSseParser((f) => frames.push(f));
  const reader = res.body.getReader();
  const decoder = new TextDecoder();
  try {
    while (true) {
      const { done, value } = await reader.read();
      if (done) break;
      parser.push(decoder.decode(value, { stream: true }));
      while (frames.length) yield frameToEvent(frames.shift()!);
    }
    parser.flush();
    while (frames.length) yield frameToEvent(frames.shift()!);
  } finally {
    reader.releaseLock();
  }
}

export type FeedHandlers = {
  onEvent: (event: GameEvent) => void;
  onError?: (err: unknown) => void;
};

/**
 * Long-lived feed: reconnects with the cursor after every server-side close,
 * stops by itself once an outcome event arrives (the game is over) or stop()
 * is called. Waits briefly before reconnecting after an error.
 */
export function startEventFeed(
  baseUrl: string,
  sessionId: string,
  handlers: FeedHandlers,
  opts: { wait?: number; retryMs?: number; fetchImpl?: typeof fetch } = {},
): { stop: () => void; cursor: () => number } {
  let cursor = 0;
  let stopped = false;
  const controller = new AbortController();
  const wait = opts.wait ?? 20;
  const retryMs = opts.retryMs ?? 1000;

  (async () => {
    while (!stopped) {
      try {
        const stream = streamEvents(baseUrl, sessionId, {
          cursor,
          wait,
          signal: controller.signal,
          fetchImpl: opts.fetchImpl,
        });
        for await (const event of stream) {
          cursor = Math.max(cursor, event.id);
          handlers.onEvent(event);
          if (event.type === 'outcome') {
            stopped = true;
          }
        }
      } catch (err) {
        if (stopped) break;
        handlers.onError?.(err);
        await new Promise((r) => setTimeout(r, retryMs));
      }
    }
  })();

  return {
    stop() {
      stopped = true;
      controller.abort();
    },
    cursor: () => cursor,
  };
}
