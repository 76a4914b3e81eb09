// Full game flows against a live service process. The suite spawns
// `gridtalk serve` itself, so the backend package must be installed
// (pip install -e . in the repository root).

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { createServer } from 'node:net';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { Api, ApiError } from '../src/api.js';
import { addChip, chipEnabled, emptyComposer } from '../src/rules.js';
import { startEventFeed, streamEvents } from '../src/sse.js';
import type { GameEvent, SessionView } from '../src/types.js';
import { boardViewModel } from '../src/viewmodel.js';

// the reference board: goal B2 sits at (1,1); the letters player moves first
const SCENARIO = {
  rows: 2,
  cols: 3,
  goal: { letter: 'B', digit: '2' },
  first_player: 'letters',
  objects: [
    { row: 1, col: 1, color: 'blue', shape: 'square', letter: 'B', digit: '2' },
    { row: 1, col: 2, color: 'yellow', shape: 'circle', letter: 'B', digit: '1' },
    { row: 1, col: 3, color: 'green', shape: 'diamond', letter: 'A', digit: '2' },
    { row: 2, col: 1, color: 'green', shape: 'circle', letter: 'A', digit: '2' },
    { row: 2, col: 2, color: 'blue', shape: 'diamond', letter: 'B', digit: '1' },
    { row: 2, col: 3, color: 'yellow', shape: 'square', letter: 'A', digit: '1' },
  ],
};

// greedy with this seed answers "blue" with a message, keeping the flow scripted
const SESSION_BODY = {
  scenario: SCENARIO,
  human_role: 'letters' as const,
  agent: 'greedy',
  agent_seed: 5,
  debug: true,
};

let proc: ChildProcess;
let baseUrl: string;
let exportPath: string;
let api: Api;
let stderrTail = '';

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.once('error', reject);
    srv.listen(0, '127.0.0.1', () => {
      const address = srv.address();
      if (address && typeof address === 'object') {
        const port = address.port;
        srv.close(() => resolve(port));
      } else {
        srv.close(() => reject(new Error('no port assigned')));
      }
    });
  });
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  exportPath = join(mkdtempSync(join(tmpdir(), 'gridtalk-ui-')), 'played.jsonl');
  const boot =
    'from gridtalk.cli import main; ' +
    `raise SystemExit(main(['serve', '--port', '${port}', '--export', '${exportPath}']))`;
  proc = spawn('python3', ['-c', boot], { stdio: ['ignore', 'ignore', 'pipe'] });
  proc.stderr?.on('data', (chunk: Buffer) => {
    stderrTail = (stderrTail + chunk.toString()).slice(-4000);
  });
  api = new Api(baseUrl);

  const deadline = Date.now() + 60_000;
  while (true) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early:\n${stderrTail}`);
    }
    try {
      const res = await fetch(`${baseUrl}/sessions/does-not-exist`);
      if (res.status === 404) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service never came up:\n${stderrTail}`);
    }
    await new Promise((r) => setTimeout(r, 200));
  }
});

afterAll(() => {
  proc?.kill();
});

describe('full game against the live service', () => {
  let view: SessionView;

  it('creates a session awaiting the human opener', async () => {
    const reply = await api.createSession(SESSION_BODY);
    view = reply.session;
    expect(view.status).toBe('awaiting_human');
    expect(view.history).toHaveLength(0);
    expect(reply.agent_action).toBeNull();
    // letters viewer: own symbols present, agent symbols absent
    for (const cell of view.board) {
      expect(cell.letter).toBeTruthy();
      expect(cell).not.toHaveProperty('digit');
    }
  });

  it('blocks clicks at t=1 in the view model and on the server', async () => {
    expect(boardViewModel(view).cells.every((c) => !c.clickable)).toBe(true);
    // (1,1) is own-consistent, so the first-step ban is the rule that fires
    const attempt = api.postAction(view.id, { type: 'click', row: 1, col: 1 });
    await expect(attempt).rejects.toMatchObject({ status: 400, rule: 'first_step_click' });
  });

  it('blocks a third word chip and the server agrees on the limit', async () => {
    let composer = emptyComposer();
    composer = addChip(view, composer, 'blue');
    composer = addChip(view, composer, 'top');
    const blocked = addChip(view, composer, 'green');
    expect(blocked.chips).toEqual(['blue', 'top']);
    expect(blocked.hint).toMatch(/two words/);
    expect(chipEnabled(view, composer, 'green')).toBe(false);

    const attempt = api.postAction(view.id, { type: 'message', raw: 'blue top green' });
    await expect(attempt).rejects.toMatchObject({ status: 400, rule: 'too_many_words' });
  });

  it('sends "blue" and gets an agent message back', async () => {
    const reply = await api.postAction(view.id, { type: 'message', words: ['blue'] });
    view = reply.session;
    expect(reply.agent_action).toMatchObject({ type: 'message', words: ['right'] });
    expect(view.status).toBe('awaiting_human');
    expect(view.history.map((t) => t.player)).toEqual(['letters', 'digits']);
    expect(view.scoreboard.words_sent).toBe(2);
  });

  it('delivers both actions as events, and replays from a cursor', async () => {
    const events: GameEvent[] = [];
    for await (const e of streamEvents(baseUrl, view.id, { cursor: 0, wait: 5 })) {
      events.push(e);
      if (events.length === 2) break;
    }
    expect(events[0]).toMatchObject({ id: 1, type: 'action', t: 1, player: 'letters' });
    expect(events[1]).toMatchObject({ id: 2, type: 'action', t: 2, player: 'digits' });
    const agentReply = events[1];
    expect(agentReply.type === 'action' && agentReply.action).toMatchObject({
      type: 'message',
      words: ['right'],
    });

    const tail: GameEvent[] = [];
    for await (const e of streamEvents(baseUrl, view.id, { cursor: 1, wait: 0 })) {
      tail.push(e);
    }
    expect(tail.map((e) => e.id)).toEqual([2]);
  });

  it('shades cells by the agent beliefs while the game runs', async () => {
    const beliefs = await api.getBeliefs(view.id);
    expect(beliefs.viewer).toBe('digits');
    expect(beliefs.about).toBe('letters');
    expect(beliefs.marginals).toHaveLength(2);
    expect(beliefs.marginals[0]).toHaveLength(3);
    const vm = boardViewModel(view, beliefs);
    for (const cell of vm.cells) {
      expect(cell.heat).toBeGreaterThanOrEqual(0);
      expect(cell.heat).toBeLessThanOrEqual(1);
      expect(cell.heat!).toBeCloseTo(beliefs.marginals[cell.row - 1][cell.col - 1], 3);
    }
  });

  it('finishes with a green frame and a correct scoreboard on the goal click', async () => {
    const vmBefore = boardViewModel(view);
    expect(vmBefore.cells.find((c) => c.row === 1 && c.col === 1)?.clickable).toBe(true);

    const reply = await api.postAction(view.id, { type: 'click', row: 1, col: 1 });
    view = reply.session;
    expect(view.status).toBe('finished');
    expect(view.outcome).toEqual({ correct: true, clicked: [1, 1] });
    expect(view.utility).toBe(-50); // three actions, correct click
    expect(view.scoreboard).toEqual({ correct_clicks: 1, wrong_clicks: 0, words_sent: 2 });

    const vm = boardViewModel(view);
    const clicked = vm.cells.find((c) => c.row === 1 && c.col === 1)!;
    expect(clicked.frame).toBe('green');
    expect(vm.cells.filter((c) => c.frame !== null)).toHaveLength(1);
    // the agent's symbols become visible only now
    expect(vm.cells.every((c) => c.partnerSymbol !== '')).toBe(true);
  });

  it('emits exactly one outcome event at the end of the feed', async () => {
    const events: GameEvent[] = [];
    for await (const e of streamEvents(baseUrl, view.id, { cursor: 0, wait: 0 })) {
      events.push(e);
    }
    expect(events.map((e) => e.id)).toEqual([1, 2, 3, 4]);
    const outcomes = events.filter((e) => e.type === 'outcome');
    expect(outcomes).toHaveLength(1);
    expect(outcomes[0]).toMatchObject({ correct: true, utility: -50 });
  });

  it('rejects further actions once the game is over', async () => {
    const attempt = api.postAction(view.id, { type: 'message', words: ['yes'] });
    await expect(attempt).rejects.toMatchObject({ status: 409, rule: 'game_over' });
  });
});

describe('wrong click', () => {
  it('frames the clicked cell red and counts the miss', async () => {
    const reply = await api.createSession(SESSION_BODY);
    let view = reply.session;
    view = (await api.postAction(view.id, { type: 'message', words: ['blue'] })).session;
    // (1,2) carries letter B (clickable) but digit 1: a near miss
    view = (await api.postAction(view.id, { type: 'click', row: 1, col: 2 })).session;
    expect(view.outcome).toEqual({ correct: false, clicked: [1, 2] });
    expect(view.scoreboard).toEqual({ correct_clicks: 0, wrong_clicks: 1, words_sent: 2 });
    const clicked = boardViewModel(view).cells.find((c) => c.row === 1 && c.col === 2)!;
    expect(clicked.frame).toBe('red');
  });
});

describe('event feed against the live service', () => {
  it('follows a whole game and stops on the outcome', async () => {
    const reply = await api.createSession(SESSION_BODY);
    const id = reply.session.id;
    const seen: GameEvent[] = [];
    const feed = startEventFeed(baseUrl, id, { onEvent: (e) => seen.push(e) }, { wait: 2 });
    try {
      await api.postAction(id, { type: 'message', words: ['blue'] });
      await waitFor(() => seen.length >= 2);
      await api.postAction(id, { type: 'click', row: 2, col: 2 });
      await waitFor(() => seen.some((e) => e.type === 'outcome'));
      expect(seen.map((e) => e.id)).toEqual([1, 2, 3, 4]);
    } finally {
      feed.stop();
    }
  });
});

describe('privacy and debug gating', () => {
  it('keeps the beliefs endpoint behind the debug flag', async () => {
    const { debug: _debug, ...withoutDebug } = SESSION_BODY;
    const reply = await api.createSession(withoutDebug);
    const attempt = api.getBeliefs(reply.session.id);
    await expect(attempt).rejects.toMatchObject({ status: 403, rule: 'debug_disabled' });
    await expect(attempt).rejects.toBeInstanceOf(ApiError);
  });
});

describe('export', () => {
  it('appends finished games as JSONL rows the evaluator can read', () => {
    const lines = readFileSync(exportPath, 'utf-8')
      .split('\n')
      .filter((l) => l.trim());
    expect(lines.length).toBeGreaterThanOrEqual(3); // three finished games above
    for (const line of lines) {
      const row = JSON.parse(line);
      expect(row.scenario).toMatchObject({ rows: 2, cols: 3 });
      expect(row.actions.length).toBeGreaterThan(0);
    }
  });
});

async function waitFor(cond: () => boolean, timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!cond()) {
    if (Date.now() > deadline) throw new Error('condition never became true');
    await new Promise((r) => setTimeout(r, 50));
  }
}
