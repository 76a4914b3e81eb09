// Read-only replays of exported transcript JSONL. A transcript names both
// players' symbols, so a replay view reveals the whole board; it reuses the
// live board renderer by synthesizing a session view frozen at one step.

import type { Cell, Outcome, RoleName, SessionView, TurnJson } from './types.js';

export type TranscriptRow = {
  scenario: {
    rows: number;
    cols: number;
    goal: { letter: string; digit: string };
    first_player: RoleName;
    objects: Cell[];
  };
  actions: TurnJson[];
  outcome?: Outcome;
  abandoned?: boolean;
};

export function parseTranscripts(jsonl: string): TranscriptRow[] {
  const rows: TranscriptRow[] = [];
  for (const line of jsonl.split('\n')) {
    if (!line.trim()) continue;
    const row = JSON.parse(line) as TranscriptRow;
    if (!row.scenario || !Array.isArray(row.actions)) {
      throw new Error('not a transcript row: expected scenario and actions');
    }
    rows.push(row);
  }
  return rows;
}

/**
 * The game frozen after `upto` actions (0 = before the first move). Status is
 * pinned to finished so nothing renders as clickable and both symbol layers
 * show; the outcome frame appears only on the final step.
 */
export function replayView(row: TranscriptRow, upto: number): SessionView {
  const step = clampStep(row, upto);
  const atEnd = step === row.actions.length;
  const view: SessionView = {
    id: 'replay',
    status: 'finished',
    human_role: 'letters',
    agent: 'replay',
    config: {},
    seed: 0,
    debug: false,
    rows: row.scenario.rows,
    cols: row.scenario.cols,
    goal: row.scenario.goal,
    first_player: row.scenario.first_player,
    board: row.scenario.objects,
    history: row.actions.slice(0, step),
    scoreboard: scoreboardAt(row, step),
    ...(atEnd && row.outcome ? { outcome: row.outcome } : {}),
  };
  return view;
}

export function clampStep(row: TranscriptRow, upto: number): number {
  return Math.max(0, Math.min(row.actions.length, Math.floor(upto)));
}

function scoreboardAt(row: TranscriptRow, step: number) {
  let words = 0;
  let correct = 0;
  let wrong = 0;
  for (const turn of row.actions.slice(0, step)) {
    if (turn.type === 'message') words += turn.words.length;
  }
  if (step === row.actions.length && row.outcome) {
    if (row.outcome.correct) correct = 1;
    else wrong = 1;
  }
  return { correct_clicks: correct, wrong_clicks: wrong, words_sent: words };
}

export function replayStatus(row: TranscriptRow, upto: number): string {
  const step = clampStep(row, upto);
  const total = row.actions.length;
  if (step < total) return `step ${step} of ${total}`;
  if (row.outcome) {
    const [r, c] = row.outcome.clicked;
    return row.outcome.correct
      ? `correct click at (${r}, ${c})`
      : `wrong click at (${r}, ${c})`;
  }
  return row.abandoned ? 'abandoned' : `step ${step} of ${total}`;
}
