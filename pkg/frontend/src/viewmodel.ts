// Pure derivation of what gets painted: cells with their symbol, click
// gate, outcome frame and belief shading, plus the transcript and status
// line. app.ts only walks these structures.

import { cellClickable, cellMine, ownSymbol } from './rules.js';
import type { BeliefsPayload, Cell, SessionView, TurnJson } from './types.js';

export type CellVM = {
  row: number;
  col: number;
  color: string;
  shape: string;
  symbol: string; // the human's own hidden symbol ('' if unknown)
  partnerSymbol: string; // revealed only after the game ends
  mine: boolean;
  clickable: boolean;
  heat: number | null; // agent belief that this cell is goal-consistent for the human
  frame: 'green' | 'red' | null;
};

export type BoardVM = {
  rows: number;
  cols: number;
  cells: CellVM[]; // row-major
};

export function boardViewModel(view: SessionView, beliefs: BeliefsPayload | null = null): BoardVM {
  const clicked = view.outcome?.clicked ?? null;
  const cells = [...view.board]
    .sort((a, b) => a.row - b.row || a.col - b.col)
    .map((cell) => ({
      row: cell.row,
      col: cell.col,
      color: cell.color,
      shape: cell.shape,
      symbol: ownSymbol(view, cell),
      partnerSymbol: partnerSymbolOf(view, cell),
      mine: cellMine(view, cell),
      clickable: cellClickable(view, cell),
      heat: heatOf(beliefs, cell),
      frame: frameOf(view, clicked, cell),
    }));
  return { rows: view.rows, cols: view.cols, cells };
}

function partnerSymbolOf(view: SessionView, cell: Cell): string {
  return (view.human_role === 'letters' ? cell.digit : cell.letter) ?? '';
}

function heatOf(beliefs: BeliefsPayload | null, cell: Cell): number | null {
  if (!beliefs) return null;
  const row = beliefs.marginals[cell.row - 1];
  const value = row?.[cell.col - 1];
  return typeof value === 'number' ? value : null;
}

function frameOf(
  view: SessionView,
  clicked: [number, number] | null,
  cell: Cell,
): 'green' | 'red' | null {
  if (!clicked || !view.outcome) return null;
  if (clicked[0] !== cell.row || clicked[1] !== cell.col) return null;
  return view.outcome.correct ? 'green' : 'red';
}

// ------------------------------------------------------------ transcript --

export type TranscriptLine = {
  t: number;
  who: 'you' | 'agent';
  text: string;
};

export function describeTurn(view: SessionView, turn: TurnJson): TranscriptLine {
  const who = turn.player === view.human_role ? 'you' : 'agent';
  const text =
    turn.type === 'message' ? `"${turn.words.join(' ')}"` : `clicked (${turn.row}, ${turn.col})`;
  return { t: turn.t, who, text };
}

export function transcriptLines(view: SessionView): TranscriptLine[] {
  return view.history.map((turn) => describeTurn(view, turn));
}

export function statusLine(view: SessionView): string {
  if (view.status === 'finished') {
    const outcome = view.outcome;
    const verdict = outcome?.correct ? 'correct click' : 'wrong click';
    return `game over: ${verdict}, utility ${view.utility}`;
  }
  return view.status === 'awaiting_human' ? 'your turn' : 'agent is thinking';
}

export function goalLabel(view: SessionView): string {
  return `${view.goal.letter}${view.goal.digit}`;
}

/** Background shade for a belief value: transparent at 0, saturated at 1. */
export function heatColor(value: number): string {
  const clamped = Math.max(0, Math.min(1, value));
  return `rgba(255, 96, 0, ${(clamped * 0.85).toFixed(3)})`;
}
