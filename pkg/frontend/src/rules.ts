// Client mirrors of the service's turn and message rules. Everything here
// only gates the UI; the server remains the source of truth and anything it
// rejects is shown with its own rule name.

import type { Cell, RoleName, SessionView, TurnJson } from './types.js';

export const COLOR_WORDS = ['blue', 'yellow', 'green'] as const;
export const SHAPE_WORDS = ['square', 'diamond', 'circle'] as const;
export const POSITION_WORDS = ['top', 'bottom', 'left', 'right', 'middle'] as const;
export const VERIFY_WORDS = ['yes', 'no'] as const;

export const INFORMATIVE_WORDS: readonly string[] = [
  ...COLOR_WORDS,
  ...SHAPE_WORDS,
  ...POSITION_WORDS,
];
export const ALL_WORDS: readonly string[] = [...INFORMATIVE_WORDS, ...VERIFY_WORDS];

export function isVerifyWord(word: string): boolean {
  return (VERIFY_WORDS as readonly string[]).includes(word);
}

export function turnNumber(view: SessionView): number {
  return view.history.length + 1;
}

export function humanTurn(view: SessionView): boolean {
  return view.status === 'awaiting_human';
}

function lastTurn(view: SessionView): TurnJson | null {
  return view.history.length ? view.history[view.history.length - 1] : null;
}

/** yes/no are replies: only legal right after a partner informative message. */
export function yesNoEnabled(view: SessionView): boolean {
  const last = lastTurn(view);
  return (
    !!last &&
    last.type === 'message' &&
    last.player !== view.human_role &&
    last.words.every((w) => INFORMATIVE_WORDS.includes(w))
  );
}

/** The human's own hidden symbol on a cell ('' before the view reveals it). */
export function ownSymbol(view: SessionView, cell: Cell): string {
  return (view.human_role === 'letters' ? cell.letter : cell.digit) ?? '';
}

export function partnerRole(view: SessionView): RoleName {
  return view.human_role === 'letters' ? 'digits' : 'letters';
}

/** Goal-consistency of a cell for the human (drives click legality). */
export function cellMine(view: SessionView, cell: Cell): boolean {
  const goal = view.human_role === 'letters' ? view.goal.letter : view.goal.digit;
  return ownSymbol(view, cell) === goal;
}

/** Clicks are banned on the very first turn and on own-inconsistent cells. */
export function cellClickable(view: SessionView, cell: Cell): boolean {
  return humanTurn(view) && turnNumber(view) >= 2 && cellMine(view, cell);
}

// ------------------------------------------------------------- composer --

export type Composer = {
  chips: string[];
  hint: string | null;
};

export function emptyComposer(): Composer {
  return { chips: [], hint: null };
}

/** Whether a chip button should be pressable right now. */
export function chipEnabled(view: SessionView, composer: Composer, word: string): boolean {
  if (!humanTurn(view)) return false;
  if (composer.chips.includes(word)) return false;
  if (isVerifyWord(word)) {
    // yes/no travel alone and only as a direct reply
    return yesNoEnabled(view) && composer.chips.length === 0;
  }
  return composer.chips.length < 2 && !composer.chips.some(isVerifyWord);
}

export function addChip(view: SessionView, composer: Composer, word: string): Composer {
  if (!ALL_WORDS.includes(word)) {
    return { ...composer, hint: `unknown word "${word}"` };
  }
  if (!humanTurn(view)) {
    return { ...composer, hint: 'waiting for the agent to move' };
  }
  if (composer.chips.includes(word)) {
    return { ...composer, hint: 'message words must be distinct' };
  }
  if (isVerifyWord(word)) {
    if (!yesNoEnabled(view)) {
      return { ...composer, hint: `"${word}" only answers a partner statement` };
    }
    if (composer.chips.length > 0) {
      return { ...composer, hint: `"${word}" must be sent on its own` };
    }
  } else if (composer.chips.some(isVerifyWord)) {
    return { ...composer, hint: 'yes/no must be sent on their own' };
  } else if (composer.chips.length >= 2) {
    return { ...composer, hint: 'messages carry at most two words' };
  }
  return { chips: [...composer.chips, word], hint: null };
}

export function removeChip(composer: Composer, index: number): Composer {
  return { chips: composer.chips.filter((_, i) => i !== index), hint: null };
}

export function canSubmit(composer: Composer): boolean {
  return composer.chips.length >= 1 && composer.chips.length <= 2;
}

/**
 * Raw-text mode: same mapping the evaluation pipeline applies to free text.
 * Lowercased whitespace tokens, known words only, first occurrence of each,
 * first two kept. Null when nothing survives.
 */
export function canonicalizeRaw(rawText: string): string[] | null {
  const kept: string[] = [];
  for (const tok of rawText.toLowerCase().split(/\s+/)) {
    if (ALL_WORDS.includes(tok) && !kept.includes(tok)) kept.push(tok);
  }
  if (kept.length === 0) return null;
  return kept.slice(0, 2);
}
