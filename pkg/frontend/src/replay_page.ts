// DOM glue for the static replay page: paste or load a transcript JSONL,
// pick a game, step through it.

import { clampStep, parseTranscripts, replayStatus, replayView } from './replay.js';
import type { TranscriptRow } from './replay.js';
import { boardViewModel, goalLabel, transcriptLines } from './viewmodel.js';

let rows: TranscriptRow[] = [];
let gameIndex = 0;
let step = 0;

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function load(text: string): void {
  const banner = byId<HTMLDivElement>('banner');
  try {
    rows = parseTranscripts(text);
    gameIndex = 0;
    banner.textContent = '';
    banner.className = 'banner hidden';
    const picker = byId<HTMLSelectElement>('game');
    picker.replaceChildren();
    rows.forEach((row, i) => {
      const opt = document.createElement('option');
      opt.value = String(i);
      const verdict = row.outcome ? (row.outcome.correct ? 'correct' : 'wrong') : 'abandoned';
      opt.textContent = `game ${i + 1} (${row.actions.length} actions, ${verdict})`;
      picker.append(opt);
    });
    showGame(0);
  } catch (err) {
    banner.textContent = String(err);
    banner.className = 'banner error';
  }
}

function showGame(index: number): void {
  gameIndex = index;
  step = rows[index]?.actions.length ?? 0; // open on the finished position
  render();
}

function render(): void {
  const row = rows[gameIndex];
  const board = byId<HTMLDivElement>('board');
  board.replaceChildren();
  if (!row) return;
  step = clampStep(row, step);
  const view = replayView(row, step);

  byId('goal').textContent = `goal ${goalLabel(view)}`;
  byId('status').textContent = replayStatus(row, step);

  const vm = boardViewModel(view);
  board.style.gridTemplateColumns = `repeat(${vm.cols}, 92px)`;
  for (const cell of vm.cells) {
    const node = document.createElement('div');
    node.className = `cell shape-${cell.shape} color-${cell.color}`;
    if (cell.frame) node.classList.add(`frame-${cell.frame}`);
    const glyph = document.createElement('div');
    glyph.className = 'glyph';
    const own = document.createElement('span');
    own.className = 'symbol';
    own.textContent = cell.symbol;
    const partner = document.createElement('span');
    partner.className = 'partner-symbol';
    partner.textContent = cell.partnerSymbol;
    glyph.append(own, partner);
    node.append(glyph);
    board.append(node);
  }

  const log = byId<HTMLUListElement>('transcript');
  log.replaceChildren();
  for (const line of transcriptLines(view)) {
    const li = document.createElement('li');
    li.className = `turn ${line.who}`;
    li.textContent = `t${line.t} ${line.who === 'you' ? 'letters' : 'digits'}: ${line.text}`;
    log.append(li);
  }
}

export function main(): void {
  byId<HTMLButtonElement>('load').addEventListener('click', () => {
    load(byId<HTMLTextAreaElement>('paste').value);
  });
  byId<HTMLInputElement>('file').addEventListener('change', async (evt) => {
    const file = (evt.target as HTMLInputElement).files?.[0];
    if (file) load(await file.text());
  });
  byId<HTMLSelectElement>('game').addEventListener('change', (evt) => {
    showGame(Number((evt.target as HTMLSelectElement).value));
  });
  byId<HTMLButtonElement>('prev').addEventListener('click', () => {
    step -= 1;
    render();
  });
  byId<HTMLButtonElement>('next').addEventListener('click', () => {
    step += 1;
    render();
  });
}

main();
