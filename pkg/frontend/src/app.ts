// DOM wiring. All game logic lives in rules.ts / viewmodel.ts; this file
// paints their output and forwards clicks to the service.

import { Api, ApiError } from './api.js';
import {
  ALL_WORDS,
  addChip,
  canSubmit,
  canonicalizeRaw,
  chipEnabled,
  emptyComposer,
  humanTurn,
  removeChip,
  type Composer,
} from './rules.js';
import { startEventFeed } from './sse.js';
import type { BeliefsPayload, RoleName, SessionView } from './types.js';
import {
  boardViewModel,
  goalLabel,
  heatColor,
  statusLine,
  transcriptLines,
} from './viewmodel.js';

const params = new URLSearchParams(location.search);
const apiBase = params.get('api') ?? `http://${location.hostname || '127.0.0.1'}:8080`;
const rawMode = params.get('raw') === '1';
const api = new Api(apiBase);

type AppState = {
  view: SessionView | null;
  beliefs: BeliefsPayload | null;
  beliefsDenied: boolean;
  composer: Composer;
  banner: { kind: 'error' | 'info'; text: string } | null;
  feed: { stop: () => void } | null;
};

const state: AppState = {
  view: null,
  beliefs: null,
  beliefsDenied: false,
  composer: emptyComposer(),
  banner: null,
  feed: null,
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

// --------------------------------------------------------------- actions --

async function refreshBeliefs(): Promise<void> {
  const view = state.view;
  state.beliefs = null;
  if (!view || state.beliefsDenied || !view.debug) return;
  try {
    state.beliefs = await api.getBeliefs(view.id);
  } catch (err) {
    if (err instanceof ApiError && err.status === 403) {
      // overlay simply stays hidden for non-debug sessions
      state.beliefsDenied = true;
    } else {
      showError(err);
    }
  }
}

async function adoptView(view: SessionView): Promise<void> {
  state.view = view;
  state.composer = emptyComposer();
  await refreshBeliefs();
  render();
}

async function startGame(): Promise<void> {
  state.feed?.stop();
  state.banner = null;
  state.beliefsDenied = false;
  const seedRaw = byId<HTMLInputElement>('seed').value.trim();
  const body = {
    seed: seedRaw === '' ? Math.floor(Math.random() * 1e9) : Number(seedRaw),
    human_role: byId<HTMLSelectElement>('role').value as RoleName,
    agent: byId<HTMLSelectElement>('agent').value,
    debug: byId<HTMLInputElement>('debug').checked,
  };
  try {
    const reply = await api.createSession(body);
    await adoptView(reply.session);
    state.feed = startEventFeed(apiBase, reply.session.id, {
      onEvent: async () => {
        // the server view is authoritative; re-fetch instead of patching
        if (!state.view) return;
        try {
          await adoptView(await api.getSession(state.view.id));
        } catch (err) {
          showError(err);
        }
      },
      onError: () => {
        state.banner = { kind: 'info', text: 'reconnecting to the event stream...' };
        render();
      },
    });
  } catch (err) {
    showError(err);
    render();
  }
}

async function sendWords(words: string[]): Promise<void> {
  const view = state.view;
  if (!view) return;
  try {
    const reply = await api.postAction(view.id, { type: 'message', words });
    state.banner = null;
    await adoptView(reply.session);
  } catch (err) {
    showError(err);
    render();
  }
}

async function sendClick(row: number, col: number): Promise<void> {
  const view = state.view;
  if (!view) return;
  try {
    const reply = await api.postAction(view.id, { type: 'click', row, col });
    state.banner = null;
    await adoptView(reply.session);
  } catch (err) {
    showError(err);
    render();
  }
}

function showError(err: unknown): void {
  if (err instanceof ApiError) {
    state.banner = { kind: 'error', text: `${err.rule}: ${err.message}` };
  } else {
    state.banner = { kind: 'error', text: String(err) };
  }
}

// ---------------------------------------------------------------- render --

function render(): void {
  renderBanner();
  renderStatus();
  renderBoard();
  renderComposer();
  renderScoreboard();
  renderTranscript();
}

function renderBanner(): void {
  const banner = byId<HTMLDivElement>('banner');
  banner.textContent = state.banner?.text ?? '';
  banner.className = state.banner ? `banner ${state.banner.kind}` : 'banner hidden';
}

function renderStatus(): void {
  const view = state.view;
  byId('status').textContent = view ? statusLine(view) : 'no game yet';
  byId('goal').textContent = view ? `goal ${goalLabel(view)} (you see ${view.human_role})` : '';
}

function renderBoard(): void {
  const view = state.view;
  const board = byId<HTMLDivElement>('board');
  board.replaceChildren();
  if (!view) return;
  const vm = boardViewModel(view, state.beliefs);
  board.style.gridTemplateColumns = `repeat(${vm.cols}, 92px)`;
  for (const cell of vm.cells) {
    const button = el('button', `cell shape-${cell.shape} color-${cell.color}`);
    if (cell.frame) button.classList.add(`frame-${cell.frame}`);
    button.disabled = !cell.clickable;
    const shape = el('div', 'glyph');
    shape.append(el('span', 'symbol', cell.symbol));
    if (cell.partnerSymbol) shape.append(el('span', 'partner-symbol', cell.partnerSymbol));
    button.append(shape);
    if (cell.heat !== null) {
      const overlay = el('div', 'heat');
      overlay.style.background = heatColor(cell.heat);
      overlay.title = cell.heat.toFixed(3);
      button.append(overlay);
    }
    button.addEventListener('click', () => void sendClick(cell.row, cell.col));
    board.append(button);
  }
}

function renderComposer(): void {
  const view = state.view;
  const chipsBox = byId<HTMLDivElement>('chips');
  const picked = byId<HTMLDivElement>('picked');
  const hint = byId<HTMLDivElement>('hint');
  const send = byId<HTMLButtonElement>('send');
  chipsBox.replaceChildren();
  picked.replaceChildren();
  hint.textContent = state.composer.hint ?? '';

  const rawBox = byId<HTMLDivElement>('raw-box');
  rawBox.classList.toggle('hidden', !rawMode);

  if (!view) {
    send.disabled = true;
    return;
  }
  for (const word of ALL_WORDS) {
    const chip = el('button', 'chip', word);
    chip.disabled = !chipEnabled(view, state.composer, word);
    chip.addEventListener('click', () => {
      state.composer = addChip(view, state.composer, word);
      render();
    });
    chipsBox.append(chip);
  }
  state.composer.chips.forEach((word, i) => {
    const chip = el('button', 'chip picked-chip', `${word} ✕`);
    chip.addEventListener('click', () => {
      state.composer = removeChip(state.composer, i);
      render();
    });
    picked.append(chip);
  });
  send.disabled = !humanTurn(view) || !canSubmit(state.composer);
}

function renderScoreboard(): void {
  const view = state.view;
  const sb = byId<HTMLDivElement>('scoreboard');
  if (!view) {
    sb.textContent = '';
    return;
  }
  const { correct_clicks, wrong_clicks, words_sent } = view.scoreboard;
  sb.textContent =
    `correct clicks ${correct_clicks} · wrong clicks ${wrong_clicks} · words ${words_sent}`;
}

function renderTranscript(): void {
  const view = state.view;
  const log = byId<HTMLUListElement>('transcript');
  log.replaceChildren();
  if (!view) return;
  for (const line of transcriptLines(view)) {
    log.append(el('li', `turn ${line.who}`, `t${line.t} ${line.who}: ${line.text}`));
  }
}

// ----------------------------------------------------------------- setup --

export function main(): void {
  byId<HTMLButtonElement>('start').addEventListener('click', () => void startGame());
  byId<HTMLButtonElement>('send').addEventListener('click', () => {
    if (state.composer.chips.length) void sendWords(state.composer.chips);
  });
  const rawInput = byId<HTMLInputElement>('raw-input');
  byId<HTMLButtonElement>('raw-send').addEventListener('click', () => {
    const words = canonicalizeRaw(rawInput.value);
    if (!words) {
      state.banner = { kind: 'error', text: 'no known words in that text' };
      render();
      return;
    }
    rawInput.value = '';
    void sendWords(words);
  });
  render();
}

main();
