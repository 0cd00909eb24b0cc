import type {
  AcceptedEntry,
  Answer,
  DialogState,
  Outcome,
  UiState,
} from './types.js';

export interface Store {
  get(): UiState;
  set(patch: Partial<UiState>): void;
  subscribe(fn: () => void): void;
}

export function createStore(initial: UiState): Store {
  let value = initial;
  const subs: Array<() => void> = [];
  return {
    get: () => value,
    set: (patch) => {
      value = { ...value, ...patch };
      subs.forEach((fn) => fn());
    },
    subscribe: (fn) => {
      subs.push(fn);
    },
  };
}

export function initialState(): UiState {
  return {
    auth: null,
    view: 'search',
    dialog: null,
    draft: { ifText: '', thenText: '', error: null, createdId: null },
    query: '',
    results: [],
    dialogQuery: '',
    chain: false,
    maxDepth: 5,
    banner: null,
  };
}

// Yes/No are live exactly when a dialog exists, has not terminated, and no
// answer is already on the wire.
export function canAnswer(state: UiState): boolean {
  return state.dialog !== null && state.dialog.terminal === null && state.dialog.pending === null;
}

function asOutcome(value: unknown): Outcome | null {
  if (typeof value !== 'object' || value === null) return null;
  const record = value as Record<string, unknown>;
  if (record.type === 'propose') {
    if (typeof record.prompt !== 'string' || typeof record.conclusion !== 'string') return null;
    if (typeof record.rule !== 'number') return null;
    return { type: 'propose', rule: record.rule, conclusion: record.conclusion, prompt: record.prompt };
  }
  if (record.type === 'result') {
    if (typeof record.text !== 'string') return null;
    return { type: 'result', text: record.text };
  }
  if (record.type === 'no_result') return { type: 'no_result' };
  return null;
}

function asAccepted(value: unknown, fallback: AcceptedEntry[]): AcceptedEntry[] {
  if (!Array.isArray(value)) return fallback;
  const entries: AcceptedEntry[] = [];
  for (const item of value) {
    if (typeof item !== 'object' || item === null) return fallback;
    const record = item as Record<string, unknown>;
    if (typeof record.rule !== 'number' || typeof record.text !== 'string') return fallback;
    entries.push({ rule: record.rule, text: record.text });
  }
  return entries;
}

// Opens the dialog panel from a start response.  A malformed payload leaves
// every field except the banner alone.
export function beginDialog(state: UiState, response: unknown): UiState {
  const record = (typeof response === 'object' && response !== null)
    ? (response as Record<string, unknown>)
    : null;
  const outcome = record ? asOutcome(record.outcome) : null;
  if (!record || typeof record.session !== 'string' || outcome === null || outcome.type === 'result') {
    return { ...state, banner: 'malformed response from server' };
  }
  const dialog: DialogState = {
    sessionId: record.session,
    prompt: outcome.type === 'propose' ? outcome.prompt : '',
    history: [],
    terminal: outcome.type === 'no_result' ? { kind: 'no_result' } : null,
    accepted: asAccepted(record.accepted, []),
    pending: null,
  };
  return { ...state, view: 'dialog', dialog, banner: null };
}

// Folds an answer response into the dialog: the pending answer and the prompt
// it replied to move into the history, then the outcome either installs the
// next prompt or closes the dialog.  Malformed payloads only raise the banner;
// prompt, history and terminal stay exactly as they were.
export function applyOutcome(state: UiState, response: unknown): UiState {
  const dialog = state.dialog;
  if (!dialog) return { ...state, banner: 'no dialog in progress' };
  const record = (typeof response === 'object' && response !== null)
    ? (response as Record<string, unknown>)
    : null;
  const outcome = record ? asOutcome(record.outcome) : null;
  if (outcome === null) {
    return {
      ...state,
      banner: 'malformed response from server',
      dialog: { ...dialog, pending: null },
    };
  }
  const history = dialog.pending === null
    ? dialog.history
    : [...dialog.history, { prompt: dialog.prompt, answer: dialog.pending }];
  const accepted = asAccepted(record ? record.accepted : undefined, dialog.accepted);
  const next: DialogState = {
    ...dialog,
    history,
    accepted,
    pending: null,
  };
  if (outcome.type === 'propose') {
    next.prompt = outcome.prompt;
  } else if (outcome.type === 'result') {
    next.terminal = { kind: 'result', text: outcome.text };
  } else {
    next.terminal = { kind: 'no_result' };
  }
  return { ...state, dialog: next, banner: null };
}

export function markPending(state: UiState, answer: Answer): UiState {
  if (!state.dialog) return state;
  return { ...state, dialog: { ...state.dialog, pending: answer } };
}

export function releasePending(state: UiState): UiState {
  if (!state.dialog) return state;
  return { ...state, dialog: { ...state.dialog, pending: null } };
}
