import { ApiFailure } from './api.js';
import type { ApiClient } from './api.js';
import {
  applyOutcome,
  beginDialog,
  canAnswer,
  markPending,
  releasePending,
} from './state.js';
import type { Store } from './state.js';
import type { Answer } from './types.js';

function messageOf(err: unknown): string {
  if (err instanceof ApiFailure) return err.message;
  if (err instanceof Error) return err.message;
  return 'request failed';
}

export async function register(
  store: Store,
  api: ApiClient,
  name: string,
  email: string,
  password: string,
): Promise<void> {
  try {
    await api.register(name, email, password);
    const session = await api.login(email, password);
    store.set({ auth: { token: session.token, name, email }, view: 'search', banner: null });
  } catch (err) {
    store.set({ banner: messageOf(err) });
  }
}

export async function login(store: Store, api: ApiClient, email: string, password: string): Promise<void> {
  try {
    const session = await api.login(email, password);
    // login returns no profile, so the email doubles as the display name
    store.set({ auth: { token: session.token, name: email, email }, view: 'search', banner: null });
  } catch (err) {
    store.set({ banner: messageOf(err) });
  }
}

export function logout(store: Store): void {
  store.set({ auth: null, view: 'search' });
}

export async function submitRule(store: Store, api: ApiClient): Promise<void> {
  const state = store.get();
  if (!state.auth) {
    store.set({ view: 'login' });
    return;
  }
  try {
    const created = await api.addRule(state.auth.token, state.draft.ifText, state.draft.thenText);
    store.set({
      draft: { ifText: '', thenText: '', error: null, createdId: created.rule_id },
      banner: null,
    });
  } catch (err) {
    if (err instanceof ApiFailure && err.status === 401) {
      // session expired: back to the login form, draft untouched
      store.set({ auth: null, view: 'login' });
      return;
    }
    if (err instanceof ApiFailure && err.status === 422 && err.body && err.body.detail) {
      const detail = err.body.detail;
      store.set({
        draft: {
          ...store.get().draft,
          createdId: null,
          error: {
            part: detail.part === 'then' ? 'then' : 'if',
            position: detail.position,
            message: err.body.message,
          },
        },
      });
      return;
    }
    store.set({ banner: messageOf(err) });
  }
}

export async function runSearch(store: Store, api: ApiClient, query: string): Promise<void> {
  store.set({ query });
  try {
    const found = await api.search(query);
    store.set({ results: found.rules, banner: null });
  } catch (err) {
    store.set({ banner: messageOf(err) });
  }
}

export async function castVote(store: Store, api: ApiClient, ruleId: number, value: 1 | -1): Promise<void> {
  const state = store.get();
  if (!state.auth) {
    store.set({ view: 'login' });
    return;
  }
  try {
    await api.vote(state.auth.token, ruleId, value);
    // refresh so the new score and authority show up
    const found = await api.search(state.query);
    store.set({ results: found.rules, banner: null });
  } catch (err) {
    store.set({ banner: messageOf(err) });
  }
}

export async function startDialog(store: Store, api: ApiClient, query: string): Promise<void> {
  const state = store.get();
  store.set({ dialogQuery: query });
  try {
    const response = await api.dialogStart(query, state.chain, state.maxDepth);
    store.set(beginDialog(store.get(), response));
  } catch (err) {
    store.set({ banner: messageOf(err) });
  }
}

export async function answerDialog(store: Store, api: ApiClient, answer: Answer): Promise<void> {
  const state = store.get();
  if (!canAnswer(state)) return;
  const dialog = state.dialog!;
  store.set(markPending(state, answer));
  let response: unknown;
  try {
    response = await api.dialogAnswer(dialog.sessionId, answer === 'yes');
  } catch (err) {
    store.set({ ...releasePending(store.get()), banner: messageOf(err) });
    return;
  }
  store.set(applyOutcome(store.get(), response));
}

export function resetDialog(store: Store): void {
  store.set({ dialog: null });
}
