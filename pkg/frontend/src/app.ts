import { HttpApiClient } from './api.js';
import * as actions from './actions.js';
import { createStore, initialState } from './state.js';
import { renderApp } from './render.js';
import type { View } from './types.js';

const store = createStore(initialState());
const api = new HttpApiClient('');
const root = document.getElementById('app')!;

function sync() {
  root.innerHTML = renderApp(store.get());
}

store.subscribe(sync);
sync();

function field(form: HTMLFormElement, name: string): string {
  const input = form.elements.namedItem(name);
  return input instanceof HTMLInputElement ? input.value : '';
}

root.addEventListener('submit', (ev) => {
  const form = ev.target as HTMLFormElement;
  const action = form.dataset.action;
  if (!action) return;
  ev.preventDefault();
  if (action === 'login') {
    void actions.login(store, api, field(form, 'email'), field(form, 'password'));
  } else if (action === 'register') {
    void actions.register(store, api, field(form, 'name'), field(form, 'email'), field(form, 'password'));
  } else if (action === 'submit-rule') {
    // pull the draft out of the form first so a 401 keeps what was typed
    store.set({
      draft: { ...store.get().draft, ifText: field(form, 'if'), thenText: field(form, 'then') },
    });
    void actions.submitRule(store, api);
  } else if (action === 'search') {
    void actions.runSearch(store, api, field(form, 'q'));
  } else if (action === 'dialog-start') {
    const chainBox = form.elements.namedItem('chain');
    const depth = parseInt(field(form, 'max_depth'), 10);
    store.set({
      chain: chainBox instanceof HTMLInputElement && chainBox.checked,
      maxDepth: Number.isFinite(depth) && depth >= 1 ? depth : 5,
    });
    void actions.startDialog(store, api, field(form, 'query'));
  }
});

root.addEventListener('click', (ev) => {
  const target = (ev.target as HTMLElement).closest('button');
  if (!target) return;
  const action = target.dataset.action;
  if (action === 'nav') {
    const view = target.dataset.view;
    if (view) store.set({ view: view as View });
  } else if (action === 'logout') {
    actions.logout(store);
  } else if (action === 'answer') {
    void actions.answerDialog(store, api, target.dataset.answer === 'yes' ? 'yes' : 'no');
  } else if (action === 'dialog-reset') {
    actions.resetDialog(store);
  } else if (action === 'vote') {
    const ruleId = parseInt(target.dataset.rule ?? '', 10);
    const value = target.dataset.value === '-1' ? -1 : 1;
    if (Number.isFinite(ruleId)) void actions.castVote(store, api, ruleId, value);
  }
});
