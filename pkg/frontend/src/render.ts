/**
 * HTML renderers for every view.  Each function maps a UiState slice to a
 * markup string; app.ts swaps the result into the page and wires events by
 * data-action delegation, so nothing here touches the DOM.
 */

import type { DialogState, FieldError, RuleJson, UiState } from './types.js';
import { canAnswer } from './state.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

function escapeAttr(text: string): string {
  return escapeHtml(text);
}

// ------------------------------------------------------------------
// chrome
// ------------------------------------------------------------------

function renderNav(state: UiState): string {
  const tab = (view: string, label: string) => {
    const active = state.view === view ? ' class="active"' : '';
    return `<button data-action="nav" data-view="${view}"${active}>${label}</button>`;
  };
  const items = [tab('search', 'Search'), tab('dialog', 'Dialog')];
  if (state.auth) {
    items.push(tab('editor', 'Add rule'));
    items.push(
      `<span class="whoami">${escapeHtml(state.auth.name)}</span>`,
      '<button data-action="logout">Log out</button>',
    );
  } else {
    items.push(tab('login', 'Log in'), tab('register', 'Register'));
  }
  return `<nav>${items.join('\n')}</nav>`;
}

function renderBanner(state: UiState): string {
  if (!state.banner) return '';
  return `<div class="banner" role="alert">${escapeHtml(state.banner)}</div>`;
}

// ------------------------------------------------------------------
// auth forms
// ------------------------------------------------------------------

function renderLogin(): string {
  return `
  <form data-action="login" class="card">
    <h2>Log in</h2>
    <label>Email <input name="email" type="email" required></label>
    <label>Password <input name="password" type="password" required></label>
    <button type="submit">Log in</button>
  </form>`;
}

function renderRegister(): string {
  return `
  <form data-action="register" class="card">
    <h2>Register</h2>
    <label>Name <input name="name" required></label>
    <label>Email <input name="email" type="email" required></label>
    <label>Password <input name="password" type="password" minlength="8" required></label>
    <button type="submit">Create account</button>
  </form>`;
}

// ------------------------------------------------------------------
// search
// ------------------------------------------------------------------

function renderResult(rule: RuleJson, authed: boolean): string {
  const voting = authed
    ? `<button data-action="vote" data-rule="${rule.rule_id}" data-value="1" title="vote up">▲</button>
       <button data-action="vote" data-rule="${rule.rule_id}" data-value="-1" title="vote down">▼</button>`
    : '';
  return `
  <li class="rule" data-rule="${rule.rule_id}">
    <span class="rule-text">IF ${escapeHtml(rule.if)} THEN ${escapeHtml(rule.then)}</span>
    <span class="rule-meta">#${rule.rule_id} by ${escapeHtml(rule.author_name)}
      (authority ${rule.authority}) score ${rule.score}</span>
    ${voting}
  </li>`;
}

function renderSearch(state: UiState): string {
  const results = state.results.length
    ? `<ul class="results">${state.results.map((r) => renderResult(r, state.auth !== null)).join('')}</ul>`
    : '<p class="empty">No rules matched.</p>';
  return `
  <form data-action="search" class="card">
    <h2>Search rules</h2>
    <input name="q" value="${escapeAttr(state.query)}" placeholder="tokens to look for">
    <button type="submit">Search</button>
  </form>
  ${results}`;
}

// ------------------------------------------------------------------
// rule editor
// ------------------------------------------------------------------

function renderFieldError(text: string, error: FieldError): string {
  const caret = `${' '.repeat(error.position)}^ ${error.message}`;
  return `<pre class="parse-error">${escapeHtml(text)}\n${escapeHtml(caret)}</pre>`;
}

function renderEditor(state: UiState): string {
  const draft = state.draft;
  const ifError = draft.error && draft.error.part === 'if'
    ? renderFieldError(draft.ifText, draft.error) : '';
  const thenError = draft.error && draft.error.part === 'then'
    ? renderFieldError(draft.thenText, draft.error) : '';
  const toast = draft.createdId !== null
    ? `<p class="toast">Rule #${draft.createdId} saved.</p>` : '';
  return `
  <form data-action="submit-rule" class="card">
    <h2>Add rule</h2>
    <label>IF <input name="if" value="${escapeAttr(draft.ifText)}" placeholder="condition, e.g. fly AND feathers"></label>
    ${ifError}
    <label>THEN <input name="then" value="${escapeAttr(draft.thenText)}" placeholder="conclusion, e.g. bird"></label>
    ${thenError}
    <button type="submit">Save rule</button>
    ${toast}
  </form>`;
}

// ------------------------------------------------------------------
// dialog
// ------------------------------------------------------------------

function renderTranscript(dialog: DialogState): string {
  const lines: string[] = [];
  for (const entry of dialog.history) {
    lines.push(`<p class="line system">System:&gt; ${escapeHtml(entry.prompt)}</p>`);
    lines.push(`<p class="line user">User:&gt; ${entry.answer === 'yes' ? 'Yes' : 'No'}</p>`);
  }
  if (dialog.terminal === null && dialog.prompt) {
    lines.push(`<p class="line system current">System:&gt; ${escapeHtml(dialog.prompt)}</p>`);
  }
  if (dialog.terminal) {
    const text = dialog.terminal.kind === 'result'
      ? `The result is ${escapeHtml(dialog.terminal.text)}`
      : 'No conclusion could be confirmed.';
    lines.push(`<p class="line terminal">System:&gt; ${text}</p>`);
  }
  return `<div class="transcript">${lines.join('\n')}</div>`;
}

function renderDialogPanel(state: UiState, dialog: DialogState): string {
  const enabled = canAnswer(state);
  const disabled = enabled ? '' : ' disabled';
  const accepted = dialog.accepted.length
    ? `<ul class="accepted">${dialog.accepted
        .map((a) => `<li>accepted: ${escapeHtml(a.text)} (rule #${a.rule})</li>`)
        .join('')}</ul>`
    : '';
  return `
  <div class="card dialog">
    ${renderTranscript(dialog)}
    ${accepted}
    <div class="answers">
      <button data-action="answer" data-answer="yes"${disabled}>Yes</button>
      <button data-action="answer" data-answer="no"${disabled}>No</button>
      <button data-action="dialog-reset">New question</button>
    </div>
  </div>`;
}

function renderDialogStart(state: UiState): string {
  const chainChecked = state.chain ? ' checked' : '';
  return `
  <form data-action="dialog-start" class="card">
    <h2>Ask a question</h2>
    <input name="query" value="${escapeAttr(state.dialogQuery)}" placeholder="what you observe, e.g. fly">
    <button type="submit">Ask</button>
    <details class="advanced">
      <summary>Advanced</summary>
      <label><input type="checkbox" name="chain"${chainChecked}> Chain accepted conclusions</label>
      <label>Max depth <input type="number" name="max_depth" min="1" value="${state.maxDepth}"></label>
    </details>
  </form>`;
}

function renderDialog(state: UiState): string {
  if (!state.dialog) return renderDialogStart(state);
  return renderDialogPanel(state, state.dialog);
}

// ------------------------------------------------------------------

export function renderApp(state: UiState): string {
  let body: string;
  switch (state.view) {
    case 'login':
      body = renderLogin();
      break;
    case 'register':
      body = renderRegister();
      break;
    case 'editor':
      body = state.auth ? renderEditor(state) : renderLogin();
      break;
    case 'dialog':
      body = renderDialog(state);
      break;
    default:
      body = renderSearch(state);
  }
  return `${renderNav(state)}\n${renderBanner(state)}\n<main>${body}</main>`;
}
