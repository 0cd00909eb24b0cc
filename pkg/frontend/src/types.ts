// Payload shapes for the rule server's JSON API, plus the client state tree.

export interface RuleJson {
  rule_id: number;
  if: string;
  then: string;
  score: number;
  author_name: string;
  authority: number;
}

export type Outcome =
  | { type: 'propose'; rule: number; conclusion: string; prompt: string }
  | { type: 'result'; text: string }
  | { type: 'no_result' };

export interface AcceptedEntry {
  rule: number;
  text: string;
}

export interface DialogResponse {
  session?: string;
  outcome: Outcome;
  accepted: AcceptedEntry[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: { part: string; kind: string; position: number };
}

export type View = 'login' | 'register' | 'search' | 'editor' | 'dialog';

export type Answer = 'yes' | 'no';

export interface HistoryEntry {
  prompt: string;
  answer: Answer;
}

export type Terminal = { kind: 'result'; text: string } | { kind: 'no_result' };

export interface DialogState {
  sessionId: string;
  prompt: string;
  history: HistoryEntry[];
  terminal: Terminal | null;
  accepted: AcceptedEntry[];
  // answer currently on the wire; locks the Yes/No buttons until it settles
  pending: Answer | null;
}

export interface Auth {
  token: string;
  name: string;
  email: string;
}

export interface FieldError {
  part: 'if' | 'then';
  position: number;
  message: string;
}

export interface RuleDraft {
  ifText: string;
  thenText: string;
  error: FieldError | null;
  createdId: number | null;
}

export interface UiState {
  auth: Auth | null;
  view: View;
  dialog: DialogState | null;
  draft: RuleDraft;
  query: string;
  results: RuleJson[];
  dialogQuery: string;
  chain: boolean;
  maxDepth: number;
  banner: string | null;
}
