import type { ApiErrorBody, DialogResponse, RuleJson } from './types.js';

export class ApiFailure extends Error {
  status: number;
  body: ApiErrorBody | null;

  constructor(status: number, body: ApiErrorBody | null) {
    super(body ? body.message : `request failed with status ${status}`);
    this.status = status;
    this.body = body;
  }
}

export interface ApiClient {
  register(name: string, email: string, password: string): Promise<{ user_id: number }>;
  login(email: string, password: string): Promise<{ token: string; expires_at: string }>;
  addRule(token: string, ifText: string, thenText: string): Promise<{ rule_id: number }>;
  deleteRule(token: string, ruleId: number): Promise<void>;
  vote(token: string, ruleId: number, value: 1 | -1): Promise<void>;
  search(query: string): Promise<{ rules: RuleJson[] }>;
  dialogStart(query: string, chain: boolean, maxDepth: number): Promise<DialogResponse>;
  dialogAnswer(sessionId: string, accept: boolean): Promise<DialogResponse>;
}

export class HttpApiClient implements ApiClient {
  constructor(private base = '') {}

  register(name: string, email: string, password: string) {
    return this.send<{ user_id: number }>('POST', '/api/register', { name, email, password });
  }

  login(email: string, password: string) {
    return this.send<{ token: string; expires_at: string }>('POST', '/api/login', { email, password });
  }

  addRule(token: string, ifText: string, thenText: string) {
    return this.send<{ rule_id: number }>('POST', '/api/rules', { if: ifText, then: thenText }, token);
  }

  async deleteRule(token: string, ruleId: number) {
    await this.send<void>('DELETE', `/api/rules/${ruleId}`, undefined, token);
  }

  async vote(token: string, ruleId: number, value: 1 | -1) {
    await this.send<void>('POST', `/api/rules/${ruleId}/vote`, { value }, token);
  }

  search(query: string) {
    return this.send<{ rules: RuleJson[] }>('GET', `/api/search?q=${encodeURIComponent(query)}`);
  }

  dialogStart(query: string, chain: boolean, maxDepth: number) {
    return this.send<DialogResponse>('POST', '/api/dialog', {
      query,
      chain,
      max_depth: maxDepth,
    });
  }

  dialogAnswer(sessionId: string, accept: boolean) {
    return this.send<DialogResponse>('POST', `/api/dialog/${sessionId}/answer`, { accept });
  }

  private async send<T>(method: string, path: string, body?: unknown, token?: string): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    if (token) headers['Authorization'] = `Bearer ${token}`;
    const response = await fetch(this.base + path, {
      method,
      headers,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!response.ok) {
      let parsed: ApiErrorBody | null = null;
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        parsed = null;
      }
      throw new ApiFailure(response.status, parsed);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }
}
