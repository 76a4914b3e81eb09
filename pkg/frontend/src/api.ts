// Thin typed client for the play service. Service errors carry a rule name
// in the body; ApiError keeps it so the UI can show rejections verbatim.

import type {
  BeliefsPayload,
  ClickJson,
  CreateSessionBody,
  ErrorBody,
  SessionReply,
  SessionView,
} from './types.js';

// what the actions endpoint accepts: clicks, word lists, or raw text
export type ActionBody =
  | ClickJson
  | { type: 'message'; words: string[] }
  | { type: 'message'; raw: string };

export class ApiError extends Error {
  status: number;
  rule: string;

  constructor(status: number, rule: string, message: string) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
    this.rule = rule;
  }
}

async function toError(res: Response): Promise<ApiError> {
  let rule = 'http_error';
  let message = `request failed with status ${res.status}`;
  try {
    const body = (await res.json()) as ErrorBody;
    if (body && body.error) {
      rule = body.error.rule;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(res.status, rule, message);
}

export class Api {
  baseUrl: string;
  private fetchImpl: typeof fetch;

  constructor(baseUrl: string, fetchImpl: typeof fetch = fetch) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!res.ok) throw await toError(res);
    return (await res.json()) as T;
  }

  createSession(body: CreateSessionBody): Promise<SessionReply> {
    return this.request<SessionReply>('/sessions', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  async getSession(id: string): Promise<SessionView> {
    const reply = await this.request<{ session: SessionView }>(`/sessions/${id}`);
    return reply.session;
  }

  postAction(id: string, action: ActionBody): Promise<SessionReply> {
    return this.request<SessionReply>(`/sessions/${id}/actions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(action),
    });
  }

  getBeliefs(id: string): Promise<BeliefsPayload> {
    return this.request<BeliefsPayload>(`/sessions/${id}/beliefs`);
  }
}
