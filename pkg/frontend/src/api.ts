/**
 * Typed client for the labelling service JSON API.
 * Errors arrive as {code, message}; ApiError carries both.
 */

export interface CoupletRef {
  modulation: string;
  signal: string;
}

export interface WorkItem {
  frame_id: number;
  snr_db: number;
  constellation: [number, number][];
  spectrogram: string;
  model_label: CoupletRef | null;
  confidence: number | null;
}

export interface WorkPayload {
  session_id: string;
  status: string;
  phase: 'bootstrap' | 'review';
  page_index: number | null;
  items: WorkItem[];
  couplets: string[];
  modulations: string[];
  signals: string[];
}

export interface Progress {
  user_labelled: number;
  model_labelled: number;
  pool_remaining: number;
  total: number;
  buffer_fill: number;
  buffer_capacity: number;
  restarts: number;
  iteration: number;
}

export interface StatusPayload {
  session_id: string;
  status: string;
  progress?: Progress;
}

export interface LabelSubmission {
  frame_id: number;
  modulation: string;
  signal: string;
}

export class ApiError extends Error {
  code: number;
  constructor(code: number, message: string) {
    super(message);
    this.code = code;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const message = typeof body.message === 'string' ? body.message : response.statusText;
    throw new ApiError(response.status, message);
  }
  return body as T;
}

export class SessionClient {
  constructor(readonly base: string = '') {}

  createSession(dataset: string, config: Record<string, unknown> = {}, rngSeed = 0) {
    return request<StatusPayload>(`${this.base}/sessions`, {
      method: 'POST',
      body: JSON.stringify({ dataset, config, rng_seed: rngSeed }),
    });
  }

  getWork(sessionId: string) {
    return request<WorkPayload>(`${this.base}/sessions/${sessionId}/work`);
  }

  getStatus(sessionId: string) {
    return request<StatusPayload>(`${this.base}/sessions/${sessionId}/status`);
  }

  getReport(sessionId: string) {
    return request<Record<string, unknown>>(`${this.base}/sessions/${sessionId}/report`);
  }

  submitLabels(sessionId: string, labels: LabelSubmission[]) {
    return request<StatusPayload>(`${this.base}/sessions/${sessionId}/labels`, {
      method: 'POST',
      body: JSON.stringify({ labels }),
    });
  }
}

export function parseCouplet(text: string): CoupletRef {
  const sep = text.indexOf(':');
  if (sep <= 0 || sep === text.length - 1) {
    throw new Error(`malformed couplet string: ${text}`);
  }
  return { modulation: text.slice(0, sep), signal: text.slice(sep + 1) };
}

export function coupletKey(c: CoupletRef): string {
  return `${c.modulation}:${c.signal}`;
}
