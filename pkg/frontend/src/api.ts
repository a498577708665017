/**
 * Thin typed client over the central HTTP API. All state lives on the
 * server; every method is a plain request with status-code mapping.
 */

import type {
  AlarmDetail,
  AlarmListResponse,
  AlarmStatus,
  Decision,
  MetricsView,
  ModelView,
  NodesView,
  RetrainResponse,
  VerdictResponse,
} from './types.js';

export class HttpError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = 'HttpError';
  }
}

export type FetchFn = typeof fetch;

export class CentralClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchFn;

  constructor(baseUrl: string, fetchFn: FetchFn = fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // keep the status text
      }
      throw new HttpError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  fetchAlarms(status?: AlarmStatus): Promise<AlarmListResponse> {
    const query = status ? `?status=${encodeURIComponent(status)}` : '';
    return this.request<AlarmListResponse>(`/alarms${query}`);
  }

  fetchAlarm(alarmId: string): Promise<AlarmDetail> {
    return this.request<AlarmDetail>(`/alarms/${encodeURIComponent(alarmId)}`);
  }

  submitVerdict(alarmId: string, decision: Decision): Promise<VerdictResponse> {
    return this.request<VerdictResponse>(
      `/alarms/${encodeURIComponent(alarmId)}/verdict`,
      {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ decision }),
      },
    );
  }

  triggerRetrain(force = false): Promise<RetrainResponse> {
    return this.request<RetrainResponse>('/retrain', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ force }),
    });
  }

  fetchMetrics(): Promise<MetricsView> {
    return this.request<MetricsView>('/metrics');
  }

  fetchModel(): Promise<ModelView> {
    return this.request<ModelView>('/model');
  }

  fetchNodes(): Promise<NodesView> {
    return this.request<NodesView>('/nodes');
  }
}
