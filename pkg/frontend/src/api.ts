/** Thin typed client over the HTTP API; no analytics happen client-side. */

import type {
  AnswerResponse,
  ReportResponse,
  SelectionResponse,
  SeriesPayload,
  SpecDocument,
  StreamResponse,
  Triple,
} from './types';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = 'error';
      let message = `HTTP ${response.status}`;
      try {
        const parsed = await response.json();
        code = parsed?.error?.code ?? code;
        message = parsed?.error?.message ?? message;
      } catch {
        // keep the generic message: error bodies are JSON but never trusted
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  registerSpec(spec: SpecDocument): Promise<{ specId: string; viewCount: number }> {
    return this.request('POST', '/specs', spec);
  }

  tutorial(specId: string): Promise<{ steps: { title: string; description: string }[] }> {
    return this.request('GET', `/specs/${encodeURIComponent(specId)}/tutorial`);
  }

  registerDataset(name: string, csv: string): Promise<{ datasetId: string }> {
    return this.request('POST', '/datasets', { name, csv });
  }

  createSession(specId: string, datasetId: string, task?: string):
      Promise<{ sessionId: string; task: string; taskProposed: boolean }> {
    return this.request('POST', '/sessions', { specId, datasetId, task });
  }

  postSelection(sessionId: string, triples: Triple[]): Promise<SelectionResponse> {
    return this.request('POST', `/sessions/${sessionId}/selections`, { triples });
  }

  answerQuestion(sessionId: string, index: number): Promise<AnswerResponse> {
    return this.request('POST', `/sessions/${sessionId}/questions/${index}/answer`);
  }

  ask(sessionId: string, text: string): Promise<{ answer: string; highlights: Triple[] }> {
    return this.request('POST', `/sessions/${sessionId}/ask`, { text });
  }

  adopt(sessionId: string, insightId: string): Promise<{ step: unknown; round: number }> {
    return this.request('POST', `/sessions/${sessionId}/adopt`, { insightId });
  }

  endRound(sessionId: string): Promise<{ round: number; steps: number }> {
    return this.request('POST', `/sessions/${sessionId}/rounds/end`);
  }

  stream(sessionId: string): Promise<StreamResponse> {
    return this.request('GET', `/sessions/${sessionId}/stream`);
  }

  roundReport(sessionId: string, round: number): Promise<ReportResponse> {
    return this.request('POST', `/sessions/${sessionId}/rounds/${round}/report`);
  }

  viewData(sessionId: string, viewName: string):
      Promise<{ viewName: string; series: SeriesPayload | null }> {
    return this.request(
      'GET', `/sessions/${sessionId}/views/${encodeURIComponent(viewName)}/data`);
  }

  reportUrl(name: string): string {
    return `${this.baseUrl}/reports/${name}.tex`;
  }
}
