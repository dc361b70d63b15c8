/** Wire types mirrored from the HTTP API. */

export interface Triple {
  viewName: string;
  dimName: string;
  value: unknown[];
}

export interface FieldRef {
  field: string;
  fieldType: 'quantitative' | 'temporal' | 'nominal' | 'ordinal';
  [key: string]: unknown;
}

export interface ViewInfo {
  viewName: string;
  layers: { mark: string; encoding: Record<string, FieldRef> }[];
  tooltip?: unknown[];
}

export interface SpecDocument {
  systemInfo: { name: string; viewCount: number };
  viewsInfo: ViewInfo[];
  coordinations: {
    sourceViewName: string;
    targetViewName: string;
    coordinationType: string;
  }[];
}

export interface PlanPayload {
  functionName: string;
  viewName: string | string[];
  variableName: string | string[];
  dimName: string;
  relevance: number;
}

export interface InsightPayload {
  type: string;
  parameters: Record<string, unknown>;
  significance: number;
  description: string;
  views: string[];
}

export interface ScoredInsightPayload {
  insightId: string;
  insight: InsightPayload;
  impact: number;
  relevance: number;
  combined: number;
  annotation: Triple[];
  explanation: string | null;
  scoringSource: 'provider' | 'mock';
}

export interface SelectionResponse {
  questions: string[];
  plans: PlanPayload[];
  notes: string[];
  insights?: ScoredInsightPayload[];
}

export interface AnswerResponse {
  insights: ScoredInsightPayload[];
  warnings: string[];
}

export interface StepPayload {
  stepIndex: number;
  focusedView: string;
  insights: unknown[];
  interaction: unknown | null;
  snapshotRef: string;
}

export interface StreamResponse {
  sessionId: string;
  task: string;
  rounds: { index: number; open: boolean; steps: StepPayload[] }[];
}

export interface ReportResponse {
  name: string;
  frames: number;
  findings: { line: number; message: string }[];
  tex: string;
  notes: string[];
}

export interface SeriesPayload {
  measure: string;
  dimension: string | null;
  keys: unknown[] | null;
  values: number[];
  kind: 'bar' | 'line';
}

export interface ApiErrorBody {
  error: { code: string; message: string; detail?: unknown };
}

export type ChatKind = 'question' | 'insight' | 'error' | 'answer' | 'info';

export interface ChatEntry {
  role: 'user' | 'assistant' | 'system';
  kind: ChatKind;
  text: string;
  /** Optional machine payload the renderer can attach buttons to. */
  payload?: unknown;
}

export interface Annotation extends Triple {
  score: number;
}
