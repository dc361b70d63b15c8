/** In-memory stand-in for the HTTP API, mirroring its wire contract
 * (status codes, error bodies, payload shapes) for component tests. */

import type {
  ScoredInsightPayload,
  SpecDocument,
  StepPayload,
  Triple,
} from '../src/types';

const SPEC: SpecDocument = {
  systemInfo: { name: 'Mini Dashboard', viewCount: 3 },
  viewsInfo: [
    {
      viewName: 'Sales|By Segment',
      layers: [{
        mark: 'bar',
        encoding: {
          y: { field: 'Segment', fieldType: 'nominal' },
          x: { field: 'Sales', fieldType: 'quantitative' },
        },
      }],
    },
    {
      viewName: 'Sales Trend',
      layers: [{
        mark: 'line',
        encoding: {
          x: { field: 'Month', fieldType: 'temporal' },
          y: { field: 'Sales', fieldType: 'quantitative' },
        },
      }],
    },
    {
      viewName: 'Profit Trend',
      layers: [{
        mark: 'line',
        encoding: {
          x: { field: 'Month', fieldType: 'temporal' },
          y: { field: 'Profit', fieldType: 'quantitative' },
        },
      }],
    },
  ],
  coordinations: [
    { sourceViewName: 'Sales|By Segment', targetViewName: 'Sales Trend',
      coordinationType: 'filter' },
    { sourceViewName: 'Sales|By Segment', targetViewName: 'Profit Trend',
      coordinationType: 'filter' },
  ],
};

function scoredInsight(id: string): ScoredInsightPayload {
  return {
    insightId: id,
    insight: {
      type: 'change_point',
      parameters: { index: 2, key: '2022-03' },
      significance: 0.999,
      description: 'Sales rises at 2022-03.',
      views: ['Sales Trend'],
    },
    impact: 0.4,
    relevance: 0.25,
    combined: 0.6545,
    annotation: [{ viewName: 'Sales Trend', dimName: 'Month', value: ['2022-03'] }],
    explanation: 'The level of Sales shifts at 2022-03.',
    scoringSource: 'mock',
  };
}

const TEX = [
  '\\documentclass{beamer}',
  '\\begin{document}',
  '\\begin{frame}',
  '\\titlepage',
  '\\end{frame}',
  '\\begin{frame}{Step 1: Change Point on Sales Trend}',
  '\\begin{itemize}',
  '    \\item Sales rises at 2022-03.',
  '\\end{itemize}',
  '\\includegraphics[width=0.8\\textwidth]{"snapshots/1_1_Sales Trend.png"}',
  '\\end{frame}',
  '\\begin{frame}{Step 2: Trend on Sales Trend}',
  '\\begin{itemize}',
  '    \\item Sales shows an increasing trend over Month.',
  '\\end{itemize}',
  '\\includegraphics[width=0.8\\textwidth]{"snapshots/1_2_Sales Trend.png"}',
  '\\end{frame}',
  '\\begin{frame}{Conclusion}',
  '\\begin{itemize}',
  '    \\item Two findings.',
  '\\end{itemize}',
  '\\end{frame}',
  '\\end{document}',
].join('\n');

export class FakeBackend {
  spec = SPEC;
  steps: StepPayload[] = [];
  roundOpen = true;
  adopted = new Set<string>();
  answered = new Map<string, ScoredInsightPayload>();
  private counter = 0;

  get specDocument(): SpecDocument {
    return this.spec;
  }

  readonly fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, 'http://test');
    const path = decodeURIComponent(url.pathname);
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    return this.route(init?.method ?? 'GET', path, body);
  };

  private json(status: number, payload: unknown): Response {
    return new Response(JSON.stringify(payload), {
      status,
      headers: { 'Content-Type': 'application/json' },
    });
  }

  private error(status: number, code: string, message: string): Response {
    return this.json(status, { error: { code, message } });
  }

  private route(method: string, path: string, body: any): Response {
    if (method === 'POST' && path === '/specs') {
      return this.json(201, { specId: 'spec-1', viewCount: 3 });
    }
    if (method === 'GET' && path === '/specs/spec-1/tutorial') {
      const steps = [{ title: 'Mini Dashboard', description: '<b>overview</b>' }]
        .concat(this.spec.viewsInfo.map((v) => ({
          title: v.viewName, description: '<b>view</b>',
        })));
      return this.json(200, { steps });
    }
    if (method === 'POST' && path === '/datasets') {
      return this.json(201, { datasetId: 'data-1', rowCount: 12, schema: {} });
    }
    if (method === 'POST' && path === '/sessions') {
      return this.json(201, { sessionId: 'sess-1', task: body?.task ?? 'proposed',
                              taskProposed: !body?.task });
    }
    if (method === 'POST' && path === '/sessions/sess-1/selections') {
      const triples: Triple[] = body?.triples ?? [];
      for (const t of triples) {
        if (!this.spec.viewsInfo.some((v) => v.viewName === t.viewName)) {
          return this.error(422, 'unknown_view',
                            `selection references unknown view '${t.viewName}'`);
        }
      }
      return this.json(200, {
        questions: [
          'Is there a significant change point in Sales over Month?',
          'What is the trend of Sales over Month?',
        ],
        plans: [
          { functionName: 'change_point', viewName: 'Sales Trend',
            variableName: 'Sales', dimName: 'Month', relevance: 0.5 },
          { functionName: 'trend', viewName: 'Sales Trend',
            variableName: 'Sales', dimName: 'Month', relevance: 0.5 },
        ],
        notes: [],
      });
    }
    const answer = path.match(/^\/sessions\/sess-1\/questions\/(\d+)\/answer$/);
    if (method === 'POST' && answer) {
      if (Number(answer[1]) > 1) {
        return this.error(404, 'unknown_question', 'no proposed question');
      }
      this.counter += 1;
      const scored = scoredInsight(`i${this.counter}`);
      this.answered.set(scored.insightId, scored);
      return this.json(200, { insights: [scored], warnings: [] });
    }
    if (method === 'POST' && path === '/sessions/sess-1/adopt') {
      const id = body?.insightId;
      if (!this.answered.has(id)) {
        return this.error(404, 'unknown_insight', `no insight '${id}'`);
      }
      if (this.adopted.has(id)) {
        return this.error(409, 'already_adopted',
                          `insight '${id}' is already recorded`);
      }
      this.adopted.add(id);
      const step: StepPayload = {
        stepIndex: this.steps.length + 1,
        focusedView: 'Sales Trend',
        insights: [this.answered.get(id)],
        interaction: null,
        snapshotRef: `1_${this.steps.length + 1}_Sales Trend`,
      };
      this.steps.push(step);
      return this.json(201, { step, round: 1 });
    }
    if (method === 'POST' && path === '/sessions/sess-1/rounds/end') {
      if (!this.roundOpen) {
        return this.error(409, 'no_open_round', 'no analysis round is open');
      }
      this.roundOpen = false;
      return this.json(200, { round: 1, steps: this.steps.length });
    }
    if (method === 'GET' && path === '/sessions/sess-1/stream') {
      return this.json(200, {
        sessionId: 'sess-1', task: 'analyze sales',
        rounds: [{ index: 1, open: this.roundOpen, steps: this.steps }],
      });
    }
    if (method === 'POST' && path === '/sessions/sess-1/rounds/1/report') {
      if (this.roundOpen) {
        return this.error(409, 'round_open', 'round 1 is still open');
      }
      return this.json(200, { name: 'sess-1_1', frames: this.steps.length + 2,
                              findings: [], tex: TEX, notes: [] });
    }
    if (method === 'POST' && path === '/sessions/sess-1/ask') {
      if (!body?.text?.trim()) {
        return this.error(422, 'empty_question', 'ask body needs text');
      }
      return this.json(200, {
        answer: 'The strongest current finding is the change point at 2022-03.',
        highlights: [{ viewName: 'Sales Trend', dimName: 'Month',
                       value: ['2022-03'] }],
      });
    }
    const data = path.match(/^\/sessions\/sess-1\/views\/(.+)\/data$/);
    if (method === 'GET' && data) {
      const viewName = data[1];
      const view = this.spec.viewsInfo.find((v) => v.viewName === viewName);
      if (!view) return this.error(422, 'unknown_view', `no view '${viewName}'`);
      if (viewName === 'Sales|By Segment') {
        return this.json(200, { viewName, series: {
          measure: 'Sales', dimension: 'Segment',
          keys: ['Consumer', 'Corporate', 'Home Office'],
          values: [120, 80, 40], kind: 'bar' } });
      }
      return this.json(200, { viewName, series: {
        measure: viewName === 'Profit Trend' ? 'Profit' : 'Sales',
        dimension: 'Month',
        keys: ['2022-01', '2022-02', '2022-03', '2022-04'],
        values: [10, 11, 30, 31], kind: 'line' } });
    }
    return this.error(404, 'not_found', `no route ${method} ${path}`);
  }
}
