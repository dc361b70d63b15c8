/** Wires the four panes to the HTTP API. Pure client: every displayed number
 * arrives in an API response, and chat survives view switches because the
 * log lives in UiState, not the DOM. */

import { ApiClient, ApiError } from './api';
import { ChartPanel } from './charts';
import { ChatView } from './chat';
import { clear, el } from './dom';
import { ReportView } from './report';
import { framesFromTex, UiState } from './state';
import { StreamView } from './stream';
import type { Annotation, SpecDocument, Triple } from './types';

export class App {
  readonly state = new UiState();
  readonly root: HTMLElement;
  readonly chat: ChatView;
  readonly stream: StreamView;
  readonly report: ReportView;
  private panels = new Map<string, ChartPanel>();
  private chartsRoot: HTMLElement;
  private pending = false; // at most one in-flight mutation per session

  constructor(private api: ApiClient) {
    this.chartsRoot = el('section', { class: 'system-view' });
    this.chat = new ChatView(this.state, {
      onQuestion: (index) => void this.answerQuestion(index),
      onAdopt: (insightId) => void this.adoptInsight(insightId),
      onAsk: (text) => void this.ask(text),
    });
    this.stream = new StreamView(this.state);
    this.report = new ReportView(this.state, (name) => this.api.reportUrl(name));
    const menu = el('nav', { class: 'menu' },
      el('button', { class: 'menu-stream', click: () => this.state.toggleStream() },
         'Interaction stream'),
      el('button', { class: 'menu-end', click: () => void this.endRoundAndReport() },
         'End round & report'),
      el('button', { class: 'menu-clear',
                     click: () => this.state.clearAnnotations() },
         'Clear annotations'),
    );
    this.root = el('main', { class: 'insightloop-app' },
                   menu, this.chat.root, this.chartsRoot, this.stream.root,
                   this.report.root);
    this.state.subscribe(() => this.refreshAnnotations());
  }

  async start(spec: SpecDocument, datasetCsv: string, task?: string): Promise<void> {
    const { specId } = await this.api.registerSpec(spec);
    const { datasetId } = await this.api.registerDataset(
      spec.systemInfo.name, datasetCsv);
    const session = await this.api.createSession(specId, datasetId, task);
    this.state.sessionId = session.sessionId;
    this.state.spec = spec;
    this.state.appendChat('system', 'info',
                          `Session started. Task: ${session.task}`);
    const tutorial = await this.api.tutorial(specId);
    this.state.appendChat('assistant', 'info',
                          `Tour available: ${tutorial.steps.length} steps.`);
    this.buildPanels(spec);
    await this.refreshAllViews();
  }

  private buildPanels(spec: SpecDocument): void {
    clear(this.chartsRoot);
    this.panels.clear();
    for (const view of spec.viewsInfo) {
      const panel = new ChartPanel(view, {
        onSelect: (viewName, dimName, value) =>
          void this.selectElements(viewName, dimName, [value]),
      });
      this.panels.set(view.viewName, panel);
      this.chartsRoot.append(panel.root);
    }
  }

  private async refreshAllViews(): Promise<void> {
    if (!this.state.sessionId) return;
    for (const [viewName, panel] of this.panels) {
      try {
        const { series } = await this.api.viewData(this.state.sessionId, viewName);
        panel.update(series, this.state.annotations);
      } catch (error) {
        if (!(error instanceof ApiError)) throw error;
        panel.update(null, []);
      }
    }
  }

  private refreshAnnotations(): void {
    for (const panel of this.panels.values()) {
      panel.setAnnotations(this.state.annotations);
    }
  }

  /** Click on a view element: ask the engine what to analyze next. */
  async selectElements(viewName: string, dimName: string,
                       values: unknown[]): Promise<void> {
    if (!this.state.sessionId || this.pending) return;
    this.pending = true;
    const triple: Triple = { viewName, dimName, value: values };
    this.state.appendChat('user', 'info',
                          `Selected ${dimName} = ${values.join(', ')} in ${viewName}`);
    try {
      const response = await this.api.postSelection(this.state.sessionId, [triple]);
      for (const note of response.notes) {
        this.state.appendChat('system', 'error', note);
      }
      response.questions.forEach((question, index) => {
        this.state.appendChat('assistant', 'question', question, index);
      });
      if (response.questions.length === 0) {
        this.state.appendChat('assistant', 'info',
                              'No applicable insight types for this selection.');
      }
      await this.refreshAllViews();
    } catch (error) {
      this.surface(error);
    } finally {
      this.pending = false;
    }
  }

  async answerQuestion(index: number): Promise<void> {
    if (!this.state.sessionId || this.pending) return;
    this.pending = true;
    try {
      const response = await this.api.answerQuestion(this.state.sessionId, index);
      for (const warning of response.warnings) {
        this.state.appendChat('system', 'error', warning);
      }
      const annotations: Annotation[] = [];
      for (const scored of response.insights) {
        this.state.appendChat('assistant', 'insight',
                              scored.explanation ?? scored.insight.description,
                              scored);
        for (const t of scored.annotation) {
          annotations.push({ ...t, score: scored.combined });
        }
      }
      if (annotations.length) {
        this.state.setAnnotations([...this.state.annotations, ...annotations]);
      }
    } catch (error) {
      this.surface(error);
    } finally {
      this.pending = false;
    }
  }

  async adoptInsight(insightId: string): Promise<void> {
    if (!this.state.sessionId || this.pending) return;
    this.pending = true;
    try {
      await this.api.adopt(this.state.sessionId, insightId);
      this.state.appendChat('system', 'info', `Adopted insight ${insightId}.`);
      const stream = await this.api.stream(this.state.sessionId);
      this.state.setStream(stream.rounds);
    } catch (error) {
      this.surface(error);
    } finally {
      this.pending = false;
    }
  }

  async ask(text: string): Promise<void> {
    if (!this.state.sessionId || this.pending) return;
    this.pending = true;
    this.state.appendChat('user', 'info', text);
    try {
      const response = await this.api.ask(this.state.sessionId, text);
      this.state.appendChat('assistant', 'answer', response.answer);
      const highlights = response.highlights.map((h) => ({ ...h, score: 1 }));
      if (highlights.length) {
        this.state.setAnnotations([...this.state.annotations, ...highlights]);
      }
    } catch (error) {
      this.surface(error);
    } finally {
      this.pending = false;
    }
  }

  async endRoundAndReport(): Promise<void> {
    if (!this.state.sessionId || this.pending) return;
    this.pending = true;
    try {
      const summary = await this.api.endRound(this.state.sessionId);
      this.state.appendChat('system', 'info',
                            `Round ${summary.round} closed (${summary.steps} steps).`);
      const stream = await this.api.stream(this.state.sessionId);
      this.state.setStream(stream.rounds);
      await this.showReport(summary.round);
    } catch (error) {
      this.surface(error);
    } finally {
      this.pending = false;
    }
  }

  async showReport(round: number): Promise<void> {
    if (!this.state.sessionId) return;
    try {
      const report = await this.api.roundReport(this.state.sessionId, round);
      this.report.downloadName = report.name;
      this.state.setReportPreview(framesFromTex(report.tex));
      this.state.appendChat('assistant', 'info',
                            `Report ready: ${report.frames} frames.`);
    } catch (error) {
      this.surface(error);
    }
  }

  /** Backend failures become chat error bubbles, per the feedback mechanism. */
  private surface(error: unknown): void {
    if (error instanceof ApiError) {
      this.state.appendChat('system', 'error', `${error.code}: ${error.message}`);
      return;
    }
    throw error;
  }
}
