/** Chat view: questions, insights, answers and error bubbles, append-only. */

import { clear, el } from './dom';
import type { ScoredInsightPayload } from './types';
import type { UiState } from './state';

export interface ChatHandlers {
  onQuestion: (index: number) => void;
  onAdopt: (insightId: string) => void;
  onAsk: (text: string) => void;
}

export class ChatView {
  readonly root: HTMLElement;
  private log: HTMLElement;
  private input: HTMLInputElement;

  constructor(private state: UiState, private handlers: ChatHandlers) {
    this.log = el('div', { class: 'chat-log' });
    this.input = el('input', {
      class: 'chat-input',
      placeholder: 'Ask a follow-up question...',
    });
    const send = el('button', {
      class: 'chat-send',
      click: () => {
        const text = this.input.value.trim();
        if (!text) return;
        this.input.value = '';
        this.handlers.onAsk(text);
      },
    }, 'Ask');
    this.root = el('section', { class: 'chat-view' }, this.log,
                   el('div', { class: 'chat-controls' }, this.input, send));
    state.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    clear(this.log);
    for (const entry of this.state.chatLog) {
      const bubble = el('div', {
        class: `chat-bubble ${entry.role} kind-${entry.kind}`,
        'data-kind': entry.kind,
      }, el('span', { class: 'chat-text' }, entry.text));
      if (entry.kind === 'question' && typeof entry.payload === 'number') {
        const index = entry.payload;
        bubble.append(el('button', {
          class: 'question-pick',
          'data-question': String(index),
          click: () => this.handlers.onQuestion(index),
        }, 'Answer'));
      }
      if (entry.kind === 'insight' && entry.payload) {
        const scored = entry.payload as ScoredInsightPayload;
        bubble.append(el('span', { class: 'insight-score' },
                         ` score ${scored.combined.toFixed(3)}`));
        bubble.append(el('button', {
          class: 'insight-adopt',
          'data-insight': scored.insightId,
          click: () => this.handlers.onAdopt(scored.insightId),
        }, 'Adopt'));
      }
      this.log.append(bubble);
    }
  }
}
