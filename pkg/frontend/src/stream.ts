/** Interaction stream: one left-to-right node chain per round, hover details. */

import { clear, el } from './dom';
import type { UiState } from './state';

export class StreamView {
  readonly root: HTMLElement;

  constructor(private state: UiState) {
    this.root = el('section', { class: 'stream-view', hidden: 'hidden' });
    state.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    clear(this.root);
    if (this.state.streamVisible) {
      this.root.removeAttribute('hidden');
    } else {
      this.root.setAttribute('hidden', 'hidden');
    }
    for (const round of this.state.streamRounds) {
      const chain = el('div', {
        class: `stream-round${round.open ? ' open' : ' closed'}`,
        'data-round': String(round.index),
      }, el('span', { class: 'stream-label' }, `Round ${round.index}`));
      for (const step of round.steps) {
        const detail = step.interaction
          ? 'self-motivated interaction'
          : `${step.insights.length} insight(s)`;
        chain.append(el('span', {
          class: 'stream-node',
          'data-step': String(step.stepIndex),
          title: `${step.focusedView}: ${detail}`,  // hover to retrace the step
        }, String(step.stepIndex)));
      }
      this.root.append(chain);
    }
  }
}
