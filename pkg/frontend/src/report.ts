/** Report preview: frame structure of the generated slides plus download. */

import { clear, el } from './dom';
import type { UiState } from './state';

export class ReportView {
  readonly root: HTMLElement;
  downloadName: string | null = null;

  constructor(private state: UiState, private reportUrl: (name: string) => string) {
    this.root = el('section', { class: 'report-view' });
    state.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    clear(this.root);
    if (this.state.reportPreview.length === 0) {
      this.root.append(el('p', { class: 'report-empty' },
                          'Close a round and select it to preview its report.'));
      return;
    }
    if (this.downloadName) {
      this.root.append(el('a', {
        class: 'report-download',
        href: this.reportUrl(this.downloadName),
        download: `${this.downloadName}.tex`,
      }, 'Download .tex'));
    }
    for (const frame of this.state.reportPreview) {
      const card = el('div', { class: 'report-frame' },
                      el('h4', {}, frame.title || 'Untitled frame'));
      if (frame.bullets.length) {
        const list = el('ul', {});
        for (const bullet of frame.bullets) list.append(el('li', {}, bullet));
        card.append(list);
      }
      if (frame.imageName) {
        card.append(el('div', { class: 'report-image', 'data-image': frame.imageName },
                       frame.imageName));
      }
      this.root.append(card);
    }
  }
}
