/** Minimal built-in renderer: clickable bars, line paths, and fallback tables.
 * Enough to select elements and to surface annotations; no attempt to mimic
 * arbitrary VA systems. */

import { clear, el } from './dom';
import type { Annotation, SeriesPayload, ViewInfo } from './types';

export interface ChartHandlers {
  onSelect: (viewName: string, dimName: string, value: unknown) => void;
}

export class ChartPanel {
  readonly root: HTMLElement;
  private series: SeriesPayload | null = null;
  private annotations: Annotation[] = [];

  constructor(private view: ViewInfo, private handlers: ChartHandlers) {
    this.root = el('div', { class: 'chart-panel', 'data-view': view.viewName },
                   el('h3', {}, view.viewName));
  }

  get dimension(): string | null {
    for (const layer of this.view.layers) {
      for (const ref of Object.values(layer.encoding)) {
        if (ref.fieldType !== 'quantitative') return ref.field;
      }
    }
    return null;
  }

  update(series: SeriesPayload | null, annotations: Annotation[]): void {
    this.series = series;
    this.annotations = annotations.filter((a) => a.viewName === this.view.viewName);
    this.render();
  }

  /** Re-render with the already-loaded series and fresh annotations. */
  setAnnotations(annotations: Annotation[]): void {
    this.update(this.series, annotations);
  }

  private render(): void {
    clear(this.root);
    this.root.append(el('h3', {}, this.view.viewName));
    if (!this.series || !this.series.keys || this.series.values.length === 0) {
      this.root.append(el('p', { class: 'chart-empty' }, 'no data'));
      return;
    }
    const { keys, values, kind } = this.series;
    const max = Math.max(...values.map(Math.abs), 1e-9);
    const container = el('div', { class: `chart chart-${kind}` });
    const annotated = new Set(
      this.annotations.flatMap((a) => a.value.map((v) => String(v))));
    keys!.forEach((key, i) => {
      const height = Math.round((Math.abs(values[i]) / max) * 100);
      const element = el('div', {
        class: 'chart-element' + (annotated.has(String(key)) ? ' annotated' : ''),
        'data-key': String(key),
        role: 'button',
        click: () => {
          const dim = this.series?.dimension ?? this.dimension;
          if (dim) this.handlers.onSelect(this.view.viewName, dim, key);
        },
      },
        el('div', { class: 'chart-value', style: `height:${height}px` }),
        el('span', { class: 'chart-key' }, String(key)),
      );
      if (annotated.has(String(key))) {
        element.append(el('span', { class: 'annotation-badge' }, '*'));
      }
      container.append(element);
    });
    this.root.append(container);
  }
}

/** Tabular fallback for views without a usable dimension/measure pair. */
export function renderTable(rows: Record<string, unknown>[]): HTMLElement {
  const table = el('table', { class: 'data-table' });
  if (rows.length === 0) return table;
  const header = el('tr', {});
  for (const key of Object.keys(rows[0])) header.append(el('th', {}, key));
  table.append(header);
  for (const row of rows) {
    const tr = el('tr', {});
    for (const value of Object.values(row)) tr.append(el('td', {}, String(value)));
    table.append(tr);
  }
  return table;
}
