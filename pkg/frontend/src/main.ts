/** Browser entry point: one base-URL setting, then hand over to App. */

import { ApiClient } from './api';
import { App } from './app';
import { el } from './dom';
import type { SpecDocument } from './types';

const baseUrl =
  new URLSearchParams(window.location.search).get('api') ?? 'http://127.0.0.1:8000';

async function boot(): Promise<void> {
  const rootElement = document.getElementById('root');
  if (!rootElement) return;
  const app = new App(new ApiClient(baseUrl));
  rootElement.append(app.root);

  const specInput = el('input', { type: 'file', accept: '.json' });
  const csvInput = el('input', { type: 'file', accept: '.csv' });
  const taskInput = el('input', { placeholder: 'analysis task (optional)' });
  const go = el('button', {
    click: async () => {
      const specFile = specInput.files?.[0];
      const csvFile = csvInput.files?.[0];
      if (!specFile || !csvFile) return;
      const spec = JSON.parse(await specFile.text()) as SpecDocument;
      await app.start(spec, await csvFile.text(), taskInput.value || undefined);
      loader.remove();
    },
  }, 'Start session');
  const loader = el('div', { class: 'loader' },
                    el('label', {}, 'Spec: ', specInput),
                    el('label', {}, 'Data: ', csvInput),
                    taskInput, go);
  rootElement.prepend(loader);
}

void boot();
