// Bootstrap: wire the model to the DOM and poll the pending queue.

import { ReviewApi } from './api.js';
import { ConsoleModel, ConsoleState } from './model.js';
import { renderBanner, renderDetail, renderQueue } from './render.js';

const params = new URLSearchParams(window.location.search);
const BASE_URL = params.get('api') ?? 'http://127.0.0.1:8080';
const POLL_INTERVAL_MS = Number(params.get('poll') ?? '2000');

const api = new ReviewApi(BASE_URL);
const queueEl = document.getElementById('queue')!;
const detailEl = document.getElementById('detail')!;
const bannerEl = document.getElementById('banner')!;
const panelEl = document.getElementById('decision-panel')!;
const noteEl = document.getElementById('note') as HTMLTextAreaElement;
const replacementEl = document.getElementById('replacement') as HTMLTextAreaElement;
const validationEl = document.getElementById('validation')!;

function render(state: ConsoleState): void {
  queueEl.innerHTML = renderQueue(state.items, state.selectedId);
  detailEl.innerHTML = renderDetail(state);
  bannerEl.innerHTML = renderBanner(state.banner);
  panelEl.classList.toggle('hidden', state.detail === null || state.detail.status !== 'pending');
  validationEl.textContent = state.validationError ?? '';
  for (const button of panelEl.querySelectorAll('button')) {
    (button as HTMLButtonElement).disabled = state.decisionInFlight;
  }
  for (const row of queueEl.querySelectorAll('li[data-review]')) {
    row.addEventListener('click', () => {
      void model.select((row as HTMLElement).dataset.review!);
    });
  }
}

const model = new ConsoleModel(api, render);

noteEl.addEventListener('input', () => model.setNote(noteEl.value));
replacementEl.addEventListener('input', () => model.setReplacement(replacementEl.value));
document.getElementById('approve')!.addEventListener('click', () => {
  void model.submitDecision('approved');
});
document.getElementById('reject')!.addEventListener('click', () => {
  void model.submitDecision('rejected');
});
document.getElementById('modify')!.addEventListener('click', () => {
  void model.submitDecision('modified');
});

void model.refresh();
window.setInterval(() => void model.refresh(), POLL_INTERVAL_MS);
