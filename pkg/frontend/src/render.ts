/** DOM rendering: work-item cards, constellation canvas, progress panel. */

import { Progress, WorkItem } from './api.js';
import { PageState } from './state.js';

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function drawConstellation(canvas: HTMLCanvasElement, points: [number, number][]): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.fillStyle = '#10141c';
  ctx.fillRect(0, 0, w, h);
  ctx.strokeStyle = '#2a3344';
  ctx.beginPath();
  ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
  ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
  ctx.stroke();
  const span = Math.max(1e-6, ...points.map(([i, q]) => Math.max(Math.abs(i), Math.abs(q))));
  ctx.fillStyle = '#6fd3ff';
  for (const [i, q] of points) {
    const x = (i / span) * 0.45 * w + w / 2;
    const y = h / 2 - (q / span) * 0.45 * h;
    ctx.fillRect(x - 1, y - 1, 2, 2);
  }
}

function labelPicker(page: PageState, item: WorkItem, onPick: (key: string) => void): HTMLElement {
  const select = document.createElement('select');
  const card = page.card(item.frame_id);
  const blank = document.createElement('option');
  blank.value = '';
  blank.textContent = page.phase === 'bootstrap' ? 'pick a couplet...' : '(model label)';
  select.appendChild(blank);
  const groups: Record<string, string[]> = { registered: page.couplets, 'declare new class': [] };
  for (const mod of page.modulations) {
    for (const sig of page.signals) {
      const key = `${mod}:${sig}`;
      if (!page.couplets.includes(key)) groups['declare new class'].push(key);
    }
  }
  for (const [name, keys] of Object.entries(groups)) {
    const group = document.createElement('optgroup');
    group.label = name;
    for (const key of keys) {
      const option = document.createElement('option');
      option.value = key;
      option.textContent = key;
      if (card.chosenKey === key) option.selected = true;
      group.appendChild(option);
    }
    select.appendChild(group);
  }
  select.addEventListener('change', () => onPick(select.value));
  return select;
}

export function renderCards(
  container: HTMLElement,
  page: PageState,
  onChange: () => void,
): void {
  clear(container);
  for (const card of page.cards) {
    const item = card.item;
    const div = document.createElement('div');
    div.className = 'card';
    div.dataset.frameId = String(item.frame_id);

    const title = document.createElement('div');
    title.className = 'card-title';
    title.textContent = `frame ${item.frame_id} · ${item.snr_db.toFixed(0)} dB`;
    div.appendChild(title);

    const views = document.createElement('div');
    views.className = 'card-views';
    const canvas = document.createElement('canvas');
    canvas.width = 96;
    canvas.height = 96;
    drawConstellation(canvas, item.constellation);
    views.appendChild(canvas);
    const img = document.createElement('img');
    img.src = item.spectrogram;
    img.alt = `spectrogram of frame ${item.frame_id}`;
    img.width = 96;
    img.height = 96;
    views.appendChild(img);
    div.appendChild(views);

    if (card.modelKey !== null) {
      const model = document.createElement('div');
      model.className = 'model-label';
      const conf = item.confidence === null ? '' : ` (${(item.confidence * 100).toFixed(0)}%)`;
      model.textContent = `model: ${card.modelKey}${conf}`;
      div.appendChild(model);
    }

    const picker = labelPicker(page, item, (key) => {
      if (key === '') page.revert(item.frame_id);
      else page.choose(item.frame_id, key);
      div.classList.toggle('flipped', card.chosenKey !== card.modelKey && card.chosenKey !== null);
      div.classList.toggle('unlabelled', card.chosenKey === null);
      onChange();
    });
    div.appendChild(picker);
    div.classList.toggle('unlabelled', card.chosenKey === null);
    container.appendChild(div);
  }
}

export function renderProgress(panel: HTMLElement, status: string, progress?: Progress): void {
  clear(panel);
  const head = document.createElement('div');
  head.className = 'status-line';
  head.textContent = `status: ${status}`;
  panel.appendChild(head);
  if (!progress) return;
  const rows: [string, string][] = [
    ['model labelled', `${progress.model_labelled}`],
    ['user labelled', `${progress.user_labelled}`],
    ['pool remaining', `${progress.pool_remaining} / ${progress.total}`],
    ['iteration', `${progress.iteration}`],
    ['restarts', `${progress.restarts}`],
  ];
  const list = document.createElement('dl');
  for (const [k, v] of rows) {
    const dt = document.createElement('dt');
    dt.textContent = k;
    const dd = document.createElement('dd');
    dd.textContent = v;
    list.appendChild(dt);
    list.appendChild(dd);
  }
  panel.appendChild(list);
  const bar = document.createElement('div');
  bar.className = 'buffer-bar';
  const fill = document.createElement('div');
  fill.className = 'buffer-fill';
  const pct = progress.buffer_capacity > 0
    ? Math.min(100, (100 * progress.buffer_fill) / progress.buffer_capacity)
    : 0;
  fill.style.width = `${pct}%`;
  bar.appendChild(fill);
  const caption = document.createElement('div');
  caption.className = 'buffer-caption';
  caption.textContent = `buffer ${progress.buffer_fill} / ${progress.buffer_capacity}`;
  panel.appendChild(caption);
  panel.appendChild(bar);
}

export function showBanner(node: HTMLElement, text: string, kind: 'error' | 'info'): void {
  node.textContent = text;
  node.className = `banner ${kind}`;
  node.hidden = text === '';
}
