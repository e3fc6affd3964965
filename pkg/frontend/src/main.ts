/**
 * Session wiring: create or attach to a labelling session, render work pages,
 * submit labels on explicit user action only, poll status every second.
 */

import { ApiError, SessionClient, StatusPayload } from './api.js';
import { PageState } from './state.js';
import { clear, renderCards, renderProgress, showBanner } from './render.js';

const client = new SessionClient('');
const POLL_MS = 1000;

const datasetInput = document.getElementById('dataset-name') as HTMLInputElement;
const sessionInput = document.getElementById('session-id') as HTMLInputElement;
const createBtn = document.getElementById('create-session') as HTMLButtonElement;
const attachBtn = document.getElementById('attach-session') as HTMLButtonElement;
const submitBtn = document.getElementById('submit-page') as HTMLButtonElement;
const phaseHeading = document.getElementById('phase-heading')!;
const cardsNode = document.getElementById('cards')!;
const progressNode = document.getElementById('progress')!;
const bannerNode = document.getElementById('banner')!;
const flipCounter = document.getElementById('flip-counter')!;

let sessionId: string | null = null;
let page: PageState | null = null;
let pollTimer: number | null = null;

function setBusy(busy: boolean): void {
  submitBtn.disabled = busy || page === null || !page.canSubmit();
  createBtn.disabled = busy;
  attachBtn.disabled = busy;
}

function updateFlipCounter(): void {
  if (!page) {
    flipCounter.textContent = '';
    return;
  }
  if (page.phase === 'bootstrap') {
    const left = page.unlabelledCount();
    flipCounter.textContent = left === 0 ? 'all labelled' : `${left} still unlabelled`;
  } else {
    flipCounter.textContent = `${page.flippedCount()} corrections staged`;
  }
  submitBtn.disabled = !page.canSubmit();
}

async function refreshStatus(): Promise<void> {
  if (!sessionId) return;
  try {
    const status = await client.getStatus(sessionId);
    renderProgress(progressNode, status.status, status.progress);
  } catch {
    // transient poll failures keep the last panel
  }
}

async function loadWork(): Promise<void> {
  if (!sessionId) return;
  try {
    const payload = await client.getWork(sessionId);
    page = new PageState(payload);
    phaseHeading.textContent = payload.phase === 'bootstrap'
      ? `bootstrap: label ${payload.items.length} samples`
      : `review page ${payload.page_index}: correct wrong labels`;
    renderCards(cardsNode as HTMLElement, page, updateFlipCounter);
    showBanner(bannerNode as HTMLElement, '', 'info');
    updateFlipCounter();
  } catch (err) {
    page = null;
    clear(cardsNode as HTMLElement);
    if (err instanceof ApiError && err.code === 409) {
      phaseHeading.textContent = 'session complete';
      showBanner(bannerNode as HTMLElement, 'no work pending: the session is complete or training', 'info');
    } else {
      phaseHeading.textContent = '';
      showBanner(bannerNode as HTMLElement, `failed to load work: ${(err as Error).message}`, 'error');
    }
    updateFlipCounter();
  }
}

function startPolling(): void {
  if (pollTimer !== null) window.clearInterval(pollTimer);
  pollTimer = window.setInterval(refreshStatus, POLL_MS);
}

async function attach(id: string): Promise<void> {
  sessionId = id;
  sessionInput.value = id;
  await refreshStatus();
  await loadWork();
  startPolling();
}

createBtn.addEventListener('click', async () => {
  setBusy(true);
  try {
    const created: StatusPayload = await client.createSession(datasetInput.value.trim());
    await attach(created.session_id);
  } catch (err) {
    showBanner(bannerNode as HTMLElement, `create failed: ${(err as Error).message}`, 'error');
  } finally {
    setBusy(false);
  }
});

attachBtn.addEventListener('click', async () => {
  const id = sessionInput.value.trim();
  if (!id) return;
  setBusy(true);
  try {
    await attach(id);
  } finally {
    setBusy(false);
  }
});

submitBtn.addEventListener('click', async () => {
  if (!sessionId || !page) return;
  // selections survive a failed submit: the page object is only replaced
  // after the server acknowledges
  setBusy(true);
  try {
    const body = page.submission();
    const status = await client.submitLabels(sessionId, body);
    renderProgress(progressNode, status.status, status.progress);
    await loadWork();
  } catch (err) {
    const message = err instanceof ApiError
      ? `submit rejected (${err.code}): ${err.message} — selections kept, retry when ready`
      : `network error: ${(err as Error).message} — selections kept, retry when ready`;
    showBanner(bannerNode as HTMLElement, message, 'error');
  } finally {
    setBusy(false);
  }
});

updateFlipCounter();
setBusy(false);
