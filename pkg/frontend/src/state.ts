/**
 * Pure view-model for one in-flight work page.
 *
 * The UI is stateless beyond this: re-fetching the same work payload
 * reproduces the same view, and nothing is ever submitted without an
 * explicit user action.  Review submissions carry only the flipped cards
 * (unchanged cards are implicit accepts); bootstrap submissions must cover
 * every card.
 */

import { CoupletRef, LabelSubmission, WorkItem, WorkPayload, coupletKey, parseCouplet } from './api.js';

export interface CardState {
  item: WorkItem;
  modelKey: string | null;        // 'mod:sig' proposed by the model, if any
  chosenKey: string | null;       // current selection ('mod:sig')
}

export class PageState {
  readonly phase: 'bootstrap' | 'review';
  readonly couplets: string[];    // registered choices offered by the picker
  readonly modulations: string[];
  readonly signals: string[];
  readonly cards: CardState[];

  constructor(payload: WorkPayload) {
    this.phase = payload.phase;
    this.couplets = [...payload.couplets].sort();
    this.modulations = payload.modulations;
    this.signals = payload.signals;
    this.cards = payload.items.map((item) => {
      const modelKey = item.model_label ? coupletKey(item.model_label) : null;
      return { item, modelKey, chosenKey: modelKey };
    });
  }

  card(frameId: number): CardState {
    const card = this.cards.find((c) => c.item.frame_id === frameId);
    if (!card) throw new Error(`frame ${frameId} is not on this page`);
    return card;
  }

  /** Select a label for one card; 'mod:sig' may be any registered pair
   * (declaring a class outside the offered couplets is allowed). */
  choose(frameId: number, key: string): void {
    const { modulation, signal } = parseCouplet(key);
    if (!this.modulations.includes(modulation)) {
      throw new Error(`unknown modulation: ${modulation}`);
    }
    if (!this.signals.includes(signal)) {
      throw new Error(`unknown signal class: ${signal}`);
    }
    this.card(frameId).chosenKey = key;
  }

  /** Revert one card to the model's proposal (review) or unlabelled (bootstrap). */
  revert(frameId: number): void {
    const card = this.card(frameId);
    card.chosenKey = card.modelKey;
  }

  flippedCount(): number {
    return this.cards.filter((c) => c.chosenKey !== c.modelKey && c.chosenKey !== null).length;
  }

  unlabelledCount(): number {
    return this.cards.filter((c) => c.chosenKey === null).length;
  }

  /** True when the page may be submitted. */
  canSubmit(): boolean {
    if (this.phase === 'bootstrap') return this.unlabelledCount() === 0;
    return true; // empty review submission is a valid all-accept
  }

  /** The request body: every card in bootstrap, only flips in review. */
  submission(): LabelSubmission[] {
    if (!this.canSubmit()) {
      throw new Error(`${this.unlabelledCount()} cards still need a label`);
    }
    const picked = this.phase === 'bootstrap'
      ? this.cards
      : this.cards.filter((c) => c.chosenKey !== null && c.chosenKey !== c.modelKey);
    return picked.map((c) => {
      const label: CoupletRef = parseCouplet(c.chosenKey as string);
      return { frame_id: c.item.frame_id, ...label };
    });
  }
}
