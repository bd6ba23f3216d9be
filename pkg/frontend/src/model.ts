// View-model for the console: every piece of rendered state is derived
// from API responses; the only client-side additions are display flags
// (selection, in-flight, banners). Concurrent reviewers are reconciled
// purely through server responses: a 409 raises the conflict banner and
// refreshes the item, nothing is guessed locally.

import {
  ApiFailure,
  DecisionBody,
  DecisionStatus,
  ReviewDetail,
  ReviewSummary,
} from './api.js';

/** The slice of the API the console actually uses. */
export interface ReviewApiPort {
  listPending(): Promise<ReviewSummary[]>;
  getReview(reviewId: string): Promise<ReviewDetail>;
  decide(reviewId: string, body: DecisionBody): Promise<ReviewDetail>;
}

export type Banner =
  | { kind: 'none' }
  | { kind: 'retry'; message: string }
  | { kind: 'conflict'; message: string }
  | { kind: 'error'; message: string }
  | { kind: 'decided'; message: string };

export interface ConsoleState {
  items: ReviewSummary[];
  selectedId: string | null;
  detail: ReviewDetail | null;
  banner: Banner;
  decisionInFlight: boolean;
  validationError: string | null;
  note: string;
  replacement: string;
}

export function initialState(): ConsoleState {
  return {
    items: [],
    selectedId: null,
    detail: null,
    banner: { kind: 'none' },
    decisionInFlight: false,
    validationError: null,
    note: '',
    replacement: '',
  };
}

export class ConsoleModel {
  state: ConsoleState = initialState();

  constructor(
    private readonly api: ReviewApiPort,
    private readonly onChange: (state: ConsoleState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  /** Poll the pending queue. Connection loss keeps the current list. */
  async refresh(): Promise<void> {
    try {
      const items = await this.api.listPending();
      this.state.items = items;
      if (this.state.banner.kind === 'retry') {
        this.state.banner = { kind: 'none' };
      }
      if (this.state.selectedId && !items.some((i) => i.review_id === this.state.selectedId)) {
        // decided elsewhere between polls; drop the stale selection
        this.state.selectedId = null;
        this.state.detail = null;
      }
    } catch (err) {
      this.state.banner = {
        kind: 'retry',
        message: `connection lost, retrying (${describe(err)})`,
      };
    }
    this.emit();
  }

  async select(reviewId: string): Promise<void> {
    this.state.selectedId = reviewId;
    this.state.validationError = null;
    this.state.note = '';
    this.state.replacement = '';
    try {
      this.state.detail = await this.api.getReview(reviewId);
    } catch (err) {
      this.state.detail = null;
      this.state.banner = { kind: 'error', message: describe(err) };
    }
    this.emit();
  }

  setNote(value: string): void {
    this.state.note = value;
    this.emit();
  }

  setReplacement(value: string): void {
    this.state.replacement = value;
    if (this.state.validationError && value.trim()) {
      this.state.validationError = null;
    }
    this.emit();
  }

  /**
   * Submit a decision for the selected item. Modify without replacement
   * text fails validation locally; no request goes out. The buttons are
   * disabled while a request is in flight, so a decision can never be
   * submitted twice from this client.
   */
  async submitDecision(status: DecisionStatus): Promise<void> {
    const selected = this.state.selectedId;
    if (!selected || this.state.decisionInFlight) {
      return;
    }
    if (status === 'modified' && !this.state.replacement.trim()) {
      this.state.validationError = 'modify requires replacement text';
      this.emit();
      return;
    }
    const body = {
      status,
      ...(this.state.note.trim() ? { note: this.state.note.trim() } : {}),
      ...(status === 'modified' ? { replacement_text: this.state.replacement } : {}),
    };
    this.state.decisionInFlight = true;
    this.state.validationError = null;
    this.emit();
    try {
      const decided = await this.api.decide(selected, body);
      this.state.items = this.state.items.filter((i) => i.review_id !== selected);
      this.state.selectedId = null;
      this.state.detail = null;
      this.state.banner = { kind: 'decided', message: `recorded: ${decided.status}` };
    } catch (err) {
      if (err instanceof ApiFailure && err.status === 409) {
        this.state.banner = { kind: 'conflict', message: err.detail };
        await this.refreshSelected(selected);
      } else if (err instanceof ApiFailure && err.status === 422) {
        this.state.validationError = err.detail;
      } else {
        // network failure: leave everything intact so the expert can retry
        this.state.banner = { kind: 'error', message: describe(err) };
      }
    } finally {
      this.state.decisionInFlight = false;
      this.emit();
    }
  }

  private async refreshSelected(reviewId: string): Promise<void> {
    try {
      this.state.detail = await this.api.getReview(reviewId);
      if (this.state.detail.status !== 'pending') {
        this.state.items = this.state.items.filter((i) => i.review_id !== reviewId);
      }
    } catch {
      this.state.detail = null;
    }
  }
}

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
