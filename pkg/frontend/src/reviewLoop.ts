// Review session state machine. Drives fetch-next -> watch -> verdict ->
// auto-advance against the JSON API, with no DOM dependency so the whole
// flow is testable against a mock server.
//
// Invariants enforced here:
//   - exactly one POST per decision: deciding leaves the "reviewing" phase
//     synchronously, so repeated keypresses cannot re-submit;
//   - a verdict is never lost: on failure the draft is kept in the state
//     and retried verbatim, and the server deduplicates by
//     (annotation_id, annotator_id), so a retry after a half-delivered
//     request cannot double-count.

import {
  ApiClient,
  Fluency,
  QueueItem,
  ServiceStats,
  VerdictPayload,
  VerdictStatus,
} from "./api.js";
import { isVocabularyWord, normalizeWord } from "./autocomplete.js";

export type PlaybackRate = 1.0 | 0.5;

/** What the review panel renders for the current queue item. */
export interface QueueItemView {
  item: QueueItem;
  playbackRate: PlaybackRate;
  mediaMissing: boolean;
}

export type SessionState =
  | { phase: "loading"; reviewed: number }
  | {
      phase: "reviewing";
      view: QueueItemView;
      correcting: boolean;
      correctionError: string | null;
      reviewed: number;
    }
  | { phase: "submitting"; draft: VerdictPayload; reviewed: number }
  | { phase: "retrying"; draft: VerdictPayload; error: string; reviewed: number }
  | { phase: "drained"; stats: ServiceStats; reviewed: number }
  | { phase: "failed"; error: string; reviewed: number };

export type StateListener = (state: SessionState) => void;

export interface SessionOptions {
  api: ApiClient;
  annotatorId: string;
  fluency: Fluency;
}

export class ReviewSession {
  private readonly api: ApiClient;
  private readonly annotatorId: string;
  private readonly fluency: Fluency;
  private readonly listeners: StateListener[] = [];

  private state: SessionState = { phase: "loading", reviewed: 0 };
  private vocabulary: string[] = [];
  private playbackRate: PlaybackRate = 1.0;
  private retryInFlight = false;

  constructor(options: SessionOptions) {
    this.api = options.api;
    this.annotatorId = options.annotatorId;
    this.fluency = options.fluency;
  }

  getState(): SessionState {
    return this.state;
  }

  getVocabulary(): readonly string[] {
    return this.vocabulary;
  }

  subscribe(listener: StateListener): () => void {
    this.listeners.push(listener);
    return () => {
      const i = this.listeners.indexOf(listener);
      if (i >= 0) {
        this.listeners.splice(i, 1);
      }
    };
  }

  private setState(state: SessionState): void {
    this.state = state;
    for (const listener of this.listeners) {
      listener(state);
    }
  }

  async start(): Promise<void> {
    try {
      this.vocabulary = await this.api.vocab();
    } catch (err) {
      this.setState({
        phase: "failed",
        error: describe(err),
        reviewed: this.state.reviewed,
      });
      return;
    }
    await this.loadNext();
  }

  private async loadNext(): Promise<void> {
    const reviewed = this.state.reviewed;
    this.setState({ phase: "loading", reviewed });
    let item: QueueItem | null;
    try {
      item = await this.api.nextItem(this.annotatorId);
    } catch (err) {
      this.setState({ phase: "failed", error: describe(err), reviewed });
      return;
    }
    if (item === null) {
      let stats: ServiceStats;
      try {
        stats = await this.api.stats();
      } catch (err) {
        this.setState({ phase: "failed", error: describe(err), reviewed });
        return;
      }
      this.setState({ phase: "drained", stats, reviewed });
      return;
    }
    this.setState({
      phase: "reviewing",
      view: {
        item,
        playbackRate: this.playbackRate,
        mediaMissing: false,
      },
      correcting: false,
      correctionError: null,
      reviewed,
    });
  }

  /** Submit a verdict for the item under review; no-op outside "reviewing". */
  async decide(status: VerdictStatus, correction?: string): Promise<void> {
    if (this.state.phase !== "reviewing") {
      return;
    }
    const draft: VerdictPayload = {
      annotation_id: this.state.view.item.annotation_id,
      status,
      annotator_id: this.annotatorId,
      fluency: this.fluency,
    };
    if (correction !== undefined) {
      draft.correction = correction;
    }
    this.setState({
      phase: "submitting",
      draft,
      reviewed: this.state.reviewed,
    });
    await this.deliver(draft);
  }

  /** Re-send the retained draft after a failure; no-op outside "retrying". */
  async retry(): Promise<void> {
    if (this.state.phase !== "retrying" || this.retryInFlight) {
      return;
    }
    this.retryInFlight = true;
    try {
      await this.deliver(this.state.draft);
    } finally {
      this.retryInFlight = false;
    }
  }

  private async deliver(draft: VerdictPayload): Promise<void> {
    const reviewed = this.state.reviewed;
    try {
      await this.api.submitVerdict(draft);
    } catch (err) {
      this.setState({
        phase: "retrying",
        draft,
        error: describe(err),
        reviewed,
      });
      return;
    }
    this.setState({ phase: "loading", reviewed: reviewed + 1 });
    await this.loadNext();
  }

  /** N pressed: open the correction field. */
  beginCorrection(): void {
    if (this.state.phase !== "reviewing") {
      return;
    }
    this.setState({ ...this.state, correcting: true, correctionError: null });
  }

  cancelCorrection(): void {
    if (this.state.phase !== "reviewing") {
      return;
    }
    this.setState({ ...this.state, correcting: false, correctionError: null });
  }

  /** Enter pressed in the correction field. Only served words are accepted. */
  async submitCorrection(raw: string): Promise<void> {
    if (this.state.phase !== "reviewing" || !this.state.correcting) {
      return;
    }
    const word = normalizeWord(raw);
    if (!isVocabularyWord(this.vocabulary, word)) {
      this.setState({
        ...this.state,
        correctionError: `"${raw}" is not a vocabulary word`,
      });
      return;
    }
    await this.decide("incorrect", word);
  }

  toggleSpeed(): void {
    this.playbackRate = this.playbackRate === 1.0 ? 0.5 : 1.0;
    if (this.state.phase === "reviewing") {
      this.setState({
        ...this.state,
        view: { ...this.state.view, playbackRate: this.playbackRate },
      });
    }
  }

  /** The clip failed to load; surface the media-missing badge. */
  markMediaMissing(): void {
    if (this.state.phase !== "reviewing") {
      return;
    }
    this.setState({
      ...this.state,
      view: { ...this.state.view, mediaMissing: true },
    });
  }

  /** Reload after a fatal error (initial fetch failures and the like). */
  async reload(): Promise<void> {
    if (this.state.phase !== "failed") {
      return;
    }
    if (this.vocabulary.length === 0) {
      await this.start();
    } else {
      await this.loadNext();
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof Error) {
    return err.message || err.name;
  }
  return String(err);
}
