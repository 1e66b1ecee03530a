// Typed client for the verification service's JSON API. All requests go
// through an injected fetch so tests can stand in a mock server.

export interface QueueItem {
  annotation_id: string;
  word: string;
  episode_id: string;
  start_s: number;
  end_s: number;
  confidence: number;
  media_url: string;
}

export type VerdictStatus = "correct" | "incorrect" | "unsure";
export type Fluency = "native" | "non_native";

export interface VerdictPayload {
  annotation_id: string;
  status: VerdictStatus;
  annotator_id: string;
  fluency: Fluency;
  correction?: string;
}

export interface ServiceStats {
  queued: number;
  verified_correct: number;
  verified_incorrect: number;
  unsure: number;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** A response the server produced but the client cannot act on. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base = "",
  ) {}

  /** Next unjudged item for this annotator, or null when the queue is drained. */
  async nextItem(annotatorId: string): Promise<QueueItem | null> {
    const res = await this.fetchFn(
      `${this.base}/api/queue/next?annotator=${encodeURIComponent(annotatorId)}`,
    );
    if (res.status === 204) {
      return null;
    }
    if (!res.ok) {
      throw new ApiError(res.status, await res.text());
    }
    return (await res.json()) as QueueItem;
  }

  async submitVerdict(payload: VerdictPayload): Promise<void> {
    const res = await this.fetchFn(`${this.base}/api/verdicts`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (res.status !== 201) {
      throw new ApiError(res.status, await res.text());
    }
  }

  async stats(): Promise<ServiceStats> {
    const res = await this.fetchFn(`${this.base}/api/stats`);
    if (!res.ok) {
      throw new ApiError(res.status, await res.text());
    }
    return (await res.json()) as ServiceStats;
  }

  async vocab(): Promise<string[]> {
    const res = await this.fetchFn(`${this.base}/api/vocab`);
    if (!res.ok) {
      throw new ApiError(res.status, await res.text());
    }
    const data = (await res.json()) as { words: string[] };
    return data.words;
  }
}
