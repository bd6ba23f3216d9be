// Typed client for the documented review endpoints. The console talks to
// the service through this module only; no other backends, no hidden
// state beyond what these calls return.

export interface ReviewSummary {
  review_id: string;
  query_id: string;
  session_id: string;
  query_text: string;
  status: ReviewStatus;
  created_seq: number;
}

export type ReviewStatus = 'pending' | 'approved' | 'rejected' | 'modified';
export type DecisionStatus = Exclude<ReviewStatus, 'pending'>;

export interface FlagSpan {
  start: number;
  end: number;
  category: 'toxicity' | 'pii-email' | 'pii-card' | 'pii-ssn';
  matched: string;
}

export interface RiskAssessment {
  toxicity_count: number;
  pii_count: number;
  score: number;
  spans: FlagSpan[];
  verdict: 'allow' | 'block';
}

export interface ReviewDetail extends ReviewSummary {
  domain_tag: string;
  persona: string;
  draft: string;
  rendered_prompt: string;
  documents: [string, string, number][]; // [domain, doc_id, score]
  risk: RiskAssessment;
  expert_note: string | null;
  replacement_text: string | null;
  decided_seq: number | null;
}

export interface DecisionBody {
  status: DecisionStatus;
  note?: string;
  replacement_text?: string;
}

export interface QueryRecord {
  query_id: string;
  session_id: string;
  pattern: string;
  persona: string;
  status: 'delivered' | 'pending-review';
  review_id: string | null;
  response: { text: string; persona: string; provenance: unknown } | null;
}

export class ApiFailure extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiFailure(
        response.status,
        (body as { error?: string }).error ?? 'HttpError',
        (body as { detail?: string }).detail ?? response.statusText,
      );
    }
    return body as T;
  }

  health(): Promise<{ status: string; event_seq: number }> {
    return this.request('/v1/health');
  }

  listPending(): Promise<ReviewSummary[]> {
    return this.request('/v1/reviews?status=pending');
  }

  getReview(reviewId: string): Promise<ReviewDetail> {
    return this.request(`/v1/reviews/${encodeURIComponent(reviewId)}`);
  }

  decide(reviewId: string, body: DecisionBody): Promise<ReviewDetail> {
    return this.request(`/v1/reviews/${encodeURIComponent(reviewId)}/decision`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  getQuery(queryId: string): Promise<QueryRecord> {
    return this.request(`/v1/queries/${encodeURIComponent(queryId)}`);
  }
}
