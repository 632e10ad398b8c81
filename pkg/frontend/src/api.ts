// Typed client for the annotation service API. The fetch function is
// injectable so tests can point the client at a fake or a spawned server.

export interface TaskPayload {
  nct_id: string;
  dss_text: string;
  lease_token: string;
  lease_seconds: number;
  expires_at: string;
}

export interface LabelDistribution {
  yes_count: number;
  no_count: number;
  undecided_count: number;
}

export interface AgreementStats {
  agree_count: number;
  total: number;
  agree_fraction: number;
  per_pair_matrix: number[][];
}

export interface ProgressStats {
  total: number;
  labeled: number;
  remaining: number;
  distribution: LabelDistribution;
  agreement: AgreementStats;
}

export type Choice = "Yes" | "No" | "Undecided";

export interface SubmitOutcome {
  status: number; // 201 committed, 409 conflict, 410 stale, 404 unknown, 422 invalid
  detail?: string;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AnnotationApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  /** Next leased task for this annotator, or null when no work remains. */
  async nextTask(annotator: string): Promise<TaskPayload | null> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/tasks/next?annotator=${encodeURIComponent(annotator)}`,
    );
    if (response.status === 204) return null;
    if (!response.ok) throw new Error(`next task failed: ${response.status}`);
    return (await response.json()) as TaskPayload;
  }

  /** Submit one label; non-2xx service verdicts are returned, not thrown. */
  async submitLabel(
    nctId: string,
    choice: Choice,
    annotator: string,
    leaseToken: string,
  ): Promise<SubmitOutcome> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/tasks/${encodeURIComponent(nctId)}/label`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ label: choice, annotator, lease_token: leaseToken }),
      },
    );
    if (response.status === 201 || response.status === 409
        || response.status === 410 || response.status === 404
        || response.status === 422) {
      let detail: string | undefined;
      try {
        detail = ((await response.json()) as { detail?: string }).detail;
      } catch {
        detail = undefined;
      }
      return { status: response.status, detail };
    }
    throw new Error(`label submission failed: ${response.status}`);
  }

  async stats(): Promise<ProgressStats> {
    const response = await this.fetchFn(`${this.baseUrl}/api/stats`);
    if (!response.ok) throw new Error(`stats failed: ${response.status}`);
    return (await response.json()) as ProgressStats;
  }

  async exportCsv(): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/api/export`);
    if (!response.ok) throw new Error(`export failed: ${response.status}`);
    return await response.text();
  }
}
