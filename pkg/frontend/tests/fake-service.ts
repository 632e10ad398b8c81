// In-memory stand-in for the annotation service, faithful to its lease,
// conflict, and idempotency semantics, exposed through the FetchLike shape.

import type { FetchLike } from "../src/api";

export interface FakeRecord {
  nct_id: string;
  original_category: "Yes" | "No" | "Undecided";
  dss_text: string;
  first_posted_year: number;
  manual_label: string | null;
}

interface FakeLease {
  nct_id: string;
  annotator: string;
  token: string;
  expiresAt: number;
}

const json = (body: unknown, status = 200) =>
  new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });

export class FakeService {
  records = new Map<string, FakeRecord>();
  leases = new Map<string, FakeLease>(); // by nct_id
  completed = new Map<string, { nct_id: string; label: string }>(); // by token
  now = 0;
  leaseSeconds = 600;
  requestLog: string[] = [];
  failNext = false;
  private tokenCounter = 0;

  constructor(records: FakeRecord[]) {
    for (const record of records) this.records.set(record.nct_id, record);
  }

  advance(seconds: number): void {
    this.now += seconds;
  }

  private prune(): void {
    for (const [id, lease] of this.leases) {
      if (lease.expiresAt <= this.now) this.leases.delete(id);
    }
  }

  fetch: FetchLike = async (input, init) => {
    const url = new URL(input, "http://fake.test");
    this.requestLog.push(`${init?.method ?? "GET"} ${url.pathname}`);
    if (this.failNext) {
      this.failNext = false;
      throw new TypeError("network down (injected)");
    }

    if (url.pathname === "/api/tasks/next") {
      return this.handleNext(url.searchParams.get("annotator") ?? "");
    }
    const labelMatch = url.pathname.match(/^\/api\/tasks\/([^/]+)\/label$/);
    if (labelMatch && init?.method === "POST") {
      return this.handleSubmit(labelMatch[1], JSON.parse(String(init.body)));
    }
    if (url.pathname === "/api/stats") {
      return json(this.statsBody());
    }
    if (url.pathname === "/api/export") {
      return new Response(this.exportCsv(), {
        status: 200,
        headers: { "Content-Type": "text/csv" },
      });
    }
    return json({ detail: "not found" }, 404);
  };

  private handleNext(annotator: string): Response {
    this.prune();
    const ids = [...this.records.keys()].sort();
    for (const id of ids) {
      const record = this.records.get(id)!;
      if (record.manual_label !== null || this.leases.has(id)) continue;
      const lease: FakeLease = {
        nct_id: id,
        annotator,
        token: `tok-${++this.tokenCounter}`,
        expiresAt: this.now + this.leaseSeconds,
      };
      this.leases.set(id, lease);
      return json({
        nct_id: id,
        dss_text: record.dss_text,
        lease_token: lease.token,
        lease_seconds: this.leaseSeconds,
        expires_at: new Date(lease.expiresAt * 1000).toISOString(),
      });
    }
    return new Response(null, { status: 204 });
  }

  private handleSubmit(
    nctId: string,
    body: { label: string; annotator: string; lease_token: string },
  ): Response {
    const record = this.records.get(nctId);
    if (!record) return json({ detail: "unknown record" }, 404);
    if (!["Yes", "No", "Undecided"].includes(body.label)) {
      return json({ detail: "invalid label" }, 422);
    }

    const done = this.completed.get(body.lease_token);
    if (done) {
      if (done.nct_id === nctId && done.label === body.label) {
        return json(
          { nct_id: nctId, manual_label: body.label, annotator: body.annotator,
            annotated_at: "replay" },
          201,
        );
      }
      return json({ detail: "token already used differently" }, 409);
    }

    this.prune();
    const lease = this.leases.get(nctId);
    if (!lease || lease.token !== body.lease_token) {
      if (record.manual_label !== null) return json({ detail: "already labeled" }, 409);
      return json({ detail: "stale lease" }, 410);
    }
    if (record.manual_label !== null) return json({ detail: "already labeled" }, 409);

    record.manual_label = body.label;
    this.leases.delete(nctId);
    this.completed.set(body.lease_token, { nct_id: nctId, label: body.label });
    return json(
      { nct_id: nctId, manual_label: body.label, annotator: body.annotator,
        annotated_at: new Date(this.now * 1000).toISOString() },
      201,
    );
  }

  private statsBody() {
    const all = [...this.records.values()];
    const labeled = all.filter((r) => r.manual_label !== null);
    const count = (label: string) => labeled.filter((r) => r.manual_label === label).length;
    const agree = labeled.filter((r) => r.manual_label === r.original_category).length;
    return {
      total: all.length,
      labeled: labeled.length,
      remaining: all.length - labeled.length,
      distribution: {
        yes_count: count("Yes"),
        no_count: count("No"),
        undecided_count: count("Undecided"),
      },
      agreement: {
        agree_count: agree,
        total: labeled.length,
        agree_fraction: labeled.length ? agree / labeled.length : 0,
        per_pair_matrix: [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
      },
    };
  }

  private exportCsv(): string {
    const lines = ["nct_id,original_category,dss_text,first_posted_year,manual_label,split"];
    for (const id of [...this.records.keys()].sort()) {
      const r = this.records.get(id)!;
      lines.push(
        [r.nct_id, r.original_category, JSON.stringify(r.dss_text),
         String(r.first_posted_year), r.manual_label ?? "", ""].join(","),
      );
    }
    return lines.join("\n") + "\n";
  }
}

export function makeRecords(count: number): FakeRecord[] {
  const categories: FakeRecord["original_category"][] = ["Yes", "No", "Undecided"];
  return Array.from({ length: count }, (_unused, i) => ({
    nct_id: `NCT${String(i + 1).padStart(8, "0")}`,
    original_category: categories[i % 3],
    dss_text: `statement body number ${i + 1} long enough to label`,
    first_posted_year: 2019,
    manual_label: null,
  }));
}
