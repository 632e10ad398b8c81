// Session state machine. All annotation state lives on the server; this
// object only tracks the current task, the in-flight guard, and counters
// for the session display. A page reload therefore never loses a committed
// label.

import { AnnotationApi, Choice, ProgressStats, TaskPayload } from "./api";

export type Phase = "idle" | "loading" | "task" | "submitting" | "done" | "error";

export interface TaskView {
  nct_id: string;
  dss_text: string;
  lease_token: string;
  lease_remaining_seconds: number;
}

export interface SessionState {
  annotator: string;
  phase: Phase;
  task: TaskView | null;
  labelsSubmittedThisSession: number;
  stats: ProgressStats | null;
  statsStale: boolean;
  notice: string | null;
  errorMessage: string | null;
}

export interface SessionOptions {
  onChange?: (state: SessionState) => void;
  now?: () => number; // ms epoch, injectable for countdown tests
}

export class AnnotationSession {
  readonly state: SessionState = {
    annotator: "",
    phase: "idle",
    task: null,
    labelsSubmittedThisSession: 0,
    stats: null,
    statsStale: false,
    notice: null,
    errorMessage: null,
  };

  private leaseExpiresAtMs = 0;
  private inFlight = false;
  private doneRetryTicks = 0;
  private readonly now: () => number;
  private readonly onChange: (state: SessionState) => void;

  constructor(private readonly api: AnnotationApi, options: SessionOptions = {}) {
    this.now = options.now ?? (() => Date.now());
    this.onChange = options.onChange ?? (() => undefined);
  }

  private emit(): void {
    this.onChange(this.state);
  }

  async start(annotator: string): Promise<void> {
    this.state.annotator = annotator;
    await this.refreshStats();
    await this.loadNext();
  }

  async loadNext(): Promise<void> {
    if (this.inFlight) return;
    this.state.phase = "loading";
    this.state.task = null;
    this.emit();
    try {
      const payload = await this.api.nextTask(this.state.annotator);
      if (payload === null) {
        this.state.phase = "done";
        this.state.task = null;
        await this.refreshStats();
        this.emit();
        return;
      }
      this.installTask(payload);
    } catch (error) {
      // network failure: keep session state intact, show a retry banner
      this.state.phase = "error";
      this.state.errorMessage = String(error);
      this.emit();
    }
  }

  private installTask(payload: TaskPayload): void {
    this.leaseExpiresAtMs = this.now() + payload.lease_seconds * 1000;
    this.state.task = {
      nct_id: payload.nct_id,
      dss_text: payload.dss_text,
      lease_token: payload.lease_token,
      lease_remaining_seconds: payload.lease_seconds,
    };
    this.state.phase = "task";
    this.state.errorMessage = null;
    this.emit();
  }

  /** Countdown heartbeat; expires the lease locally and advances. Also polls
   * for reappearing work: "no work" can mean every remaining record is leased
   * to someone else, and those leases lapse. */
  tick(): void {
    if (this.state.phase === "done") {
      if (this.state.stats !== null && this.state.stats.remaining > 0) {
        this.doneRetryTicks += 1;
        if (this.doneRetryTicks >= 4) {
          this.doneRetryTicks = 0;
          void this.loadNext();
        }
      }
      return;
    }
    if (this.state.phase !== "task" || this.state.task === null) return;
    const remaining = Math.max(0, (this.leaseExpiresAtMs - this.now()) / 1000);
    this.state.task.lease_remaining_seconds = remaining;
    if (remaining <= 0) {
      this.state.notice = "Lease expired; fetching a fresh task.";
      this.state.task = null;
      this.emit();
      void this.loadNext();
      return;
    }
    this.emit();
  }

  /** Submit the active task. Exactly one submission may be in flight. */
  async submit(choice: Choice): Promise<void> {
    if (this.inFlight || this.state.phase !== "task" || this.state.task === null) {
      return;
    }
    const task = this.state.task;
    this.inFlight = true;
    this.state.phase = "submitting";
    this.emit();
    try {
      const outcome = await this.api.submitLabel(
        task.nct_id,
        choice,
        this.state.annotator,
        task.lease_token,
      );
      if (outcome.status === 201) {
        this.state.labelsSubmittedThisSession += 1;
        this.state.notice = null;
      } else if (outcome.status === 409 || outcome.status === 410) {
        // someone else won the record or the lease went stale; move on
        this.state.notice =
          outcome.status === 409
            ? `${task.nct_id} was already labeled elsewhere.`
            : `Lease for ${task.nct_id} went stale.`;
      } else if (outcome.status === 422) {
        this.state.errorMessage = `The service rejected the label: ${outcome.detail ?? "invalid"}`;
      } else {
        this.state.notice = `${task.nct_id}: unexpected outcome ${outcome.status}.`;
      }
    } catch (error) {
      this.inFlight = false;
      this.state.phase = "task"; // keep the task; the user may retry
      this.state.errorMessage = String(error);
      this.emit();
      return;
    }
    this.inFlight = false;
    this.state.task = null;
    await this.refreshStats();
    await this.loadNext();
  }

  async refreshStats(): Promise<void> {
    try {
      this.state.stats = await this.api.stats();
      this.state.statsStale = false;
    } catch {
      this.state.statsStale = true; // stale panel is tolerated, not fatal
    }
    this.emit();
  }
}
