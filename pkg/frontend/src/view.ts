// DOM rendering. The statement text is always set through textContent so the
// rendered string stays byte-identical to the service payload, whatever
// markup-looking characters it contains.

import { Choice } from "./api";
import { SessionState } from "./session";

export interface ViewElements {
  annotatorForm: HTMLFormElement;
  annotatorInput: HTMLInputElement;
  taskSection: HTMLElement;
  taskId: HTMLElement;
  taskText: HTMLElement;
  countdown: HTMLElement;
  buttons: Record<Choice, HTMLButtonElement>;
  notice: HTMLElement;
  errorBanner: HTMLElement;
  doneScreen: HTMLElement;
  doneSummary: HTMLElement;
  progressBar: HTMLElement;
  progressText: HTMLElement;
  distribution: HTMLElement;
  agreementText: HTMLElement;
  sessionCounter: HTMLElement;
  statsPanel: HTMLElement;
}

export function bindElements(root: Document | HTMLElement): ViewElements {
  const get = <T extends HTMLElement>(id: string): T => {
    const found = (root instanceof Document ? root : root.ownerDocument).getElementById(id);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
  };
  return {
    annotatorForm: get<HTMLFormElement>("annotator-form"),
    annotatorInput: get<HTMLInputElement>("annotator-input"),
    taskSection: get("task-section"),
    taskId: get("task-id"),
    taskText: get("task-text"),
    countdown: get("lease-countdown"),
    buttons: {
      Yes: get<HTMLButtonElement>("choice-yes"),
      No: get<HTMLButtonElement>("choice-no"),
      Undecided: get<HTMLButtonElement>("choice-undecided"),
    },
    notice: get("notice"),
    errorBanner: get("error-banner"),
    doneScreen: get("done-screen"),
    doneSummary: get("done-summary"),
    progressBar: get("progress-bar"),
    progressText: get("progress-text"),
    distribution: get("distribution"),
    agreementText: get("agreement-text"),
    sessionCounter: get("session-counter"),
    statsPanel: get("stats-panel"),
  };
}

function show(element: HTMLElement, visible: boolean): void {
  element.hidden = !visible;
}

export function render(elements: ViewElements, state: SessionState): void {
  show(elements.annotatorForm, state.phase === "idle");
  show(elements.taskSection, state.phase === "task" || state.phase === "submitting");
  show(elements.doneScreen, state.phase === "done");
  show(elements.errorBanner, state.errorMessage !== null);
  show(elements.notice, state.notice !== null);

  elements.notice.textContent = state.notice ?? "";
  elements.errorBanner.textContent =
    state.errorMessage === null ? "" : `${state.errorMessage} (retry with Reload Task)`;
  elements.sessionCounter.textContent = String(state.labelsSubmittedThisSession);

  if (state.task !== null) {
    elements.taskId.textContent = state.task.nct_id;
    elements.taskText.textContent = state.task.dss_text;
    elements.countdown.textContent = `${Math.ceil(state.task.lease_remaining_seconds)}s`;
  } else {
    elements.taskId.textContent = "";
    elements.taskText.textContent = "";
    elements.countdown.textContent = "";
  }

  const busy = state.phase !== "task";
  for (const button of Object.values(elements.buttons)) {
    button.disabled = busy;
  }

  renderStats(elements, state);
  if (state.phase === "done" && state.stats !== null) {
    const d = state.stats.distribution;
    elements.doneSummary.textContent =
      `All ${state.stats.total} statements are labeled ` +
      `(Yes ${d.yes_count}, No ${d.no_count}, Undecided ${d.undecided_count}).`;
  }
}

function renderStats(elements: ViewElements, state: SessionState): void {
  elements.statsPanel.classList.toggle("stale", state.statsStale);
  if (state.stats === null) {
    elements.progressText.textContent = "no stats yet";
    return;
  }
  const { total, labeled, distribution, agreement } = state.stats;
  const percent = total === 0 ? 0 : Math.round((100 * labeled) / total);
  elements.progressBar.style.width = `${percent}%`;
  elements.progressBar.setAttribute("aria-valuenow", String(percent));
  elements.progressText.textContent = `${labeled} / ${total} labeled (${percent}%)`;

  const parts = [
    `Yes ${distribution.yes_count}`,
    `No ${distribution.no_count}`,
    `Undecided ${distribution.undecided_count}`,
  ];
  elements.distribution.textContent = parts.join(" · ");
  elements.agreementText.textContent =
    agreement.total === 0
      ? "agreement: n/a"
      : `agreement with registry category: ${agreement.agree_count}/${agreement.total}` +
        ` (${(100 * agreement.agree_fraction).toFixed(1)}%)`;
}
