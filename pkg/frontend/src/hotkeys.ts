// Keyboard shortcuts: 1/2/3 map to Yes/No/Undecided. Throughput matters in
// multi-thousand-item sessions, so labeling never requires the mouse.

import { Choice } from "./api";

export const KEY_BINDINGS: Record<string, Choice> = {
  "1": "Yes",
  "2": "No",
  "3": "Undecided",
};

export function installHotkeys(
  target: { addEventListener: Window["addEventListener"] },
  onChoice: (choice: Choice) => void,
  signal?: AbortSignal,
): void {
  target.addEventListener(
    "keydown",
    (event: Event) => {
      const key = (event as KeyboardEvent).key;
      const choice = KEY_BINDINGS[key];
      if (!choice) return;
      const active = (event.target as HTMLElement | null)?.tagName;
      if (active === "INPUT" || active === "TEXTAREA") return; // typing, not labeling
      event.preventDefault();
      onChoice(choice);
    },
    { signal },
  );
}
