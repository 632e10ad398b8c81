// Application bootstrap: wires the API client, session, view, and hotkeys to
// the static page served by `dss annotate-serve`.

import { AnnotationApi, Choice } from "./api";
import { installHotkeys } from "./hotkeys";
import { AnnotationSession } from "./session";
import { bindElements, render } from "./view";

export interface AppHandle {
  session: AnnotationSession;
  dispose: () => void; // detach listeners and the countdown timer
}

export function bootstrap(doc: Document, win: Window, baseUrl = ""): AppHandle {
  const elements = bindElements(doc);
  const api = new AnnotationApi(baseUrl);
  const session = new AnnotationSession(api, {
    onChange: (state) => render(elements, state),
  });
  const aborter = new AbortController();
  const { signal } = aborter;

  elements.annotatorForm.addEventListener(
    "submit",
    (event) => {
      event.preventDefault();
      const annotator = elements.annotatorInput.value.trim();
      if (!annotator) return;
      win.localStorage.setItem("dss-annotator", annotator);
      void session.start(annotator);
    },
    { signal },
  );

  const remembered = win.localStorage.getItem("dss-annotator");
  if (remembered) {
    elements.annotatorInput.value = remembered;
  }

  const choose = (choice: Choice) => void session.submit(choice);
  for (const [choice, button] of Object.entries(elements.buttons)) {
    button.addEventListener("click", () => choose(choice as Choice), { signal });
  }
  installHotkeys(win, choose, signal);

  const reload = doc.getElementById("reload-task");
  reload?.addEventListener("click", () => void session.loadNext(), { signal });

  const timer = win.setInterval(() => session.tick(), 500);
  render(elements, session.state);
  return {
    session,
    dispose: () => {
      win.clearInterval(timer);
      aborter.abort();
    },
  };
}

if (typeof document !== "undefined" && document.getElementById("annotator-form")) {
  bootstrap(document, window);
}
