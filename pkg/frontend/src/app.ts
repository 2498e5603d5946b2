/** Controller: start screen, service calls, and re-rendering.
 *
 * The only durable client state is the session id (plus the last state
 * document and the client handle needed to reach the service); every render
 * is recomputed from the latest document.
 */

import { ApiError, Client } from "./api.js";
import { renderBoard, renderError } from "./render.js";
import { MalformedState, SessionState } from "./types.js";

const DEFAULT_BASE = "http://127.0.0.1:8000";

export class App {
  private client: Client | null = null;
  private state: SessionState | null = null;
  private pending = false;
  private message = "";

  constructor(private readonly doc: Document,
              private readonly root: HTMLElement,
              private readonly makeClient: (base: string) => Client
                = (base) => new Client(base)) {}

  start(): void {
    this.renderStart();
  }

  // -- start screen --------------------------------------------------------

  private renderStart(error?: string): void {
    const doc = this.doc;
    this.root.replaceChildren();
    const form = doc.createElement("form");
    form.className = "start";

    const heading = doc.createElement("h1");
    heading.textContent = "Study plan builder";
    form.appendChild(heading);

    if (error) form.appendChild(renderError(doc, error));

    const base = doc.createElement("input");
    base.className = "base";
    base.type = "text";
    base.value = DEFAULT_BASE;
    form.appendChild(labelled(doc, "Service URL", base));

    const instance = doc.createElement("textarea");
    instance.className = "instance";
    instance.rows = 12;
    instance.placeholder = "Paste a regulation file, or load one below.";
    form.appendChild(labelled(doc, "Regulation", instance));

    const file = doc.createElement("input");
    file.className = "upload";
    file.type = "file";
    file.addEventListener("change", () => {
      const chosen = file.files?.[0];
      if (chosen) {
        void chosen.text().then((text) => { instance.value = text; });
      }
    });
    form.appendChild(labelled(doc, "Load from file", file));

    const horizon = doc.createElement("input");
    horizon.className = "horizon";
    horizon.type = "number";
    horizon.min = "1";
    horizon.value = "4";
    form.appendChild(labelled(doc, "Semesters", horizon));

    const submit = doc.createElement("button");
    submit.type = "submit";
    submit.textContent = "Start session";
    form.appendChild(submit);

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createSession(base.value.replace(/\/+$/, ""),
                              instance.value, Number(horizon.value));
    });
    this.root.appendChild(form);
  }

  private async createSession(base: string, instance: string,
                              horizon: number): Promise<void> {
    this.client = this.makeClient(base);
    try {
      this.state = await this.client.createSession(instance, horizon);
    } catch (err) {
      this.renderStart(describe(err));
      return;
    }
    this.message = "";
    this.renderBoardView();
  }

  // -- board ----------------------------------------------------------------

  private renderBoardView(): void {
    if (this.state === null) return;
    this.root.replaceChildren();
    if (this.message) {
      this.root.appendChild(renderError(this.doc, this.message));
    }
    this.root.appendChild(renderBoard(this.doc, this.state, {
      onSelect: (module, semester) =>
        void this.mutate((c, id) => c.addAssumption(id, module, semester)),
      onRemove: (module, semester) =>
        void this.mutate((c, id) => c.removeAssumption(id, module, semester)),
      onNext: () => void this.mutate((c, id) => c.next(id)),
      onReset: () => void this.mutate((c, id) => c.reset(id)),
    }));
    if (this.pending) {
      for (const control of
           this.root.querySelectorAll<HTMLButtonElement>("button, select")) {
        control.disabled = true;
      }
    }
  }

  /** Run one service mutation; controls are disabled while it is in
   * flight, and a rejected call leaves the displayed state untouched. */
  private async mutate(
      action: (client: Client, id: string) => Promise<SessionState>):
      Promise<void> {
    if (this.pending || this.client === null || this.state === null) return;
    this.pending = true;
    this.message = "";
    this.renderBoardView();
    try {
      this.state = await action(this.client, this.state.id);
    } catch (err) {
      this.message = describe(err);
    } finally {
      this.pending = false;
      this.renderBoardView();
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError || err instanceof MalformedState) {
    return err.message;
  }
  return `service unreachable: ${String(err)}`;
}

function labelled(doc: Document, text: string,
                  control: HTMLElement): HTMLElement {
  const wrapper = doc.createElement("label");
  const caption = doc.createElement("span");
  caption.textContent = text;
  wrapper.appendChild(caption);
  wrapper.appendChild(control);
  return wrapper;
}
