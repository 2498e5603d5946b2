/** Pure DOM construction from a session state document.
 *
 * Nothing in here talks to the network or keeps state: the board is a
 * function of the latest document, and interaction is delegated through the
 * handler callbacks.  The explicit `doc` parameter keeps the module usable
 * under a synthetic DOM in tests.
 */

import { AssignedEntry, SessionState } from "./types.js";

export interface Handlers {
  onSelect(module: string, semester: number): void;
  onRemove(module: string, semester: number): void;
  onNext(): void;
  onReset(): void;
}

const PLACEHOLDER = "Assign module";

/** Box height in pixels, proportional to the module's credits. */
export function boxHeight(credits: number | null): number {
  return Math.max(24, (credits ?? 0) * 8);
}

export function renderError(doc: Document, message: string): HTMLElement {
  const banner = doc.createElement("div");
  banner.className = "banner error";
  banner.textContent = message;
  return banner;
}

function creditTable(state: SessionState): Map<string, number | null> {
  return new Map(state.modules.map((m) => [m.name, m.credits]));
}

function userAssignments(state: SessionState): Set<string> {
  return new Set(state.assumptions
    .filter((a) => a.polarity === "assigned")
    .map((a) => `${a.module}@${a.semester}`));
}

function renderBox(doc: Document, entry: AssignedEntry, semester: number,
                   handlers: Handlers): HTMLElement {
  const box = doc.createElement("div");
  box.className = `box ${entry.source}`;
  box.dataset.module = entry.module;
  box.dataset.semester = String(semester);
  box.style.height = `${boxHeight(entry.credits)}px`;
  const label = doc.createElement("span");
  label.className = "label";
  label.textContent = entry.credits === null
    ? entry.module : `${entry.module} (${entry.credits})`;
  box.appendChild(label);
  if (entry.source === "user") {
    const remove = doc.createElement("button");
    remove.className = "remove";
    remove.type = "button";
    remove.textContent = "x";
    remove.title = `Remove ${entry.module} from semester ${semester}`;
    remove.addEventListener("click", () =>
      handlers.onRemove(entry.module, semester));
    box.appendChild(remove);
  }
  return box;
}

/** The boxes of one column: the browsed plan while browsing, otherwise the
 * forced assignments the service reports. */
function columnEntries(state: SessionState, index: number): AssignedEntry[] {
  if (state.browsing && state.current_plan !== null) {
    const credits = creditTable(state);
    const user = userAssignments(state);
    return state.current_plan[index - 1].map((module) => ({
      module,
      credits: credits.get(module) ?? null,
      source: user.has(`${module}@${index}`) ? "user" : "inferred",
    }));
  }
  return state.semesters[index - 1].assigned;
}

function renderColumn(doc: Document, state: SessionState, index: number,
                      handlers: Handlers): HTMLElement {
  const semester = state.semesters[index - 1];
  const column = doc.createElement("section");
  column.className = "column";
  column.dataset.semester = String(index);

  const title = doc.createElement("header");
  title.className = "title";
  title.textContent =
    `Semester ${index} (${index % 2 === 1 ? "winter" : "summer"})`;
  column.appendChild(title);

  const boxes = doc.createElement("div");
  boxes.className = "boxes";
  for (const entry of columnEntries(state, index)) {
    boxes.appendChild(renderBox(doc, entry, index, handlers));
  }
  column.appendChild(boxes);

  // The dropdown mirrors the served possible-minus-forced set exactly.
  const select = doc.createElement("select");
  select.className = "assign";
  select.disabled = !state.satisfiable || semester.options.length === 0;
  const placeholder = doc.createElement("option");
  placeholder.value = "";
  placeholder.textContent = PLACEHOLDER;
  placeholder.disabled = true;
  placeholder.selected = true;
  select.appendChild(placeholder);
  for (const module of semester.options) {
    const option = doc.createElement("option");
    option.value = module;
    option.textContent = module;
    select.appendChild(option);
  }
  select.addEventListener("change", () => {
    if (select.value !== "") handlers.onSelect(select.value, index);
  });
  column.appendChild(select);

  if (semester.unknown.length > 0) {
    const note = doc.createElement("p");
    note.className = "unknown";
    note.textContent = `undecided: ${semester.unknown.join(" ")}`;
    column.appendChild(note);
  }
  return column;
}

export function renderBoard(doc: Document, state: SessionState,
                            handlers: Handlers): HTMLElement {
  const board = doc.createElement("div");
  board.className = "board";

  const toolbar = doc.createElement("div");
  toolbar.className = "toolbar";
  const next = doc.createElement("button");
  next.className = "next";
  next.type = "button";
  next.textContent = "Next";
  next.disabled = !state.satisfiable;
  next.addEventListener("click", () => handlers.onNext());
  toolbar.appendChild(next);
  const reset = doc.createElement("button");
  reset.className = "reset";
  reset.type = "button";
  reset.textContent = "Reset";
  reset.addEventListener("click", () => handlers.onReset());
  toolbar.appendChild(reset);
  const status = doc.createElement("span");
  status.className = "status";
  status.textContent = state.browsing
    ? "browsing one admissible plan"
    : state.satisfiable ? "showing forced assignments" : "";
  toolbar.appendChild(status);
  board.appendChild(toolbar);

  if (!state.satisfiable) {
    board.appendChild(renderError(
      doc, "No admissible plan satisfies the current assumptions."));
  }
  if (!state.complete) {
    const note = doc.createElement("div");
    note.className = "banner warning";
    note.textContent =
      "Search budget exhausted: some cells are reported as undecided.";
    board.appendChild(note);
  }

  const columns = doc.createElement("div");
  columns.className = "columns";
  for (let index = 1; index <= state.horizon; index += 1) {
    columns.appendChild(renderColumn(doc, state, index, handlers));
  }
  board.appendChild(columns);
  return board;
}
