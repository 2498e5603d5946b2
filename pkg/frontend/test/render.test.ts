import { Window } from "happy-dom";
import { describe, expect, it, vi } from "vitest";

import { App } from "../src/app.js";
import { Client } from "../src/api.js";
import { Handlers, boxHeight, renderBoard, renderError } from "../src/render.js";
import { MalformedState, SessionState, validateState } from "../src/types.js";

const win = new Window();
const doc = win.document as unknown as Document;

function domEvent(type: string, init?: EventInit): Event {
  return new win.Event(type, init) as unknown as Event;
}

const noop: Handlers = {
  onSelect: () => undefined,
  onRemove: () => undefined,
  onNext: () => undefined,
  onReset: () => undefined,
};

function makeState(partial: Partial<SessionState> = {}): SessionState {
  return {
    id: "s1",
    horizon: 2,
    satisfiable: true,
    complete: true,
    browsing: false,
    current_plan: null,
    assumptions: [],
    modules: [
      { name: "a", credits: 5, turnus: "e" },
      { name: "b", credits: 5, turnus: "w" },
      { name: "c", credits: 9, turnus: "s" },
    ],
    semesters: [
      {
        index: 1, forced: ["b"], possible: ["a", "b"], options: ["a"],
        assigned: [{ module: "b", credits: 5, source: "inferred" }],
        unknown: [],
      },
      {
        index: 2, forced: [], possible: ["a", "c"], options: ["a", "c"],
        assigned: [], unknown: [],
      },
    ],
    ...partial,
  };
}

function column(board: HTMLElement, semester: number): HTMLElement {
  const found = board.querySelector(`.column[data-semester="${semester}"]`);
  expect(found).not.toBeNull();
  return found as HTMLElement;
}

function optionValues(board: HTMLElement, semester: number): string[] {
  return Array.from(
    column(board, semester).querySelectorAll("select.assign option"))
    .map((o) => (o as HTMLOptionElement).value)
    .filter((value) => value !== "");
}

describe("renderBoard", () => {
  it("builds one titled column per semester", () => {
    const board = renderBoard(doc, makeState(), noop);
    expect(board.querySelectorAll(".column")).toHaveLength(2);
    expect(column(board, 1).querySelector(".title")!.textContent)
      .toBe("Semester 1 (winter)");
    expect(column(board, 2).querySelector(".title")!.textContent)
      .toBe("Semester 2 (summer)");
  });

  it("fills each dropdown with exactly the served options", () => {
    const board = renderBoard(doc, makeState(), noop);
    expect(optionValues(board, 1)).toEqual(["a"]);
    expect(optionValues(board, 2)).toEqual(["a", "c"]);
    const placeholder =
      column(board, 1).querySelector("select.assign option")!;
    expect(placeholder.textContent).toBe("Assign module");
    expect((placeholder as HTMLOptionElement).disabled).toBe(true);
  });

  it("never offers a module already assigned in the same semester", () => {
    const board = renderBoard(doc, makeState(), noop);
    for (const semester of [1, 2]) {
      const assigned = Array.from(
        column(board, semester).querySelectorAll(".box"))
        .map((b) => (b as HTMLElement).dataset.module);
      for (const module of optionValues(board, semester)) {
        expect(assigned).not.toContain(module);
      }
    }
  });

  it("renders inferred boxes without a remove control", () => {
    const board = renderBoard(doc, makeState(), noop);
    const box = column(board, 1)
      .querySelector('.box[data-module="b"]') as HTMLElement;
    expect(box.classList.contains("inferred")).toBe(true);
    expect(box.querySelector(".remove")).toBeNull();
    expect(box.style.height).toBe("40px");
  });

  it("marks user boxes with an x control and sizes by credits", () => {
    const state = makeState({
      assumptions: [{ module: "c", semester: 2, polarity: "assigned" }],
      semesters: [
        makeState().semesters[0],
        {
          index: 2, forced: ["c"], possible: ["a", "c"], options: ["a"],
          assigned: [{ module: "c", credits: 9, source: "user" }],
          unknown: [],
        },
      ],
    });
    const board = renderBoard(doc, state, noop);
    const box = column(board, 2)
      .querySelector('.box[data-module="c"]') as HTMLElement;
    expect(box.classList.contains("user")).toBe(true);
    expect(box.querySelector(".remove")!.textContent).toBe("x");
    expect(box.style.height).toBe("72px");
    expect(boxHeight(null)).toBe(24);
  });

  it("renders empty semesters as title plus dropdown only", () => {
    const board = renderBoard(doc, makeState(), noop);
    const empty = column(board, 2);
    expect(empty.querySelectorAll(".box")).toHaveLength(0);
    expect(empty.querySelector(".title")).not.toBeNull();
    expect(empty.querySelector("select.assign")).not.toBeNull();
  });

  it("shows the browsed plan with x controls only on user choices", () => {
    const state = makeState({
      browsing: true,
      current_plan: [["a", "b"], ["c"]],
      assumptions: [{ module: "c", semester: 2, polarity: "assigned" }],
    });
    const board = renderBoard(doc, state, noop);
    const first = Array.from(column(board, 1).querySelectorAll(".box"))
      .map((b) => (b as HTMLElement).dataset.module);
    expect(first).toEqual(["a", "b"]);
    const planned = column(board, 2)
      .querySelector('.box[data-module="c"]') as HTMLElement;
    expect(planned.classList.contains("user")).toBe(true);
    expect(planned.querySelector(".remove")).not.toBeNull();
    expect(column(board, 1).querySelector(".remove")).toBeNull();
  });

  it("announces unsatisfiable states and disables Next", () => {
    const board = renderBoard(doc, makeState({ satisfiable: false }), noop);
    expect(board.querySelector(".banner.error")!.textContent)
      .toContain("No admissible plan");
    expect((board.querySelector("button.next") as HTMLButtonElement).disabled)
      .toBe(true);
  });

  it("flags incomplete reports and undecided cells", () => {
    const state = makeState({ complete: false });
    state.semesters[0].unknown = ["a"];
    const board = renderBoard(doc, state, noop);
    expect(board.querySelector(".banner.warning")).not.toBeNull();
    expect(column(board, 1).querySelector(".unknown")!.textContent)
      .toContain("a");
  });

  it("routes selection, removal, and next through the handlers", () => {
    const onSelect = vi.fn();
    const onRemove = vi.fn();
    const onNext = vi.fn();
    const state = makeState({
      assumptions: [{ module: "c", semester: 2, polarity: "assigned" }],
      semesters: [
        makeState().semesters[0],
        {
          index: 2, forced: ["c"], possible: ["a", "c"], options: ["a"],
          assigned: [{ module: "c", credits: 9, source: "user" }],
          unknown: [],
        },
      ],
    });
    const board = renderBoard(doc, state, { ...noop, onSelect, onRemove, onNext });

    const select = column(board, 1)
      .querySelector("select.assign") as HTMLSelectElement;
    select.value = "a";
    select.dispatchEvent(domEvent("change"));
    expect(onSelect).toHaveBeenCalledWith("a", 1);

    (column(board, 2).querySelector(".remove") as HTMLElement).click();
    expect(onRemove).toHaveBeenCalledWith("c", 2);

    (board.querySelector("button.next") as HTMLElement).click();
    expect(onNext).toHaveBeenCalledTimes(1);
  });
});

describe("renderError", () => {
  it("produces an error banner with the message", () => {
    const banner = renderError(doc, "boom");
    expect(banner.className).toBe("banner error");
    expect(banner.textContent).toBe("boom");
  });
});

describe("validateState", () => {
  it("accepts a well-shaped document", () => {
    expect(validateState(makeState())).toBeTruthy();
  });

  it("rejects malformed documents", () => {
    expect(() => validateState(null)).toThrow(MalformedState);
    expect(() => validateState({ id: "x" })).toThrow(MalformedState);
    const wrongCount = makeState();
    wrongCount.semesters = [wrongCount.semesters[0]];
    expect(() => validateState(wrongCount)).toThrow("semester count");
    const wrongIndex = makeState();
    wrongIndex.semesters[1] = { ...wrongIndex.semesters[1], index: 7 };
    expect(() => validateState(wrongIndex)).toThrow("index");
  });
});

describe("App", () => {
  const flush = () => new Promise((resolve) => setTimeout(resolve, 0));

  function mount(client: Partial<Client>): HTMLElement {
    const root = doc.createElement("div");
    const app = new App(doc, root, () => client as Client);
    app.start();
    return root;
  }

  function submitStart(root: HTMLElement): void {
    const form = root.querySelector("form.start") as HTMLFormElement;
    form.dispatchEvent(domEvent("submit", { cancelable: true }));
  }

  it("shows the start screen with instance and horizon fields", () => {
    const root = mount({});
    expect(root.querySelector("textarea.instance")).not.toBeNull();
    expect(root.querySelector("input.horizon")).not.toBeNull();
    expect(root.querySelector("input.upload")).not.toBeNull();
  });

  it("swaps to the board when the session is created", async () => {
    const root = mount({
      createSession: async () => makeState(),
    });
    submitStart(root);
    await flush();
    expect(root.querySelector(".board")).not.toBeNull();
    expect(root.querySelectorAll(".column")).toHaveLength(2);
  });

  it("keeps the start screen and reports service errors", async () => {
    const root = mount({
      createSession: async () => {
        throw new Error("connect ECONNREFUSED");
      },
    });
    submitStart(root);
    await flush();
    expect(root.querySelector("form.start")).not.toBeNull();
    expect(root.querySelector(".banner.error")!.textContent)
      .toContain("service unreachable");
  });
});
