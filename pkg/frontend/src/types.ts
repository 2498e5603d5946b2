/** Shapes of the session state document served by the planning API. */

export type Polarity = "assigned" | "excluded";
export type Source = "user" | "inferred";

export interface AssumptionEntry {
  module: string;
  semester: number;
  polarity: Polarity;
}

export interface AssignedEntry {
  module: string;
  credits: number | null;
  source: Source;
}

export interface SemesterState {
  index: number;
  forced: string[];
  possible: string[];
  /** possible minus forced: the dropdown source set. */
  options: string[];
  assigned: AssignedEntry[];
  unknown: string[];
}

export interface ModuleInfo {
  name: string;
  credits: number | null;
  turnus: "w" | "s" | "e" | null;
}

export interface SessionState {
  id: string;
  horizon: number;
  satisfiable: boolean;
  complete: boolean;
  browsing: boolean;
  current_plan: string[][] | null;
  assumptions: AssumptionEntry[];
  modules: ModuleInfo[];
  semesters: SemesterState[];
}

export class MalformedState extends Error {}

function fail(why: string): never {
  throw new MalformedState(`malformed state document: ${why}`);
}

function stringArray(value: unknown, where: string): string[] {
  if (!Array.isArray(value) || value.some((x) => typeof x !== "string")) {
    fail(`${where} is not an array of strings`);
  }
  return value as string[];
}

/** Check an untrusted document against the schema; throws MalformedState. */
export function validateState(doc: unknown): SessionState {
  if (typeof doc !== "object" || doc === null) fail("not an object");
  const d = doc as Record<string, unknown>;
  if (typeof d.id !== "string") fail("missing id");
  if (typeof d.horizon !== "number" || d.horizon < 1) fail("bad horizon");
  for (const key of ["satisfiable", "complete", "browsing"]) {
    if (typeof d[key] !== "boolean") fail(`missing ${key}`);
  }
  if (d.current_plan !== null) {
    if (!Array.isArray(d.current_plan)) fail("bad current_plan");
    d.current_plan.forEach((sem, i) => stringArray(sem, `current_plan[${i}]`));
  }
  if (!Array.isArray(d.assumptions)) fail("missing assumptions");
  if (!Array.isArray(d.modules)) fail("missing modules");
  if (!Array.isArray(d.semesters)) fail("missing semesters");
  if (d.semesters.length !== d.horizon) fail("semester count != horizon");
  d.semesters.forEach((sem: unknown, i: number) => {
    if (typeof sem !== "object" || sem === null) fail(`semester ${i + 1}`);
    const s = sem as Record<string, unknown>;
    if (s.index !== i + 1) fail(`semester ${i + 1} index`);
    for (const key of ["forced", "possible", "options", "unknown"]) {
      stringArray(s[key], `semester ${i + 1} ${key}`);
    }
    if (!Array.isArray(s.assigned)) fail(`semester ${i + 1} assigned`);
    for (const entry of s.assigned as Record<string, unknown>[]) {
      if (typeof entry.module !== "string" ||
          (entry.source !== "user" && entry.source !== "inferred")) {
        fail(`semester ${i + 1} assigned entry`);
      }
    }
  });
  return doc as SessionState;
}
