/** Thin typed client for the session endpoints; every call resolves to the
 * full state document the service returns. */

import { SessionState, validateState } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: unknown) {
    super(ApiError.describe(status, detail));
  }

  /** Human-readable form of a structured error detail. */
  static describe(status: number, detail: unknown): string {
    if (typeof detail === "string") return detail;
    if (typeof detail === "object" && detail !== null) {
      const d = detail as Record<string, unknown>;
      if (d.error === "parse") {
        return `parse error at line ${d.line}, column ${d.col}: ${d.message}`;
      }
      if (d.error === "wellformedness" && Array.isArray(d.violations)) {
        const parts = d.violations.map(
          (v) => `${(v as { where: string }).where}: ` +
                 `${(v as { reason: string }).reason}`);
        return `instance is not well-formed — ${parts.join("; ")}`;
      }
    }
    return `request failed with status ${status}`;
  }
}

export class Client {
  constructor(readonly base: string,
              private readonly fetchFn: typeof fetch = fetch) {}

  private async request(path: string, init?: RequestInit):
      Promise<SessionState> {
    const response = await this.fetchFn(this.base + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status,
                         (body as { detail?: unknown }).detail ?? body);
    }
    return validateState(body);
  }

  createSession(instance: string, horizon: number): Promise<SessionState> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ instance, horizon }),
    });
  }

  state(id: string): Promise<SessionState> {
    return this.request(`/sessions/${id}`);
  }

  addAssumption(id: string, module: string, semester: number):
      Promise<SessionState> {
    return this.request(`/sessions/${id}/assumptions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ module, semester }),
    });
  }

  removeAssumption(id: string, module: string, semester: number):
      Promise<SessionState> {
    return this.request(`/sessions/${id}/assumptions/${module}/${semester}`,
                        { method: "DELETE" });
  }

  next(id: string): Promise<SessionState> {
    return this.request(`/sessions/${id}/next`, { method: "POST" });
  }

  reset(id: string): Promise<SessionState> {
    return this.request(`/sessions/${id}/reset`, { method: "POST" });
  }
}
