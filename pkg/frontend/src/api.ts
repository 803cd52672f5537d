import type { JudgmentAck, NextView, ProgressPayload, Verdict } from "./types";

/** Service-reported failure: carries the error code from the response body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** fetch() itself failed: server down, DNS, CORS. Worth a retry prompt. */
export class NetworkError extends Error {}

export interface Api {
  next(): Promise<NextView>;
  submit(itemId: string, blindLabel: string, verdict: Verdict): Promise<JudgmentAck>;
  progress(): Promise<ProgressPayload>;
}

export class ServiceClient implements Api {
  constructor(
    private readonly baseUrl: string,
    private readonly projectId: string,
    private readonly token: string,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const url = `${this.baseUrl}/projects/${encodeURIComponent(this.projectId)}${path}`;
    let response: Response;
    try {
      response = await fetch(url, {
        ...init,
        headers: {
          Authorization: `Bearer ${this.token}`,
          ...(init?.body ? { "Content-Type": "application/json" } : {}),
        },
      });
    } catch (cause) {
      throw new NetworkError(`cannot reach ${this.baseUrl}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // fall through; non-JSON bodies only accompany errors
    }
    if (!response.ok) {
      const err = (body ?? {}) as { code?: string; message?: string };
      throw new ApiError(
        response.status,
        err.code ?? "unknown",
        err.message ?? `request failed with status ${response.status}`,
      );
    }
    return body;
  }

  next(): Promise<NextView> {
    return this.request("/next") as Promise<NextView>;
  }

  submit(itemId: string, blindLabel: string, verdict: Verdict): Promise<JudgmentAck> {
    return this.request("/judgments", {
      method: "POST",
      body: JSON.stringify({ item_id: itemId, blind_label: blindLabel, verdict }),
    }) as Promise<JudgmentAck>;
  }

  progress(): Promise<ProgressPayload> {
    return this.request("/progress") as Promise<ProgressPayload>;
  }
}
