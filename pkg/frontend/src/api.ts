import type { HistogramDoc, LayoutDoc, NodeDetailDoc, ViewStateDoc } from "./types.js";
import { validateLayout } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let message = `${response.status}`;
  try {
    const body = (await response.json()) as { error?: { message?: string } };
    if (body.error?.message) message = body.error.message;
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(response.status, message);
}

/**
 * Typed client for the session service. Mutating calls are funneled through
 * a queue so at most one is in flight per session; reads pass straight
 * through.
 */
export class ApiClient {
  private mutationChain: Promise<unknown> = Promise.resolve();

  constructor(public baseUrl: string, private fetchImpl: typeof fetch = fetch) {}

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return response;
  }

  private mutate<T>(run: () => Promise<T>): Promise<T> {
    const next = this.mutationChain.then(run, run);
    this.mutationChain = next.catch(() => undefined);
    return next;
  }

  async createSession(body: Record<string, unknown> = {}): Promise<string> {
    const response = await this.request("POST", "/sessions", body);
    const doc = (await response.json()) as { sessionId: string };
    return doc.sessionId;
  }

  async layout(sessionId: string): Promise<LayoutDoc> {
    const response = await this.request("GET", `/sessions/${sessionId}/layout`);
    return validateLayout(await response.json());
  }

  async histogram(sessionId: string, bins?: number, lo?: number, hi?: number): Promise<HistogramDoc> {
    const params = new URLSearchParams();
    if (bins !== undefined) params.set("bins", String(bins));
    if (lo !== undefined) params.set("lo", String(lo));
    if (hi !== undefined) params.set("hi", String(hi));
    const suffix = params.size ? `?${params}` : "";
    const response = await this.request("GET", `/sessions/${sessionId}/histogram${suffix}`);
    return (await response.json()) as HistogramDoc;
  }

  collapse(sessionId: string, path: string): Promise<LayoutDoc> {
    return this.mutate(async () => {
      const response = await this.request("POST", `/sessions/${sessionId}/collapse`, { path });
      return validateLayout(await response.json());
    });
  }

  setRange(sessionId: string, lo: number, hi: number): Promise<LayoutDoc> {
    return this.mutate(async () => {
      const response = await this.request("POST", `/sessions/${sessionId}/range`, { lo, hi });
      return validateLayout(await response.json());
    });
  }

  setEncoding(
    sessionId: string,
    encoding: { primary?: string; secondary?: string; colorMap?: string; inverted?: boolean },
  ): Promise<LayoutDoc> {
    return this.mutate(async () => {
      const response = await this.request("POST", `/sessions/${sessionId}/encoding`, encoding);
      return validateLayout(await response.json());
    });
  }

  async nodeDetail(sessionId: string, path: string): Promise<NodeDetailDoc> {
    const response = await this.request("GET", `/sessions/${sessionId}/node/${path}`);
    return (await response.json()) as NodeDetailDoc;
  }

  /** Raw body of the query export; the popup shows the query field verbatim. */
  async exportQueryRaw(sessionId: string): Promise<string> {
    const response = await this.request("GET", `/sessions/${sessionId}/query`);
    return response.text();
  }

  async viewState(sessionId: string): Promise<ViewStateDoc> {
    const response = await this.request("GET", `/sessions/${sessionId}/viewstate`);
    return (await response.json()) as ViewStateDoc;
  }
}
