/** Typed client for the screening service JSON API.
 *
 * The fetch function is injectable so unit tests can stub transport and
 * the e2e test can count requests. Server-reported failures raise
 * ApiError with the HTTP status and detail string; transport failures
 * raise NetworkError so callers can offer a retry.
 */

import type {
  ClassifyResponse,
  LoginResponse,
  RulingDraftBody,
  RulingEntry,
  RulingsPage,
} from "./types.js";

export interface FetchResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<FetchResponseLike>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`network failure: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

/** The surface the app layer depends on; ApiClient is the real one. */
export interface Api {
  getRuling(query: string): Promise<RulingEntry>;
  listRulings(offset?: number, limit?: number): Promise<RulingsPage>;
  classify(query: string): Promise<ClassifyResponse>;
  login(id: string, password: string): Promise<LoginResponse>;
  putRuling(
    ticker: string,
    draft: RulingDraftBody,
    token: string,
  ): Promise<RulingEntry>;
  deleteMachineRuling(ticker: string, token: string): Promise<void>;
}

export class ApiClient implements Api {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(options: { baseUrl?: string; fetchFn?: FetchLike } = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.fetchFn =
      options.fetchFn ?? (globalThis.fetch.bind(globalThis) as FetchLike);
  }

  private async request(
    method: string,
    path: string,
    body?: unknown,
    token?: string,
  ): Promise<unknown> {
    const headers: Record<string, string> = {};
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    if (token !== undefined) {
      headers["Authorization"] = `Bearer ${token}`;
    }
    let response: FetchResponseLike;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (response.status === 204) {
      return undefined;
    }
    let payload: unknown;
    try {
      payload = await response.json();
    } catch (cause) {
      if (!response.ok) {
        throw new ApiError(response.status, "unreadable error body");
      }
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      const detail =
        payload && typeof payload === "object" && "detail" in payload
          ? String((payload as { detail: unknown }).detail)
          : "unknown error";
      throw new ApiError(response.status, detail);
    }
    return payload;
  }

  getRuling(query: string): Promise<RulingEntry> {
    return this.request(
      "GET",
      `/api/rulings/${encodeURIComponent(query)}`,
    ) as Promise<RulingEntry>;
  }

  listRulings(offset = 0, limit = 50): Promise<RulingsPage> {
    return this.request(
      "GET",
      `/api/rulings?offset=${offset}&limit=${limit}`,
    ) as Promise<RulingsPage>;
  }

  classify(query: string): Promise<ClassifyResponse> {
    return this.request("POST", "/api/classify", {
      query,
    }) as Promise<ClassifyResponse>;
  }

  login(id: string, password: string): Promise<LoginResponse> {
    return this.request("POST", "/api/auth/login", {
      id,
      password,
    }) as Promise<LoginResponse>;
  }

  putRuling(
    ticker: string,
    draft: RulingDraftBody,
    token: string,
  ): Promise<RulingEntry> {
    return this.request(
      "PUT",
      `/api/rulings/${encodeURIComponent(ticker)}`,
      draft,
      token,
    ) as Promise<RulingEntry>;
  }

  async deleteMachineRuling(ticker: string, token: string): Promise<void> {
    await this.request(
      "DELETE",
      `/api/rulings/${encodeURIComponent(ticker)}?provenance=machine`,
      undefined,
      token,
    );
  }
}
