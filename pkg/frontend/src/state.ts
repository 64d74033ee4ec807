/** Application controller: search, browse, and scholar session flows.
 *
 * Holds no DOM references so the flows can be unit-tested against a
 * fake Api and e2e-tested against the live service. The scholar token
 * lives only in this object (memory), never in storage, and a 401
 * mid-edit keeps the draft so nothing typed is lost.
 */

import { ApiError, NetworkError, type Api } from "./api.js";
import { t } from "./strings.js";
import type {
  ClassifyResponse,
  RulingDraftBody,
  RulingEntry,
  RulingsPage,
} from "./types.js";

export type SearchView =
  | { kind: "idle" }
  | { kind: "invalid-query"; message: string }
  | { kind: "entry-card"; entry: RulingEntry }
  | { kind: "confirm-classify"; query: string }
  | { kind: "classify-card"; result: ClassifyResponse }
  | { kind: "not-found"; message: string }
  | { kind: "retryable-error"; message: string; retry: () => Promise<SearchView> }
  | { kind: "source-unavailable"; message: string };

export interface ScholarSession {
  scholarId: string;
  token: string;
  expiresAt: string;
}

export interface EditorDraft {
  ticker: string;
  body: RulingDraftBody;
}

export class App {
  view: SearchView = { kind: "idle" };
  page: RulingsPage | null = null;
  session: ScholarSession | null = null;
  draft: EditorDraft | null = null;
  sessionExpired = false;
  lastSaved: RulingEntry | null = null;

  constructor(private readonly api: Api) {}

  /** Look the query up in the store; fall back to offering a classify. */
  async search(rawQuery: string): Promise<SearchView> {
    const query = rawQuery.trim();
    if (!query) {
      this.view = { kind: "invalid-query", message: t("search_empty_query") };
      return this.view;
    }
    try {
      const entry = await this.api.getRuling(query);
      this.view = { kind: "entry-card", entry };
    } catch (err) {
      this.view = this.searchFailure(err, query);
    }
    return this.view;
  }

  private searchFailure(err: unknown, query: string): SearchView {
    if (err instanceof ApiError && err.status === 404) {
      return { kind: "confirm-classify", query };
    }
    return this.transportFailure(err, () => this.search(query));
  }

  /** The user confirmed "classify now?" on an unknown coin. */
  async confirmClassify(query: string): Promise<SearchView> {
    try {
      const result = await this.api.classify(query);
      this.view = { kind: "classify-card", result };
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.view = { kind: "not-found", message: err.detail };
      } else if (err instanceof ApiError && err.status === 502) {
        this.view = { kind: "source-unavailable", message: err.detail };
      } else {
        this.view = this.transportFailure(err, () => this.confirmClassify(query));
      }
    }
    return this.view;
  }

  cancelClassify(): SearchView {
    this.view = { kind: "idle" };
    return this.view;
  }

  private transportFailure(
    err: unknown,
    retry: () => Promise<SearchView>,
  ): SearchView {
    if (err instanceof NetworkError) {
      return { kind: "retryable-error", message: t("error_network"), retry };
    }
    if (err instanceof ApiError) {
      return { kind: "retryable-error", message: err.detail, retry };
    }
    throw err;
  }

  async browse(offset = 0, limit = 50): Promise<RulingsPage> {
    this.page = await this.api.listRulings(offset, limit);
    return this.page;
  }

  async nextPage(): Promise<RulingsPage | null> {
    if (this.page === null || this.page.next_offset === null) {
      return null;
    }
    return this.browse(this.page.next_offset);
  }

  async login(id: string, password: string): Promise<boolean> {
    try {
      const response = await this.api.login(id, password);
      this.session = {
        scholarId: id,
        token: response.token,
        expiresAt: response.expires_at,
      };
      this.sessionExpired = false;
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) {
        this.session = null;
        return false;
      }
      throw err;
    }
  }

  logout(): void {
    this.session = null;
    this.sessionExpired = false;
  }

  /** Save the editor draft. On an expired/invalid token the draft is
   * preserved and the caller should show the re-login prompt. */
  async saveDraft(draft: EditorDraft): Promise<RulingEntry | null> {
    this.draft = draft;
    if (this.session === null) {
      this.sessionExpired = true;
      return null;
    }
    try {
      const entry = await this.api.putRuling(
        draft.ticker,
        draft.body,
        this.session.token,
      );
      this.lastSaved = entry;
      this.draft = null;
      return entry;
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) {
        this.session = null;
        this.sessionExpired = true;
        return null;
      }
      throw err;
    }
  }
}
