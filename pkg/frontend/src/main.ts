/** DOM bootstrap: wires the controller to the static page.
 *
 * State that identifies a view (search query, browse page offset) lives
 * in URL parameters so links are shareable; the scholar token never
 * leaves the controller. The API base URL can be overridden with a
 * `<meta name="api-base" content="...">` tag for serving the UI from a
 * different origin than the service.
 */

import { ApiClient } from "./api.js";
import {
  renderBrowseTable,
  renderClassifyCard,
  renderEntryCard,
  renderNotFoundConfirm,
  renderRetryableError,
  renderSourceUnavailable,
  escapeHtml,
} from "./card.js";
import { App, type SearchView } from "./state.js";
import { t } from "./strings.js";
import { FEATURE_CATALOG, type Verdict } from "./types.js";

function apiBase(): string {
  const meta = document.querySelector('meta[name="api-base"]');
  return meta?.getAttribute("content") ?? "";
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function renderSearchView(view: SearchView): string {
  switch (view.kind) {
    case "idle":
      return "";
    case "invalid-query":
      return `<p class="invalid-query">${escapeHtml(view.message)}</p>`;
    case "entry-card":
      return renderEntryCard(view.entry);
    case "classify-card":
      return renderClassifyCard(view.result);
    case "confirm-classify":
      return renderNotFoundConfirm(view.query);
    case "not-found":
      return `<p class="not-found">${escapeHtml(view.message)}</p>`;
    case "retryable-error":
      return renderRetryableError(view.message);
    case "source-unavailable":
      return renderSourceUnavailable();
  }
}

function setUrlParams(params: Record<string, string | null>): void {
  const url = new URL(window.location.href);
  for (const [key, value] of Object.entries(params)) {
    if (value === null) {
      url.searchParams.delete(key);
    } else {
      url.searchParams.set(key, value);
    }
  }
  history.replaceState(null, "", url.toString());
}

function renderEditorForm(): string {
  const groups: Record<string, string[]> = { High: [], Low: [], Neutral: [] };
  FEATURE_CATALOG.forEach((feature, index) => {
    groups[feature.priority].push(
      `<label class="feature-checkbox">` +
        `<input type="checkbox" name="feature" data-index="${index}"> ` +
        `${escapeHtml(feature.name)}</label>`,
    );
  });
  const sections = (["High", "Low", "Neutral"] as const)
    .map(
      (priority) =>
        `<fieldset class="priority-group priority-${priority}">` +
        `<legend>${t(`priority_${priority}` as const)}</legend>` +
        groups[priority].join("") +
        `</fieldset>`,
    )
    .join("");
  return (
    `<h3>${t("editor_title")}</h3>` +
    `<label>${t("browse_col_ticker")} <input id="edit-ticker"></label>` +
    `<label>${t("editor_verdict")} <select id="edit-verdict">` +
    `<option value="Halal">${t("verdict_halal")}</option>` +
    `<option value="Haram">${t("verdict_haram")}</option></select></label>` +
    `<label>${t("editor_verdict_text")} <input id="edit-text"></label>` +
    `<div id="edit-features"><h4>${t("editor_features")}</h4>${sections}</div>` +
    `<button id="edit-save">${t("editor_save")}</button>` +
    `<p id="edit-status"></p>`
  );
}

function collectFeatureValues(container: HTMLElement): number[] {
  const values = new Array<number>(FEATURE_CATALOG.length).fill(0);
  container
    .querySelectorAll<HTMLInputElement>('input[name="feature"]')
    .forEach((box) => {
      const index = Number(box.dataset.index);
      values[index] = box.checked ? 1 : 0;
    });
  return values;
}

export function bootstrap(): void {
  const app = new App(new ApiClient({ baseUrl: apiBase() }));
  const searchInput = byId<HTMLInputElement>("search-input");
  const resultBox = byId<HTMLDivElement>("search-result");
  const browseBox = byId<HTMLDivElement>("browse-box");
  const scholarBox = byId<HTMLDivElement>("scholar-box");

  function showView(view: SearchView): void {
    resultBox.innerHTML = renderSearchView(view);
    if (view.kind === "confirm-classify") {
      resultBox
        .querySelector(".confirm-classify")
        ?.addEventListener("click", async () => {
          showView(await app.confirmClassify(view.query));
        });
      resultBox
        .querySelector(".cancel-classify")
        ?.addEventListener("click", () => showView(app.cancelClassify()));
    }
    if (view.kind === "retryable-error") {
      resultBox.querySelector(".retry")?.addEventListener("click", async () => {
        showView(await view.retry());
      });
    }
  }

  async function runSearch(query: string): Promise<void> {
    setUrlParams({ q: query || null });
    showView(await app.search(query));
  }

  byId<HTMLButtonElement>("search-button").addEventListener("click", () => {
    void runSearch(searchInput.value);
  });
  searchInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void runSearch(searchInput.value);
    }
  });

  async function showBrowse(offset: number): Promise<void> {
    setUrlParams({ page: offset > 0 ? String(offset) : null });
    const page = await app.browse(offset);
    browseBox.innerHTML = `<h3>${t("browse_title")}</h3>` + renderBrowseTable(page);
    browseBox.querySelector(".browse-next")?.addEventListener("click", (ev) => {
      const next = Number((ev.target as HTMLElement).dataset.offset);
      void showBrowse(next);
    });
  }

  function showScholar(): void {
    if (app.session === null) {
      scholarBox.innerHTML =
        `<h3>${t("login_title")}</h3>` +
        (app.sessionExpired
          ? `<p class="warning">${t("session_expired")}</p>`
          : "") +
        `<label>${t("login_id")} <input id="login-id"></label>` +
        `<label>${t("login_password")} <input id="login-password" type="password"></label>` +
        `<button id="login-button">${t("login_button")}</button>` +
        `<p id="login-status"></p>`;
      byId<HTMLButtonElement>("login-button").addEventListener("click", async () => {
        const ok = await app.login(
          byId<HTMLInputElement>("login-id").value,
          byId<HTMLInputElement>("login-password").value,
        );
        if (!ok) {
          byId<HTMLParagraphElement>("login-status").textContent =
            t("login_failed");
          return;
        }
        showScholar();
      });
      return;
    }

    scholarBox.innerHTML =
      renderEditorForm() +
      `<button id="logout-button">${t("logout_button")}</button>`;
    if (app.draft !== null) {
      byId<HTMLInputElement>("edit-ticker").value = app.draft.ticker;
      byId<HTMLSelectElement>("edit-verdict").value = app.draft.body.verdict;
      byId<HTMLInputElement>("edit-text").value =
        app.draft.body.verdict_text ?? "";
    }
    byId<HTMLButtonElement>("edit-save").addEventListener("click", async () => {
      const draft = {
        ticker: byId<HTMLInputElement>("edit-ticker").value.trim(),
        body: {
          verdict: byId<HTMLSelectElement>("edit-verdict").value as Verdict,
          verdict_text: byId<HTMLInputElement>("edit-text").value || undefined,
          features: collectFeatureValues(byId<HTMLDivElement>("edit-features")),
        },
      };
      const saved = await app.saveDraft(draft);
      if (saved === null) {
        showScholar(); // session expired: back to login, draft kept
        return;
      }
      byId<HTMLParagraphElement>("edit-status").textContent =
        `${t("editor_saved")} ${saved.revision}`;
      void showBrowse(0);
    });
    byId<HTMLButtonElement>("logout-button").addEventListener("click", () => {
      app.logout();
      showScholar();
    });
  }

  const params = new URL(window.location.href).searchParams;
  const initialQuery = params.get("q");
  if (initialQuery) {
    searchInput.value = initialQuery;
    void runSearch(initialQuery);
  }
  void showBrowse(Number(params.get("page") ?? "0") || 0);
  showScholar();
}

bootstrap();
