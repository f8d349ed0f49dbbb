/**
 * Page controller: owns the ViewState, talks to the API, and re-renders.
 *
 * One search is in flight at a time; every load gets a monotonically
 * increasing id and a response is applied only if it is still the latest,
 * so a newer query can never be overwritten by a stale answer. All state
 * changes go through the URL (pushState), which keeps views reloadable and
 * the back button meaningful.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  ViewState,
  applyFacetClick,
  decodeState,
  encodeState,
  toggleExpanded,
  withQuery,
} from "./state.js";
import { renderBanner, renderFacets, renderResults, renderStatus } from "./render.js";
import { SearchResult } from "./types.js";

/** data- attributes of the closest ancestor carrying the given action. */
function actionTarget(event: Event, action: string): Record<string, string | undefined> | null {
  const target = event.target as Element | null;
  const match = target?.closest?.(`[data-action=${action}]`) as HTMLElement | null;
  return match?.dataset ?? null;
}

export class App {
  private state: ViewState;
  private results: SearchResult[] = [];
  private total = 0;
  private degraded = false;
  private requestId = 0;

  constructor(
    private api: ApiClient,
    private root: Document,
    private history: { pushState(data: unknown, unused: string, url: string): void },
  ) {
    this.state = decodeState(this.root.location?.search ?? "");
  }

  private el(id: string): HTMLElement {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  }

  start(): void {
    const form = this.el("search-form") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const input = this.el("query-input") as HTMLInputElement;
      this.setState(withQuery(this.state, input.value.trim()));
    });
    this.el("facets").addEventListener("click", (event) => {
      const data = actionTarget(event, "facet");
      if (!data) return;
      const facet = data.facet as "dates" | "journals" | "sources" | "authors";
      this.setState(applyFacetClick(this.state, facet, data.value ?? ""));
    });
    this.el("results").addEventListener("click", (event) => {
      const data = actionTarget(event, "toggle");
      if (!data) return;
      this.state = toggleExpanded(this.state, data.article ?? "");
      this.pushUrl();
      this.renderResultList();
    });
    this.el("load-more").addEventListener("click", () => {
      this.state = { ...this.state, pages: this.state.pages + 1 };
      this.pushUrl();
      void this.loadPage(this.state.pages, this.requestId);
    });
    (this.root.defaultView ?? window).addEventListener("popstate", () => {
      this.state = decodeState(this.root.location?.search ?? "");
      void this.load();
    });
    void this.load();
  }

  private setState(next: ViewState): void {
    this.state = next;
    this.pushUrl();
    void this.load();
  }

  private pushUrl(): void {
    const encoded = encodeState(this.state);
    this.history.pushState(null, "", encoded ? `?${encoded}` : "?");
  }

  /** Fetch pages 1..state.pages, replacing the current list. */
  async load(): Promise<void> {
    const id = ++this.requestId;
    (this.el("query-input") as HTMLInputElement).value = this.state.query;
    if (!this.state.query) {
      this.results = [];
      this.total = 0;
      this.degraded = false;
      this.render("");
      return;
    }
    this.results = [];
    try {
      for (let page = 1; page <= this.state.pages; page += 1) {
        const response = await this.api.search(this.state, page);
        if (id !== this.requestId) return; // a newer search superseded this one
        if (page === 1) this.renderFacetSidebar(response.facet_counts);
        this.results = this.results.concat(response.results);
        this.total = response.total;
        this.degraded = response.degraded;
        if (response.results.length < this.state.pageSize) break;
      }
      this.render("");
    } catch (error) {
      if (id !== this.requestId) return;
      const message = error instanceof ApiError ? error.message : String(error);
      this.render(message);
    }
  }

  /** Fetch one additional page and append it (load-more). */
  private async loadPage(page: number, expectedId: number): Promise<void> {
    try {
      const response = await this.api.search(this.state, page);
      if (expectedId !== this.requestId) return;
      this.results = this.results.concat(response.results);
      this.total = response.total;
      this.degraded = response.degraded;
      this.render("");
    } catch (error) {
      if (expectedId !== this.requestId) return;
      this.render(error instanceof ApiError ? error.message : String(error));
    }
  }

  private renderFacetSidebar(counts: Parameters<typeof renderFacets>[0]): void {
    this.el("facets").innerHTML = renderFacets(counts, this.state);
  }

  private renderResultList(): void {
    this.el("results").innerHTML = renderResults(this.results, this.state.expanded);
  }

  private render(errorMessage: string): void {
    let banner = "";
    if (errorMessage) banner = renderBanner("error", errorMessage);
    else if (this.degraded) banner = renderBanner("degraded", "scorer unavailable, showing first-stage ranking");
    this.el("banner").innerHTML = banner;
    this.renderResultList();
    this.el("status").innerHTML = this.state.query ? renderStatus(this.results.length, this.total) : "";
    const loadMore = this.el("load-more") as HTMLButtonElement;
    loadMore.style.display = this.results.length < this.total ? "block" : "none";
  }
}

export function boot(): void {
  const api = new ApiClient((url) => fetch(url));
  new App(api, document, window.history).start();
}

if (typeof document !== "undefined" && document.getElementById("search-form")) {
  boot();
}
