/**
 * View state and its URL encoding.
 *
 * Everything the page shows is derived from ViewState, and ViewState
 * round-trips through the location's query string, so reloading a results
 * URL reproduces the same view (including how many pages were appended and
 * which cards are expanded).
 */

export interface ViewState {
  query: string;
  yearFrom: number | null;
  yearTo: number | null;
  journals: string[];
  sources: string[];
  authors: string[];
  /** Number of result pages currently appended (load-more). */
  pages: number;
  pageSize: number;
  preset: string;
  /** Article ids whose cards are expanded. */
  expanded: string[];
}

export const DEFAULT_PAGE_SIZE = 10;

export function emptyState(): ViewState {
  return {
    query: "",
    yearFrom: null,
    yearTo: null,
    journals: [],
    sources: [],
    authors: [],
    pages: 1,
    pageSize: DEFAULT_PAGE_SIZE,
    preset: "paragraph",
    expanded: [],
  };
}

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.query) params.set("query", state.query);
  if (state.yearFrom !== null) params.set("year_from", String(state.yearFrom));
  if (state.yearTo !== null) params.set("year_to", String(state.yearTo));
  for (const journal of state.journals) params.append("journal", journal);
  for (const source of state.sources) params.append("source", source);
  for (const author of state.authors) params.append("author", author);
  if (state.pages !== 1) params.set("pages", String(state.pages));
  if (state.pageSize !== DEFAULT_PAGE_SIZE) params.set("page_size", String(state.pageSize));
  if (state.preset !== "paragraph") params.set("preset", state.preset);
  for (const id of state.expanded) params.append("expanded", id);
  return params.toString();
}

export function decodeState(encoded: string): ViewState {
  const params = new URLSearchParams(encoded);
  const state = emptyState();
  state.query = params.get("query") ?? "";
  const yearFrom = params.get("year_from");
  const yearTo = params.get("year_to");
  state.yearFrom = yearFrom === null ? null : Number(yearFrom);
  state.yearTo = yearTo === null ? null : Number(yearTo);
  state.journals = params.getAll("journal");
  state.sources = params.getAll("source");
  state.authors = params.getAll("author");
  state.pages = Number(params.get("pages") ?? "1");
  state.pageSize = Number(params.get("page_size") ?? String(DEFAULT_PAGE_SIZE));
  state.preset = params.get("preset") ?? "paragraph";
  state.expanded = params.getAll("expanded");
  return state;
}

/** Query parameters for one /api/search request for a given page. */
export function searchParams(state: ViewState, page: number): URLSearchParams {
  const params = new URLSearchParams();
  params.set("query", state.query);
  if (state.yearFrom !== null) params.set("year_from", String(state.yearFrom));
  if (state.yearTo !== null) params.set("year_to", String(state.yearTo));
  for (const journal of state.journals) params.append("journal", journal);
  for (const source of state.sources) params.append("source", source);
  for (const author of state.authors) params.append("author", author);
  params.set("page", String(page));
  params.set("page_size", String(state.pageSize));
  params.set("preset", state.preset);
  return params;
}

function toggle(values: string[], value: string): string[] {
  return values.includes(value)
    ? values.filter((v) => v !== value)
    : [...values, value];
}

/**
 * Apply a facet click. Journal/source/author values toggle membership;
 * clicking a year narrows to it, and a second year extends the range to
 * cover both. Facet changes reset pagination and expansion.
 */
export function applyFacetClick(
  state: ViewState,
  facet: "dates" | "journals" | "sources" | "authors",
  value: string,
): ViewState {
  const next: ViewState = { ...state, pages: 1, expanded: [] };
  if (facet === "dates") {
    const year = Number(value);
    if (Number.isNaN(year)) return next;
    if (state.yearFrom === null || state.yearTo === null) {
      next.yearFrom = year;
      next.yearTo = year;
    } else if (year >= state.yearFrom && year <= state.yearTo) {
      next.yearFrom = null; // clicking inside the active range clears it
      next.yearTo = null;
    } else {
      next.yearFrom = Math.min(state.yearFrom, year);
      next.yearTo = Math.max(state.yearTo, year);
    }
  } else if (facet === "journals") {
    next.journals = toggle(state.journals, value);
  } else if (facet === "sources") {
    next.sources = toggle(state.sources, value);
  } else {
    next.authors = toggle(state.authors, value);
  }
  return next;
}

export function isFacetActive(state: ViewState, facet: string, value: string): boolean {
  if (facet === "dates") {
    const year = Number(value);
    return (
      state.yearFrom !== null &&
      state.yearTo !== null &&
      year >= state.yearFrom &&
      year <= state.yearTo
    );
  }
  if (facet === "journals") return state.journals.includes(value);
  if (facet === "sources") return state.sources.includes(value);
  if (facet === "authors") return state.authors.includes(value);
  return false;
}

export function toggleExpanded(state: ViewState, articleId: string): ViewState {
  return { ...state, expanded: toggle(state.expanded, articleId) };
}

export function withQuery(state: ViewState, query: string): ViewState {
  return { ...emptyState(), query, pageSize: state.pageSize, preset: state.preset };
}
