/**
 * Pure HTML renderers. Results are rendered strictly in API order; the
 * renderer never reorders, drops, or injects entries. Data attributes carry
 * the hooks the controller listens on.
 */

import { FacetCounts, SearchResult } from "./types.js";
import { ViewState, isFacetActive } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function metadataLine(result: SearchResult): string {
  const parts = [
    result.authors.join(", "),
    result.journal || "unknown venue",
    result.source,
    result.publish_time,
  ].filter((p) => p);
  return escapeHtml(parts.join(" · "));
}

function highlightLocation(paragraphIndex: number | null): string {
  return paragraphIndex === null ? "Abstract" : `Paragraph ${paragraphIndex + 1}`;
}

export function renderResultCard(result: SearchResult, expanded: boolean): string {
  const id = escapeHtml(result.article_id);
  const header = `
    <h3 class="card-title">
      <a href="${escapeHtml(result.url)}" target="_blank" rel="noopener">${escapeHtml(result.title)}</a>
    </h3>
    <div class="card-meta">${metadataLine(result)}</div>`;
  const toggleLabel = expanded ? "Show less" : "Show more";
  const toggle = `<button class="show-more" data-action="toggle" data-article="${id}">${toggleLabel}</button>`;
  let body = "";
  if (expanded) {
    const excerpts = result.highlights
      .map(
        (h) => `
      <blockquote class="excerpt">
        <span class="excerpt-loc">${highlightLocation(h.paragraph_index)}</span>
        <mark>${escapeHtml(h.text)}</mark>
      </blockquote>`,
      )
      .join("");
    body = `
    <div class="card-body">
      <p class="abstract">${escapeHtml(result.abstract)}</p>
      ${excerpts ? `<div class="excerpts">${excerpts}</div>` : ""}
    </div>`;
  }
  return `<article class="result-card" data-article="${id}">${header}${toggle}${body}</article>`;
}

export function renderResults(results: SearchResult[], expanded: string[]): string {
  return results
    .map((result) => renderResultCard(result, expanded.includes(result.article_id)))
    .join("\n");
}

const FACET_LABELS: Record<string, string> = {
  dates: "Year",
  authors: "Authors",
  journals: "Journals",
  sources: "Sources",
};

function sortFacetValues(facet: string, values: Record<string, number>): [string, number][] {
  const entries = Object.entries(values);
  if (facet === "dates") {
    // Years descending, unknown last.
    return entries.sort((a, b) =>
      a[0] === "unknown" ? 1 : b[0] === "unknown" ? -1 : b[0].localeCompare(a[0]),
    );
  }
  return entries.sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]));
}

export function renderFacets(counts: FacetCounts, state: ViewState): string {
  const sections = ["dates", "journals", "sources", "authors"].map((facet) => {
    const values = counts[facet] ?? {};
    const items = sortFacetValues(facet, values)
      .slice(0, 12)
      .map(([value, count]) => {
        const active = isFacetActive(state, facet, value) ? " active" : "";
        return `<li><button class="facet-value${active}" data-action="facet" data-facet="${facet}" data-value="${escapeHtml(value)}">${escapeHtml(value)} <span class="count">${count}</span></button></li>`;
      })
      .join("");
    const note =
      facet === "dates" && state.yearFrom !== null
        ? `<div class="facet-note">range ${state.yearFrom}–${state.yearTo} (click inside to clear)</div>`
        : "";
    return `<section class="facet"><h4>${FACET_LABELS[facet]}</h4>${note}<ul>${items}</ul></section>`;
  });
  return sections.join("\n");
}

export function renderBanner(kind: "error" | "degraded", message: string): string {
  const note = kind === "degraded" ? "partial ranking" : "error";
  return `<div class="banner banner-${kind}"><strong>${note}:</strong> ${escapeHtml(message)}</div>`;
}

export function renderStatus(shown: number, total: number): string {
  return `<div class="status">${shown} of ${total} results</div>`;
}
