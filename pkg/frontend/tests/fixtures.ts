import { SearchResponse, SearchResult } from "../src/types.js";

export function result(id: string, overrides: Partial<SearchResult> = {}): SearchResult {
  return {
    article_id: id,
    title: `Title of ${id}`,
    abstract: `Abstract body for ${id}.`,
    url: `https://example.org/${id}`,
    journal: "Lancet",
    source: "PubMed",
    authors: ["Chen, L."],
    publish_time: "2020-03-15",
    score: 0.9,
    highlights: [
      { paragraph_index: null, sentence_index: 0, text: `Key sentence of ${id}.` },
    ],
    ...overrides,
  };
}

export function response(
  results: SearchResult[],
  overrides: Partial<SearchResponse> = {},
): SearchResponse {
  return {
    query: "antibodies",
    preset: "paragraph",
    page: 1,
    page_size: 10,
    total: results.length,
    degraded: false,
    results,
    facet_counts: {
      dates: { "2020": 2, "2003": 1 },
      journals: { Lancet: 2, unknown: 1 },
      sources: { PubMed: 3 },
      authors: { "Chen, L.": 2, "Patel, R.": 1 },
    },
    ...overrides,
  };
}

/** fetch stub recording every requested URL and serving canned bodies. */
export function stubFetch(bodies: Array<{ status?: number; body: unknown }>) {
  const urls: string[] = [];
  let call = 0;
  const impl = async (url: string) => {
    urls.push(url);
    const next = bodies[Math.min(call, bodies.length - 1)];
    call += 1;
    return {
      ok: (next.status ?? 200) < 400,
      status: next.status ?? 200,
      json: async () => next.body,
    };
  };
  return { impl, urls };
}
