/** Wire types mirroring the search service's JSON responses. */

export interface Highlight {
  paragraph_index: number | null;
  sentence_index: number;
  text: string;
}

export interface SearchResult {
  article_id: string;
  title: string;
  abstract: string;
  url: string;
  journal: string;
  source: string;
  authors: string[];
  publish_time: string;
  score: number;
  highlights: Highlight[];
}

export type FacetCounts = Record<string, Record<string, number>>;

export interface SearchResponse {
  query: string;
  preset: string;
  page: number;
  page_size: number;
  total: number;
  degraded: boolean;
  results: SearchResult[];
  facet_counts: FacetCounts;
}

export interface ArticleResponse {
  article_id: string;
  title: string;
  abstract: string;
  paragraphs: string[];
  authors: string[];
  journal: string;
  source: string;
  publish_time: string;
  url: string;
}
