/** Thin client for the search service; fetch is injectable for tests. */

import { SearchResponse } from "./types.js";
import { ViewState, searchParams } from "./state.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(private fetchImpl: FetchLike, private base = "") {}

  async search(state: ViewState, page: number): Promise<SearchResponse> {
    const url = `${this.base}/api/search?${searchParams(state, page).toString()}`;
    const response = await this.fetchImpl(url);
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(String(body["error"] ?? `request failed (${response.status})`), response.status);
    }
    return body as unknown as SearchResponse;
  }
}
