// Search-loop state machine, DOM-free so the invariants are testable:
//
//  * suggestions shown always come from the latest completed suggest call
//    whose prefix still matches the current query text -- responses that
//    arrive out of order are discarded, never displayed;
//  * object bytes are fetched once per explicit open, nothing speculative.

import {
  ApiError,
  GatewayApi,
  ObjectPayload,
  SearchFilters,
  SearchHit,
} from "./api.js";
import { debounce, Debounced } from "./debounce.js";

export const SUGGEST_DEBOUNCE_MS = 150;

export interface Preview {
  urlPath: string;
  kind: "image" | "document" | "other";
  payload: ObjectPayload;
}

export interface UiState {
  queryText: string;
  suggestions: string[];
  results: SearchHit[];
  activeFilters: SearchFilters;
  timing: { queryMillis: number; requestMillis: number } | null;
  searchError: string | null;
  toast: string | null;
  preview: Preview | null;
  openErrors: Record<string, string>;
  searching: boolean;
}

type Listener = (state: UiState) => void;

export class SearchController {
  readonly state: UiState = {
    queryText: "",
    suggestions: [],
    results: [],
    activeFilters: {},
    timing: null,
    searchError: null,
    toast: null,
    preview: null,
    openErrors: {},
    searching: false,
  };

  private listeners: Listener[] = [];
  private suggestSeq = 0;
  private appliedSuggestSeq = 0;
  private scheduleSuggest: Debounced<[string]>;

  constructor(private api: GatewayApi) {
    this.scheduleSuggest = debounce(
      (text: string) => void this.issueSuggest(text),
      SUGGEST_DEBOUNCE_MS,
    );
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  // --- typing ---

  onKeystroke(text: string): void {
    this.state.queryText = text;
    if (text.trim() === "") {
      // empty box: no request, nothing stale to show
      this.scheduleSuggest.cancel();
      this.state.suggestions = [];
      this.emit();
      return;
    }
    this.emit();
    this.scheduleSuggest(text);
  }

  private async issueSuggest(text: string): Promise<void> {
    const seq = ++this.suggestSeq;
    let terms: string[];
    try {
      terms = await this.api.suggest(text);
    } catch (err) {
      if (seq > this.appliedSuggestSeq) {
        this.appliedSuggestSeq = seq;
        this.state.suggestions = [];
        this.state.toast = `suggestions unavailable: ${(err as Error).message}`;
        this.emit();
      }
      return;
    }
    // discard stale completions: an older request, or one whose text no
    // longer prefixes what the user currently sees
    if (seq <= this.appliedSuggestSeq) {
      return;
    }
    if (!this.state.queryText.startsWith(text)) {
      return;
    }
    this.appliedSuggestSeq = seq;
    this.state.suggestions = terms;
    this.state.toast = null;
    this.emit();
  }

  // --- searching ---

  setFilters(filters: SearchFilters): void {
    this.state.activeFilters = { ...filters };
    this.emit();
  }

  acceptSuggestion(term: string): void {
    this.scheduleSuggest.cancel();
    this.state.queryText = term;
    this.state.suggestions = [];
    this.emit();
    void this.runSearch();
  }

  async runSearch(): Promise<void> {
    const query = this.state.queryText.trim();
    if (query === "") {
      return;
    }
    this.scheduleSuggest.cancel();
    this.state.searching = true;
    this.state.searchError = null;
    this.emit();
    try {
      const response = await this.api.search(query, this.state.activeFilters);
      this.state.results = response.hits;
      this.state.timing = {
        queryMillis: response.query_millis,
        requestMillis: response.request_millis,
      };
      this.state.suggestions = [];
    } catch (err) {
      this.state.results = [];
      this.state.timing = null;
      this.state.searchError =
        err instanceof ApiError ? err.message : `search failed: ${(err as Error).message}`;
    } finally {
      this.state.searching = false;
      this.emit();
    }
  }

  // --- object retrieval ---

  /** One explicit click, one GET. */
  async openObject(hit: SearchHit): Promise<void> {
    delete this.state.openErrors[hit.url_path];
    const payload = await this.api.fetchObject(hit.url_path);
    if (payload.status !== 200) {
      this.state.openErrors[hit.url_path] = `HTTP ${payload.status}`;
      this.state.preview = null;
      this.emit();
      return;
    }
    this.state.preview = {
      urlPath: hit.url_path,
      kind: hit.doc.content_type,
      payload,
    };
    this.emit();
  }

  dismissToast(): void {
    this.state.toast = null;
    this.emit();
  }
}
