// Gateway HTTP API client. The token lives in memory only; nothing is
// persisted. All calls go through an injectable fetch so tests can count
// and reorder network traffic.

export interface IndexDoc {
  object_name: string;
  account: string;
  container: string;
  url_path: string;
  content_type: "image" | "document" | "other";
  contents: string[];
  size_bytes: number;
  uploaded_at: string;
  extraction_failed?: boolean;
}

export interface SearchHit {
  url_path: string;
  doc: IndexDoc;
  score: number;
}

export interface SearchResponse {
  hits: SearchHit[];
  query_millis: number;
  request_millis: number;
}

export interface ObjectPayload {
  status: number;
  body: Blob | null;
  contentHash: string | null;
  size: number | null;
}

export interface SearchFilters {
  contentType?: string;
  container?: string;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class GatewayApi {
  private token: string | null = null;
  account: string | null = null;

  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  get authenticated(): boolean {
    return this.token !== null;
  }

  private authHeaders(): Record<string, string> {
    return this.token ? { "X-Auth-Token": this.token } : {};
  }

  private async checked(resp: Response): Promise<Response> {
    if (!resp.ok) {
      let detail = `HTTP ${resp.status}`;
      try {
        const body = await resp.json();
        if (body && typeof body.error === "string") {
          detail = `${detail}: ${body.error}`;
        }
      } catch {
        // non-JSON error body; status alone is enough
      }
      throw new ApiError(resp.status, detail);
    }
    return resp;
  }

  async login(user: string, key: string): Promise<void> {
    const resp = await this.checked(
      await this.fetchFn(`${this.baseUrl}/auth`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ user, key }),
      }),
    );
    const payload = await resp.json();
    this.token = payload.token;
    this.account = payload.account;
  }

  async suggest(prefix: string, n = 8): Promise<string[]> {
    const params = new URLSearchParams({ prefix, n: String(n) });
    const resp = await this.checked(
      await this.fetchFn(`${this.baseUrl}/v1/suggest?${params}`, {
        headers: this.authHeaders(),
      }),
    );
    return (await resp.json()).terms;
  }

  async search(q: string, filters: SearchFilters = {}, limit = 50): Promise<SearchResponse> {
    const params = new URLSearchParams({ q, limit: String(limit) });
    if (filters.contentType) {
      params.set("type", filters.contentType);
    }
    if (filters.container) {
      params.set("container", filters.container);
    }
    const resp = await this.checked(
      await this.fetchFn(`${this.baseUrl}/v1/search?${params}`, {
        headers: this.authHeaders(),
      }),
    );
    return await resp.json();
  }

  /** One GET against the object endpoint; never called speculatively. */
  async fetchObject(urlPath: string): Promise<ObjectPayload> {
    const resp = await this.fetchFn(this.baseUrl + encodeURI(urlPath), {
      headers: this.authHeaders(),
    });
    if (!resp.ok) {
      return { status: resp.status, body: null, contentHash: null, size: null };
    }
    const size = resp.headers.get("X-Object-Size");
    return {
      status: resp.status,
      body: await resp.blob(),
      contentHash: resp.headers.get("X-Content-Hash"),
      size: size === null ? null : Number(size),
    };
  }
}
