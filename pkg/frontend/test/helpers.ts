// Fake gateway transport: every request is recorded, and suggest
// responses can be held open and resolved in any order the test likes.

import { FetchLike } from "../src/api.js";

export interface RecordedRequest {
  url: string;
  method: string;
  resolve: (response: Response) => void;
}

export class FakeGateway {
  requests: RecordedRequest[] = [];
  suggestions: Record<string, string[]> = {};
  objects: Record<string, { body: string; status?: number }> = {};
  hits: { url_path: string; doc: unknown; score: number }[] = [];
  holdSuggests = false;

  fetch: FetchLike = (url, init) => {
    const method = init?.method ?? "GET";
    return new Promise<Response>((resolve) => {
      const record: RecordedRequest = { url, method, resolve };
      this.requests.push(record);
      if (!this.holdSuggests || !url.includes("/v1/suggest")) {
        resolve(this.respond(url, method));
      }
    });
  };

  /** Resolve the i-th still-pending suggest request now. */
  releaseSuggest(index: number): void {
    const pending = this.requests.filter((r) => r.url.includes("/v1/suggest"));
    const record = pending[index];
    record.resolve(this.respond(record.url, record.method));
  }

  respond(url: string, _method: string): Response {
    if (url.endsWith("/auth")) {
      return json({ token: "tok-1", account: "AUTH_test", expires_at: "z" });
    }
    if (url.includes("/v1/suggest")) {
      const prefix = new URL(url).searchParams.get("prefix") ?? "";
      return json({ terms: this.suggestions[prefix] ?? [] });
    }
    if (url.includes("/v1/search")) {
      return json({ hits: this.hits, query_millis: 0.5, request_millis: 2.5 });
    }
    const path = new URL(url).pathname;
    const object = this.objects[path];
    if (!object) {
      return json({ error: "not found" }, 404);
    }
    return new Response(object.body, {
      status: object.status ?? 200,
      headers: {
        "X-Object-Size": String(object.body.length),
        "X-Content-Hash": "0".repeat(32),
      },
    });
  }

  count(pattern: string): number {
    return this.requests.filter((r) => r.url.includes(pattern)).length;
  }
}

function json(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function makeHit(urlPath: string, contents: string[] = ["dog"],
                        contentType = "image"): { url_path: string; doc: unknown; score: number } {
  const name = urlPath.split("/").pop()!;
  return {
    url_path: urlPath,
    doc: {
      object_name: name,
      account: "AUTH_test",
      container: "photos",
      url_path: urlPath,
      content_type: contentType,
      contents,
      size_bytes: 1234,
      uploaded_at: "2024-05-01T00:00:00Z",
    },
    score: 1,
  };
}

// Drain chained promise resolutions without touching timers (tests run
// under fake timers, so a setTimeout-based flush would never fire).
export const flush = async (): Promise<void> => {
  for (let i = 0; i < 20; i++) {
    await Promise.resolve();
  }
};
