// DOM wiring: render loop over controller state, browser events in,
// controller calls out. Object previews use blob URLs created on demand
// and revoked on replacement.

import { GatewayApi } from "./api.js";
import { SearchController, UiState } from "./controller.js";

export function mountApp(root: HTMLElement, api: GatewayApi): SearchController {
  const controller = new SearchController(api);
  root.innerHTML = `
    <header><h1>contentstore search</h1></header>
    <section id="login" class="panel">
      <form id="login-form">
        <input id="login-user" placeholder="user" autocomplete="username" />
        <input id="login-key" type="password" placeholder="key" autocomplete="current-password" />
        <button type="submit">sign in</button>
        <span id="login-status"></span>
      </form>
    </section>
    <section id="app" class="panel" hidden>
      <form id="search-form">
        <div class="search-row">
          <input id="query" placeholder="search by content, e.g. dog" autocomplete="off" />
          <button type="submit" id="go">search</button>
        </div>
        <ul id="suggestions"></ul>
        <div class="filters">
          <label>type
            <select id="filter-type">
              <option value="">any</option>
              <option value="image">image</option>
              <option value="document">document</option>
              <option value="other">other</option>
            </select>
          </label>
          <label>container <input id="filter-container" placeholder="any" /></label>
        </div>
      </form>
      <div id="toast" hidden></div>
      <div id="search-error" hidden></div>
      <div id="timing" hidden></div>
      <table id="results" hidden>
        <thead><tr><th>score</th><th>object</th><th>type</th><th>contents</th><th>size</th></tr></thead>
        <tbody></tbody>
      </table>
      <div id="empty-state" hidden>no matches</div>
      <div id="preview" hidden></div>
    </section>
  `;

  const el = <T extends HTMLElement>(id: string): T =>
    root.querySelector<T>(`#${id}`)!;

  const loginForm = el<HTMLFormElement>("login-form");
  const query = el<HTMLInputElement>("query");
  let lastBlobUrl: string | null = null;

  loginForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    const status = el<HTMLSpanElement>("login-status");
    status.textContent = "signing in...";
    try {
      await api.login(
        el<HTMLInputElement>("login-user").value,
        el<HTMLInputElement>("login-key").value,
      );
      el("login").hidden = true;
      el("app").hidden = false;
      query.focus();
    } catch (err) {
      status.textContent = (err as Error).message;
    }
  });

  query.addEventListener("input", () => controller.onKeystroke(query.value));
  el<HTMLFormElement>("search-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void controller.runSearch();
  });
  const readFilters = () => {
    controller.setFilters({
      contentType: el<HTMLSelectElement>("filter-type").value || undefined,
      container: el<HTMLInputElement>("filter-container").value || undefined,
    });
  };
  el("filter-type").addEventListener("change", readFilters);
  el("filter-container").addEventListener("change", readFilters);
  el("toast").addEventListener("click", () => controller.dismissToast());

  controller.subscribe((state) => render(state));

  function render(state: UiState): void {
    const suggestions = el<HTMLUListElement>("suggestions");
    suggestions.replaceChildren(
      ...state.suggestions.map((term) => {
        const item = document.createElement("li");
        item.textContent = term;
        item.className = "suggestion";
        item.addEventListener("click", () => {
          query.value = term;
          controller.acceptSuggestion(term);
        });
        return item;
      }),
    );

    const toast = el("toast");
    toast.hidden = state.toast === null;
    toast.textContent = state.toast ?? "";

    const searchError = el("search-error");
    searchError.hidden = state.searchError === null;
    searchError.textContent = state.searchError ?? "";

    const timing = el("timing");
    timing.hidden = state.timing === null;
    if (state.timing) {
      timing.textContent =
        `query ${state.timing.queryMillis.toFixed(2)} ms / ` +
        `request ${state.timing.requestMillis.toFixed(2)} ms / ` +
        `${state.results.length} hits`;
    }

    renderResults(state);
    renderPreview(state);
  }

  function renderResults(state: UiState): void {
    const table = el<HTMLTableElement>("results");
    const tbody = table.querySelector("tbody")!;
    const hadSearch = state.timing !== null || state.searchError !== null;
    table.hidden = state.results.length === 0;
    el("empty-state").hidden = !(hadSearch && state.results.length === 0 && !state.searching);

    tbody.replaceChildren(
      ...state.results.map((hit) => {
        const row = document.createElement("tr");
        row.appendChild(cell(String(hit.score)));

        const link = document.createElement("a");
        link.textContent = hit.url_path;
        link.href = "#";
        link.className = "object-link";
        link.addEventListener("click", (event) => {
          event.preventDefault();
          void controller.openObject(hit);
        });
        const objectCell = document.createElement("td");
        objectCell.appendChild(link);
        const openError = state.openErrors[hit.url_path];
        if (openError) {
          const note = document.createElement("span");
          note.className = "open-error";
          note.textContent = ` ${openError}`;
          objectCell.appendChild(note);
        }
        row.appendChild(objectCell);

        row.appendChild(cell(hit.doc.content_type));
        row.appendChild(cell(hit.doc.contents.join(", ")));
        row.appendChild(cell(formatSize(hit.doc.size_bytes)));
        return row;
      }),
    );
  }

  function renderPreview(state: UiState): void {
    const preview = el("preview");
    if (lastBlobUrl !== null) {
      URL.revokeObjectURL(lastBlobUrl);
      lastBlobUrl = null;
    }
    preview.hidden = state.preview === null;
    preview.replaceChildren();
    if (!state.preview || !state.preview.payload.body) {
      return;
    }
    const caption = document.createElement("div");
    caption.textContent = state.preview.urlPath;
    preview.appendChild(caption);

    lastBlobUrl = URL.createObjectURL(state.preview.payload.body);
    if (state.preview.kind === "image") {
      const img = document.createElement("img");
      img.src = lastBlobUrl;
      img.alt = state.preview.urlPath;
      preview.appendChild(img);
    } else {
      const download = document.createElement("a");
      download.href = lastBlobUrl;
      download.download = state.preview.urlPath.split("/").pop() ?? "object";
      download.textContent = `download (${formatSize(state.preview.payload.size ?? 0)})`;
      preview.appendChild(download);
    }
  }

  function cell(text: string): HTMLTableCellElement {
    const td = document.createElement("td");
    td.textContent = text;
    return td;
  }

  return controller;
}

function formatSize(bytes: number): string {
  if (bytes < 1024) {
    return `${bytes} B`;
  }
  if (bytes < 1024 * 1024) {
    return `${(bytes / 1024).toFixed(1)} KiB`;
  }
  return `${(bytes / (1024 * 1024)).toFixed(1)} MiB`;
}
