// Single-page UI: search / register / browse tabs over the HTTP API.
// All visible state derives from API responses; matches render strictly
// in server order and distances are shown verbatim as "similarity error".

import { ApiError, ItemRecord, SearchResult } from "./api.js";

export type Page = "search" | "register" | "browse";

export interface Api {
  itemImageUrl(itemId: number): string;
  categories(): Promise<string[]>;
  search(image: Blob, topK?: number): Promise<SearchResult>;
  registerItem(
    image: Blob,
    category: string,
    description: string,
    location: string,
  ): Promise<ItemRecord>;
  listItems(category?: string): Promise<ItemRecord[]>;
}

export interface ViewState {
  page: Page;
  categories: string[];
  pendingPreviewUrl: string | null;
  lastResult: SearchResult | null;
  lastRegistered: ItemRecord | null;
  browseItems: ItemRecord[] | null;
  browseCategory: string | null;
  errorBanner: string | null;
  retryAvailable: boolean;
  searchInFlight: boolean;
}

export class App {
  state: ViewState = {
    page: "search",
    categories: [],
    pendingPreviewUrl: null,
    lastResult: null,
    lastRegistered: null,
    browseItems: null,
    browseCategory: null,
    errorBanner: null,
    retryAvailable: false,
    searchInFlight: false,
  };

  private lastAction: (() => Promise<void>) | null = null;

  constructor(
    private root: HTMLElement,
    private api: Api,
    private doc: Document = document,
  ) {}

  async init(): Promise<void> {
    try {
      this.state.categories = await this.api.categories();
    } catch (err) {
      this.showError(err, () => this.init());
    }
    this.render();
  }

  // -- actions ------------------------------------------------------------

  private showError(err: unknown, retry: (() => Promise<void>) | null): void {
    if (err instanceof ApiError) {
      // server diagnostics surface verbatim
      this.state.errorBanner = err.message;
      this.state.retryAvailable = false;
    } else {
      this.state.errorBanner = "network error; the service did not respond";
      this.state.retryAvailable = retry !== null;
      this.lastAction = retry;
    }
  }

  async submitSearch(file: Blob): Promise<void> {
    if (this.state.searchInFlight) {
      return; // at most one in-flight search
    }
    this.state.searchInFlight = true;
    this.state.errorBanner = null;
    this.render();
    try {
      this.state.lastResult = await this.api.search(file);
    } catch (err) {
      this.state.lastResult = null;
      this.showError(err, () => this.submitSearch(file));
    } finally {
      this.state.searchInFlight = false;
    }
    this.render();
  }

  async submitRegistration(
    file: Blob,
    category: string,
    description: string,
    location: string,
  ): Promise<void> {
    this.state.errorBanner = null;
    try {
      this.state.lastRegistered = await this.api.registerItem(
        file, category, description, location,
      );
    } catch (err) {
      this.state.lastRegistered = null;
      this.showError(err, () => this.submitRegistration(file, category, description, location));
    }
    this.render();
  }

  async browseCategory(category: string): Promise<void> {
    this.state.page = "browse";
    this.state.errorBanner = null;
    this.state.browseCategory = category;
    try {
      this.state.browseItems = await this.api.listItems(category);
    } catch (err) {
      this.state.browseItems = null;
      this.showError(err, () => this.browseCategory(category));
    }
    this.render();
  }

  async retry(): Promise<void> {
    const action = this.lastAction;
    this.state.errorBanner = null;
    this.state.retryAvailable = false;
    this.render();
    if (action) {
      await action();
    }
  }

  // -- rendering ----------------------------------------------------------

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = this.doc.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
      node.setAttribute(key, value);
    }
    if (text !== undefined) {
      node.textContent = text;
    }
    return node;
  }

  render(): void {
    this.root.textContent = "";
    this.root.appendChild(this.renderTabs());
    const banner = this.renderBanner();
    if (banner) {
      this.root.appendChild(banner);
    }
    switch (this.state.page) {
      case "search":
        this.root.appendChild(this.renderSearch());
        break;
      case "register":
        this.root.appendChild(this.renderRegister());
        break;
      case "browse":
        this.root.appendChild(this.renderBrowse());
        break;
    }
  }

  private renderTabs(): HTMLElement {
    const nav = this.el("nav", { class: "tabs" });
    for (const page of ["search", "register", "browse"] as Page[]) {
      const button = this.el(
        "button",
        { id: `tab-${page}`, class: this.state.page === page ? "tab active" : "tab" },
        page,
      );
      button.addEventListener("click", () => {
        this.state.page = page;
        this.render();
      });
      nav.appendChild(button);
    }
    return nav;
  }

  private renderBanner(): HTMLElement | null {
    if (this.state.errorBanner === null) {
      return null;
    }
    const banner = this.el("div", { id: "error-banner", class: "banner" });
    banner.appendChild(this.el("span", {}, this.state.errorBanner));
    if (this.state.retryAvailable) {
      const retry = this.el("button", { id: "retry-button" }, "retry");
      retry.addEventListener("click", () => void this.retry());
      banner.appendChild(retry);
    }
    return banner;
  }

  private fileFrom(input: HTMLInputElement): Blob | null {
    return input.files && input.files.length > 0 ? input.files[0] : null;
  }

  setPendingPreview(file: Blob | null): void {
    // object URLs are unavailable in some test DOMs; preview is best-effort
    if (typeof URL === "undefined" || typeof URL.createObjectURL !== "function") {
      return;
    }
    if (this.state.pendingPreviewUrl) {
      URL.revokeObjectURL(this.state.pendingPreviewUrl);
    }
    this.state.pendingPreviewUrl = file ? URL.createObjectURL(file) : null;
    this.render();
  }

  private renderSearch(): HTMLElement {
    const section = this.el("section", { id: "page-search" });
    const input = this.el("input", { type: "file", id: "search-file", accept: "image/*" });
    input.addEventListener("change", () => {
      this.setPendingPreview(this.fileFrom(input as HTMLInputElement));
    });
    const submit = this.el("button", { id: "search-submit" }, "search");
    if (this.state.searchInFlight) {
      submit.setAttribute("disabled", "disabled");
    }
    submit.addEventListener("click", () => {
      const file = this.fileFrom(input as HTMLInputElement);
      if (file) {
        void this.submitSearch(file);
      }
    });
    section.append(input, submit);
    if (this.state.pendingPreviewUrl) {
      section.appendChild(
        this.el("img", { id: "search-preview", class: "thumb", src: this.state.pendingPreviewUrl }),
      );
    }

    const result = this.state.lastResult;
    const results = this.el("div", { id: "results" });
    if (result) {
      results.appendChild(
        this.el(
          "h2",
          { id: "result-category" },
          `${result.category} (confidence ${(result.confidence * 100).toFixed(1)}%)`,
        ),
      );
      if (result.matches.length === 0) {
        results.appendChild(
          this.el("p", { class: "empty" }, "no candidates in this category"),
        );
      } else {
        for (const match of result.matches) {
          const card = this.el("div", {
            class: "card match-card",
            "data-item-id": String(match.item_id),
            "data-distance": String(match.distance),
          });
          card.appendChild(
            this.el("img", { src: match.image_url, loading: "lazy", class: "thumb" }),
          );
          card.appendChild(
            this.el("p", { class: "distance" }, `similarity error: ${match.distance}`),
          );
          if (match.description) {
            card.appendChild(this.el("p", { class: "description" }, match.description));
          }
          if (match.location) {
            card.appendChild(this.el("p", { class: "location" }, match.location));
          }
          results.appendChild(card);
        }
      }
    }
    section.appendChild(results);
    return section;
  }

  private renderRegister(): HTMLElement {
    const section = this.el("section", { id: "page-register" });
    const input = this.el("input", { type: "file", id: "register-file", accept: "image/*" });
    const select = this.el("select", { id: "register-category" });
    for (const category of this.state.categories) {
      select.appendChild(this.el("option", { value: category }, category));
    }
    const description = this.el("input", {
      type: "text", id: "register-description", placeholder: "description",
    });
    const location = this.el("input", {
      type: "text", id: "register-location", placeholder: "where it was found",
    });
    const submit = this.el("button", { id: "register-submit" }, "register");
    submit.addEventListener("click", () => {
      const file = this.fileFrom(input as HTMLInputElement);
      if (file) {
        void this.submitRegistration(
          file,
          (select as HTMLSelectElement).value,
          (description as HTMLInputElement).value,
          (location as HTMLInputElement).value,
        );
      }
    });
    section.append(input, select, description, location, submit);

    if (this.state.lastRegistered) {
      const record = this.state.lastRegistered;
      const confirmation = this.el("div", { id: "register-confirmation", class: "card" });
      confirmation.appendChild(
        this.el("p", { id: "registered-id" }, `registered item #${record.id}`),
      );
      confirmation.appendChild(
        this.el("img", { src: this.api.itemImageUrl(record.id), loading: "lazy", class: "thumb" }),
      );
      section.appendChild(confirmation);
    }
    return section;
  }

  private renderBrowse(): HTMLElement {
    const section = this.el("section", { id: "page-browse" });
    const select = this.el("select", { id: "browse-category" });
    select.appendChild(this.el("option", { value: "" }, "pick a category"));
    for (const category of this.state.categories) {
      const option = this.el("option", { value: category }, category);
      if (category === this.state.browseCategory) {
        option.setAttribute("selected", "selected");
      }
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      const value = (select as HTMLSelectElement).value;
      if (value) {
        void this.browseCategory(value);
      }
    });
    section.appendChild(select);

    const gallery = this.el("div", { id: "gallery" });
    if (this.state.browseItems !== null) {
      if (this.state.browseItems.length === 0) {
        gallery.appendChild(this.el("p", { class: "empty" }, "no items in this category"));
      }
      for (const item of this.state.browseItems) {
        const card = this.el("div", {
          class: "card gallery-card",
          "data-item-id": String(item.id),
        });
        card.appendChild(
          this.el("img", { src: this.api.itemImageUrl(item.id), loading: "lazy", class: "thumb" }),
        );
        card.appendChild(this.el("p", {}, `#${item.id} ${item.description}`.trim()));
        if (item.location) {
          card.appendChild(this.el("p", { class: "location" }, item.location));
        }
        gallery.appendChild(card);
      }
    }
    section.appendChild(gallery);
    return section;
  }
}
