// Typed client for the lostnet HTTP API. All JSON responses carry a
// schema_version field; errors arrive as { schema_version, error }.

export interface SearchMatch {
  item_id: number;
  image_url: string;
  distance: number;
  description: string;
  location: string;
}

export interface SearchResult {
  schema_version: number;
  category: string;
  confidence: number;
  matches: SearchMatch[];
}

export interface ItemRecord {
  id: number;
  category: string;
  image_ref: string;
  hash: string;
  description: string;
  location: string;
  registered_at: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseJson<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, String(body.error ?? response.statusText));
  }
  return body as T;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  itemImageUrl(itemId: number): string {
    return this.url(`/api/items/${itemId}/image`);
  }

  async health(): Promise<{ version: string; num_classes: number }> {
    return parseJson(await fetch(this.url("/health")));
  }

  async categories(): Promise<string[]> {
    const body = await parseJson<{ categories: string[] }>(
      await fetch(this.url("/api/categories")),
    );
    return body.categories;
  }

  async search(image: Blob, topK?: number): Promise<SearchResult> {
    const form = new FormData();
    form.append("image", image, "query.png");
    if (topK !== undefined) {
      form.append("top_k", String(topK));
    }
    return parseJson(await fetch(this.url("/api/search"), { method: "POST", body: form }));
  }

  async registerItem(
    image: Blob,
    category: string,
    description: string,
    location: string,
  ): Promise<ItemRecord> {
    const form = new FormData();
    form.append("image", image, "upload.png");
    form.append("category", category);
    form.append("description", description);
    form.append("location", location);
    const body = await parseJson<{ item: ItemRecord }>(
      await fetch(this.url("/api/items"), { method: "POST", body: form }),
    );
    return body.item;
  }

  async listItems(category?: string): Promise<ItemRecord[]> {
    const suffix = category ? `?category=${encodeURIComponent(category)}` : "";
    const body = await parseJson<{ items: ItemRecord[] }>(
      await fetch(this.url(`/api/items${suffix}`)),
    );
    return body.items;
  }
}
