// @vitest-environment node
// End-to-end against a live backend through the UI's own API client:
// register, search the same image, distance-0 first; error passthrough;
// match order on a 3-item fixture.

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let workDir: string;
const api = new ApiClient(BASE);

function pythonFixture(dir: string): { weights: string; config: string; store: string } {
  const weights = join(dir, "weights.lnw");
  const config = join(dir, "service.cfg");
  const store = join(dir, "store");
  writeFileSync(config, "input_resolution=32\n");
  execFileSync("python3", [
    "-c",
    [
      "from lostnet.network.model import build_network, init_weights",
      "from lostnet.network.weights_io import save_weights",
      "spec = build_network(10, input_resolution=32)",
      `save_weights(init_weights(spec, seed=0), r"${weights}")`,
    ].join("\n"),
  ]);
  return { weights, config, store };
}

function asArrayBufferBytes(data: ArrayBufferView | string): Uint8Array<ArrayBuffer> {
  const raw = typeof data === "string"
    ? new TextEncoder().encode(data)
    : new Uint8Array(data.buffer, data.byteOffset, data.byteLength);
  const copy = new Uint8Array(new ArrayBuffer(raw.byteLength));
  copy.set(raw);
  return copy;
}

// deterministic little PNGs, distinct per key
function testPng(key: number): Uint8Array<ArrayBuffer> {
  const out = execFileSync("python3", [
    "-c",
    [
      "import sys",
      "from lostnet.imageio import encode_png",
      "from lostnet.train.synthetic import family_image",
      `sys.stdout.buffer.write(encode_png(family_image(${key % 10}, ${key}, size=48, seed=33)))`,
    ].join("\n"),
  ]);
  return asArrayBufferBytes(out);
}

async function waitForHealth(): Promise<void> {
  const deadline = Date.now() + 120_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/health`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 500));
  }
  throw new Error("backend did not become healthy in time");
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "lostnet-ui-e2e-"));
  const { weights, config, store } = pythonFixture(workDir);
  server = spawn(
    "python3",
    [
      "-m", "lostnet.cli", "serve",
      "--config", config,
      "--weights", weights,
      "--store", store,
      "--port", String(PORT),
    ],
    { stdio: "ignore" },
  );
  await waitForHealth();
});

afterAll(() => {
  server?.kill();
});

describe("live backend round trip", () => {
  it("register via the form flow, search the same image, distance 0 first", async () => {
    const image = new Blob([testPng(1)], { type: "image/png" });
    // learn which category the model assigns, as the dropdown flow would
    const probe = await api.search(image);
    expect(probe.schema_version).toBe(1);

    const record = await api.registerItem(image, probe.category, "e2e item", "desk 9");
    expect(record.id).toBeGreaterThan(0);

    const result = await api.search(image);
    expect(result.category).toBe(probe.category);
    expect(result.matches.length).toBeGreaterThan(0);
    expect(result.matches[0].item_id).toBe(record.id);
    expect(result.matches[0].distance).toBe(0);
    expect(result.matches[0].description).toBe("e2e item");
    expect(result.matches[0].location).toBe("desk 9");
  });

  it("server error text surfaces verbatim through the client", async () => {
    const bogus = new Blob([asArrayBufferBytes("definitely not an image")], { type: "image/png" });
    let thrown: unknown = null;
    try {
      await api.search(bogus);
    } catch (err) {
      thrown = err;
    }
    expect(thrown).toBeInstanceOf(ApiError);
    expect((thrown as ApiError).status).toBe(400);
    expect((thrown as ApiError).message).toContain("cannot decode image");
  });

  it("match order equals API order on a 3-item fixture", async () => {
    const query = new Blob([testPng(5)], { type: "image/png" });
    const probe = await api.search(query);
    const ids: number[] = [];
    for (const key of [5, 6, 7]) {
      const record = await api.registerItem(
        new Blob([testPng(key)], { type: "image/png" }),
        probe.category,
        `fixture ${key}`,
        "",
      );
      ids.push(record.id);
    }
    const result = await api.search(query, 10);
    const fixtureMatches = result.matches.filter((m) => ids.includes(m.item_id));
    expect(fixtureMatches.length).toBe(3);
    const distances = result.matches.map((m) => m.distance);
    expect([...distances].sort((a, b) => a - b)).toEqual(distances);
    // the exact copy ranks first among the fixture items
    expect(fixtureMatches[0].item_id).toBe(ids[0]);
    expect(fixtureMatches[0].distance).toBe(0);

    // browse view source of truth: listing matches what was registered
    const items = await api.listItems(probe.category);
    const listed = items.map((i) => i.id);
    for (const id of ids) {
      expect(listed).toContain(id);
    }
    expect(listed).toEqual([...listed].sort((a, b) => a - b));
  });

  it("categories endpoint feeds the dropdown", async () => {
    const categories = await api.categories();
    expect(categories.length).toBe(10);
    expect(categories).toContain("bag");
  });
});
