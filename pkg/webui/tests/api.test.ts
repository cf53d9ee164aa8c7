import { describe, expect, it } from "vitest";

import { ConflictError, ServiceClient, ServiceError } from "../src/api.js";
import { DOC, jsonResponse, recommendPayload, row } from "./helpers.js";

describe("ServiceClient.recommend", () => {
	it("posts the document and returns the payload untouched", async () => {
		let captured: unknown = null;
		const payload = recommendPayload("v1", [row("A", 0.9), row("B", 0.4)]);
		const client = new ServiceClient("http://svc", async (url, init) => {
			captured = { url, body: JSON.parse(init?.body as string) };
			return jsonResponse(payload);
		});
		const response = await client.recommend(DOC, 10);
		expect(captured).toEqual({ url: "http://svc/recommend?top_k=10", body: DOC });
		expect(response).toEqual(payload);
	});

	it("turns 422 bodies into ConflictError with the conflict list", async () => {
		const client = new ServiceClient("http://svc", async () =>
			jsonResponse(
				{
					detail: {
						message: "profile is inconsistent",
						conflicts: [{ first: "a", second: "b", explanation: "empty interval" }],
					},
				},
				422,
			),
		);
		const error = await client.recommend(DOC).catch((e) => e);
		expect(error).toBeInstanceOf(ConflictError);
		expect((error as ConflictError).conflicts).toHaveLength(1);
		expect((error as ConflictError).conflicts[0].first).toBe("a");
	});

	it("turns other failures into ServiceError with the detail text", async () => {
		const client = new ServiceClient("http://svc", async () =>
			jsonResponse({ detail: "unknown site 'GHOST'" }, 404),
		);
		const error = await client.recommend(DOC).catch((e) => e);
		expect(error).toBeInstanceOf(ServiceError);
		expect((error as ServiceError).status).toBe(404);
		expect((error as Error).message).toMatch(/GHOST/);
	});

	it("aborts the previous in-flight call (latest wins)", async () => {
		const payloads = [
			recommendPayload("v-old", [row("OLD", 0.1)]),
			recommendPayload("v-new", [row("NEW", 0.8)]),
		];
		let call = 0;
		const client = new ServiceClient("http://svc", (_, init) => {
			const payload = payloads[call];
			call += 1;
			return new Promise((resolve, reject) => {
				const timer = setTimeout(() => resolve(jsonResponse(payload)), 10);
				init?.signal?.addEventListener("abort", () => {
					clearTimeout(timer);
					reject(new DOMException("aborted", "AbortError"));
				});
			});
		});
		const first = client.recommend(DOC);
		const second = client.recommend(DOC);
		await expect(first).rejects.toHaveProperty("name", "AbortError");
		await expect(second).resolves.toMatchObject({ version: "v-new" });
	});
});
