import type { ProfileDocument, RecommendResponse, RecommendationRow } from "../src/types.js";

export interface CapturedRequest {
	url: string;
	method: string;
	body: unknown;
}

export function row(site: string, total: number): RecommendationRow {
	return {
		site,
		total,
		eliminated: false,
		reasons: [],
		breakdown: {
			appeal: { rating: total, contribution: total, missing: false, missing_factors: [] },
		},
	};
}

export function jsonResponse(payload: unknown, status = 200): Response {
	return new Response(JSON.stringify(payload), {
		status,
		headers: { "content-type": "application/json" },
	});
}

type Handler = (url: string, body: unknown) => Response;

/** fetch stub that records every request and delegates to a handler. */
export function interceptFetch(handler: Handler) {
	const calls: CapturedRequest[] = [];
	const impl = async (url: string, init?: RequestInit): Promise<Response> => {
		const body = init?.body ? JSON.parse(init.body as string) : null;
		calls.push({ url, method: init?.method ?? "GET", body });
		return handler(url, body);
	};
	return { impl, calls };
}

export const DOC: ProfileDocument = {
	year: 2016,
	target_level: "municipality",
	focus: ["DE.NI"],
	criteria: [
		{
			name: "min-inhabitants",
			kind: "must_have",
			predicate: { factor: "inhabitants", op: "ge", threshold: 5000 },
		},
		{
			name: "appeal",
			kind: "preference",
			weight: 1,
			rating: {
				factors: [{ factor: "inhabitants", weight: 1, membership: [[0, 0], [20000, 1]] }],
			},
		},
	],
};

export function recommendPayload(version: string, rows: RecommendationRow[]): RecommendResponse {
	return { version, year: 2016, results: rows };
}

export function renderedOrder(root: HTMLElement): string[] {
	return Array.from(root.querySelectorAll<HTMLElement>("tr.ranking-row")).map(
		(tr) => tr.dataset.site ?? "",
	);
}

export function renderedScores(root: HTMLElement): string[] {
	return Array.from(root.querySelectorAll<HTMLElement>(".score-value")).map(
		(node) => node.textContent ?? "",
	);
}
