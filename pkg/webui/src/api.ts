/** Thin client for the siterec service.
 *
 * At most one recommend request is in flight; starting a new one aborts
 * the previous (latest wins). All scoring happens server-side — this
 * client only moves documents.
 */

import type {
	ConflictInfo,
	EvaluateDetail,
	EvaluateResponse,
	ProfileDocument,
	RecommendResponse,
	SiteInfo,
} from "./types.js";

export class ConflictError extends Error {
	readonly conflicts: ConflictInfo[];

	constructor(message: string, conflicts: ConflictInfo[]) {
		super(message);
		this.name = "ConflictError";
		this.conflicts = conflicts;
	}
}

export class ServiceError extends Error {
	readonly status: number;

	constructor(status: number, message: string) {
		super(message);
		this.name = "ServiceError";
		this.status = status;
	}
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorFrom(response: Response): Promise<Error> {
	let detail: unknown = null;
	try {
		detail = (await response.json()).detail;
	} catch {
		// non-JSON error body; fall through to the status line
	}
	if (
		response.status === 422 &&
		typeof detail === "object" &&
		detail !== null &&
		Array.isArray((detail as { conflicts?: unknown }).conflicts)
	) {
		const body = detail as { message?: string; conflicts: ConflictInfo[] };
		return new ConflictError(body.message ?? "profile is inconsistent", body.conflicts);
	}
	const message = typeof detail === "string" ? detail : `request failed (${response.status})`;
	return new ServiceError(response.status, message);
}

export class ServiceClient {
	private readonly baseUrl: string;
	private readonly fetchImpl: FetchLike;
	private inflight: AbortController | null = null;

	constructor(baseUrl: string, fetchImpl?: FetchLike) {
		this.baseUrl = baseUrl.replace(/\/$/, "");
		this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
	}

	/** POST the draft; aborts any still-running recommend call. */
	async recommend(profile: ProfileDocument, topK?: number): Promise<RecommendResponse> {
		this.inflight?.abort();
		const controller = new AbortController();
		this.inflight = controller;
		const query = topK !== undefined ? `?top_k=${topK}` : "";
		try {
			const response = await this.fetchImpl(`${this.baseUrl}/recommend${query}`, {
				method: "POST",
				headers: { "content-type": "application/json" },
				body: JSON.stringify(profile),
				signal: controller.signal,
			});
			if (!response.ok) {
				throw await errorFrom(response);
			}
			return (await response.json()) as RecommendResponse;
		} finally {
			if (this.inflight === controller) {
				this.inflight = null;
			}
		}
	}

	/** Per-site fulfilment flags with elimination reasons. */
	async eliminationDetails(profile: ProfileDocument): Promise<EvaluateResponse> {
		const response = await this.fetchImpl(`${this.baseUrl}/evaluate`, {
			method: "POST",
			headers: { "content-type": "application/json" },
			body: JSON.stringify({ profile, chains: [], include_sites: true }),
		});
		if (!response.ok) {
			throw await errorFrom(response);
		}
		return (await response.json()) as EvaluateResponse;
	}

	async sites(level: string, under?: string): Promise<SiteInfo[]> {
		const query = under ? `?level=${level}&under=${under}` : `?level=${level}`;
		const response = await this.fetchImpl(`${this.baseUrl}/sites${query}`);
		if (!response.ok) {
			throw await errorFrom(response);
		}
		const payload = (await response.json()) as { sites: SiteInfo[] };
		return payload.sites;
	}
}

export function excludedSites(details: EvaluateDetail[]): EvaluateDetail[] {
	return details.filter((detail) => !detail.fulfilled);
}
