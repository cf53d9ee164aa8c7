/** Draft store: the document under edit, its dirty flag, and the last
 * server response (kept with the snapshot version it came from).
 * Persistence is browser local storage only.
 */

import { cloneDocument } from "./schema.js";
import type { ProfileDocument, RecommendResponse } from "./types.js";

const STORAGE_KEY = "siterec.profile-draft";

export interface StorageLike {
	getItem(key: string): string | null;
	setItem(key: string, value: string): void;
}

export const DEFAULT_DRAFT: ProfileDocument = {
	year: 2016,
	target_level: "municipality",
	focus: [],
	criteria: [
		{
			name: "min-inhabitants",
			kind: "must_have",
			predicate: { factor: "inhabitants", op: "ge", threshold: 5000 },
		},
		{
			name: "many-inhabitants",
			kind: "preference",
			weight: 1,
			rating: {
				factors: [
					{ factor: "inhabitants", weight: 1, membership: [[0, 0], [20000, 1]] },
				],
			},
		},
	],
};

export class ProfileDraftStore {
	document: ProfileDocument;
	dirty = false;
	lastResponse: RecommendResponse | null = null;

	private readonly storage: StorageLike | null;

	constructor(storage: StorageLike | null = null, initial?: ProfileDocument) {
		this.storage = storage;
		this.document = initial ? cloneDocument(initial) : this.restore();
	}

	private restore(): ProfileDocument {
		const saved = this.storage?.getItem(STORAGE_KEY);
		if (saved) {
			try {
				return JSON.parse(saved) as ProfileDocument;
			} catch {
				// corrupted draft; fall back to the default
			}
		}
		return cloneDocument(DEFAULT_DRAFT);
	}

	/** Apply an edit; marks the draft dirty and persists it. */
	update(mutate: (draft: ProfileDocument) => void): void {
		mutate(this.document);
		this.dirty = true;
		this.persist();
	}

	replace(document: ProfileDocument): void {
		this.document = cloneDocument(document);
		this.dirty = true;
		this.persist();
	}

	markSubmitted(response: RecommendResponse): void {
		this.lastResponse = response;
		this.dirty = false;
	}

	private persist(): void {
		this.storage?.setItem(STORAGE_KEY, JSON.stringify(this.document));
	}
}
