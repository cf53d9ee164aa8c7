/** Documents and payloads exchanged with the siterec HTTP service. */

export type Comparator = "ge" | "gt" | "le" | "lt" | "within";

export interface PredicateDoc {
	factor: string;
	op: Comparator;
	threshold?: number;
	range?: [number, number];
}

export interface RatingFactorDoc {
	factor: string;
	weight: number;
	membership: Array<[number, number]>;
}

export interface CriterionDoc {
	name: string;
	kind: "must_have" | "preference";
	predicate?: PredicateDoc;
	weight?: number;
	rating?: { factors: RatingFactorDoc[] };
}

export interface ProfileDocument {
	year: number;
	target_level: string;
	focus: string[];
	criteria: CriterionDoc[];
}

export interface BreakdownEntry {
	rating: number;
	contribution: number;
	missing: boolean;
	missing_factors: string[];
}

export interface RecommendationRow {
	site: string;
	total: number;
	eliminated: boolean;
	reasons: string[];
	breakdown: Record<string, BreakdownEntry>;
}

export interface RecommendResponse {
	version: string;
	year: number;
	results: RecommendationRow[];
}

export interface ConflictInfo {
	first: string;
	second: string;
	explanation: string;
}

export interface EvaluateDetail {
	site: string;
	fulfilled: boolean;
	reasons: string[];
}

export interface EvaluateResponse {
	version: string;
	year: number;
	results: unknown[];
	overall: unknown;
	details?: EvaluateDetail[];
}

export interface SiteInfo {
	code: string;
	name: string;
	level: string;
	parent_code: string | null;
}
