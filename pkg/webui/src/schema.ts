/** Client-side structural validation and draft import/export.
 *
 * Validation mirrors the service's schema rules closely enough to keep
 * the submit button honest; the server stays authoritative. Exporting
 * then importing a draft must reproduce an identical document.
 */

import type { CriterionDoc, ProfileDocument } from "./types.js";

export interface ValidationIssue {
	/** Criterion name the issue belongs to, or "" for profile-level issues. */
	criterion: string;
	message: string;
}

const COMPARATORS = new Set(["ge", "gt", "le", "lt", "within"]);

function isFiniteNumber(value: unknown): value is number {
	return typeof value === "number" && Number.isFinite(value);
}

function validateCriterion(criterion: CriterionDoc, issues: ValidationIssue[]): void {
	const name = criterion.name ?? "";
	const push = (message: string) => issues.push({ criterion: name, message });
	if (!name) {
		issues.push({ criterion: "", message: "every criterion needs a name" });
		return;
	}
	if (criterion.kind === "must_have") {
		const predicate = criterion.predicate;
		if (!predicate) {
			push("a must-have needs a predicate");
			return;
		}
		if (!predicate.factor) push("predicate needs a factor id");
		if (!COMPARATORS.has(predicate.op)) push(`unknown comparator '${predicate.op}'`);
		if (predicate.op === "within") {
			const range = predicate.range;
			if (!range || range.length !== 2 || !range.every(isFiniteNumber)) {
				push("'within' needs a numeric [low, high] range");
			} else if (range[0] > range[1]) {
				push("range low must not exceed high");
			}
		} else if (!isFiniteNumber(predicate.threshold)) {
			push("comparator needs a numeric threshold");
		}
		if (criterion.weight !== undefined || criterion.rating !== undefined) {
			push("a must-have carries no weight or rating");
		}
	} else if (criterion.kind === "preference") {
		if (!isFiniteNumber(criterion.weight) || criterion.weight <= 0) {
			push("preference weight must be a positive number");
		}
		const factors = criterion.rating?.factors;
		if (!factors || factors.length === 0) {
			push("a preference needs at least one rating factor");
			return;
		}
		for (const component of factors) {
			if (!component.factor) push("rating factor needs a factor id");
			if (!isFiniteNumber(component.weight) || component.weight <= 0) {
				push(`rating weight for '${component.factor}' must be positive`);
			}
			const points = component.membership;
			if (!points || points.length === 0) {
				push(`membership for '${component.factor}' needs at least one [x, y] breakpoint`);
				continue;
			}
			for (let i = 0; i < points.length; i += 1) {
				const pair = points[i];
				if (pair.length !== 2 || !pair.every(isFiniteNumber)) {
					push(`membership breakpoint ${i + 1} of '${component.factor}' must be numeric [x, y]`);
					return;
				}
				if (pair[1] < 0 || pair[1] > 1) {
					push(`membership degree ${pair[1]} of '${component.factor}' must lie in [0, 1]`);
				}
				if (i > 0 && points[i - 1][0] >= pair[0]) {
					push(`membership x values of '${component.factor}' must be strictly increasing`);
				}
			}
		}
	} else {
		push(`kind must be 'must_have' or 'preference'`);
	}
}

/** Structural issues of a draft; empty means submittable. */
export function validateProfile(document: ProfileDocument): ValidationIssue[] {
	const issues: ValidationIssue[] = [];
	if (!Number.isInteger(document.year)) {
		issues.push({ criterion: "", message: "year must be an integer" });
	}
	if (!document.target_level) {
		issues.push({ criterion: "", message: "target level is required" });
	}
	if (!Array.isArray(document.focus) || document.focus.some((code) => !code)) {
		issues.push({ criterion: "", message: "focus must be a list of region keys" });
	} else if (document.focus.length === 0) {
		issues.push({ criterion: "", message: "select at least one focus region" });
	}
	const seen = new Set<string>();
	for (const criterion of document.criteria) {
		if (criterion.name && seen.has(criterion.name)) {
			issues.push({ criterion: criterion.name, message: "criterion names must be unique" });
		}
		seen.add(criterion.name);
		validateCriterion(criterion, issues);
	}
	return issues;
}

/** Serialise a draft for download or clipboard. */
export function exportDraft(document: ProfileDocument): string {
	return JSON.stringify(document, null, 2);
}

/** Parse a previously exported draft; throws with a readable message. */
export function importDraft(text: string): ProfileDocument {
	let parsed: unknown;
	try {
		parsed = JSON.parse(text);
	} catch (error) {
		throw new Error(`not valid JSON: ${(error as Error).message}`);
	}
	if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
		throw new Error("a profile document must be a JSON object");
	}
	const document = parsed as Partial<ProfileDocument>;
	if (!Array.isArray(document.criteria) || !Array.isArray(document.focus)) {
		throw new Error("a profile document needs 'focus' and 'criteria' arrays");
	}
	return {
		year: document.year as number,
		target_level: document.target_level as string,
		focus: document.focus as string[],
		criteria: document.criteria as CriterionDoc[],
	};
}

export function cloneDocument(document: ProfileDocument): ProfileDocument {
	return JSON.parse(JSON.stringify(document)) as ProfileDocument;
}
