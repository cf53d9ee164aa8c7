import { describe, expect, it } from "vitest";

import { cloneDocument, exportDraft, importDraft, validateProfile } from "../src/schema.js";
import type { ProfileDocument } from "../src/types.js";
import { DOC } from "./helpers.js";

const WITHIN_DOC: ProfileDocument = {
	year: 2020,
	target_level: "district",
	focus: ["SY.S1", "SY.S2"],
	criteria: [
		{
			name: "band",
			kind: "must_have",
			predicate: { factor: "unemployment_rate", op: "within", range: [3, 8] },
		},
		{
			name: "mix",
			kind: "preference",
			weight: 2.5,
			rating: {
				factors: [
					{ factor: "income_per_inhabitant", weight: 2, membership: [[19000, 0], [26000, 1]] },
					{ factor: "unemployment_rate", weight: 1, membership: [[3, 1], [12, 0]] },
				],
			},
		},
	],
};

describe("draft import/export", () => {
	it("round-trips identically", () => {
		for (const doc of [DOC, WITHIN_DOC]) {
			const once = importDraft(exportDraft(doc));
			expect(once).toEqual(doc);
			expect(importDraft(exportDraft(once))).toEqual(doc);
		}
	});

	it("rejects non-JSON and non-object inputs", () => {
		expect(() => importDraft("{ nope")).toThrow(/not valid JSON/);
		expect(() => importDraft("[1,2]")).toThrow(/JSON object/);
		expect(() => importDraft("{}")).toThrow(/focus/);
	});

	it("clone produces an independent document", () => {
		const clone = cloneDocument(DOC);
		clone.criteria[1].weight = 99;
		expect(DOC.criteria[1].weight).toBe(1);
	});
});

describe("validation", () => {
	it("accepts the sample documents", () => {
		expect(validateProfile(DOC)).toEqual([]);
		expect(validateProfile(WITHIN_DOC)).toEqual([]);
	});

	it("flags an empty focus", () => {
		const doc = cloneDocument(DOC);
		doc.focus = [];
		const issues = validateProfile(doc);
		expect(issues.some((issue) => /focus/.test(issue.message))).toBe(true);
	});

	it("flags non-positive preference weights", () => {
		const doc = cloneDocument(DOC);
		doc.criteria[1].weight = 0;
		expect(validateProfile(doc).map((issue) => issue.criterion)).toContain("appeal");
	});

	it("flags unsorted membership breakpoints", () => {
		const doc = cloneDocument(DOC);
		doc.criteria[1].rating!.factors[0].membership = [[5, 0], [1, 1]];
		const issues = validateProfile(doc);
		expect(issues.some((issue) => /strictly increasing/.test(issue.message))).toBe(true);
	});

	it("flags degrees outside the unit interval", () => {
		const doc = cloneDocument(DOC);
		doc.criteria[1].rating!.factors[0].membership = [[0, 1.4]];
		expect(validateProfile(doc).length).toBeGreaterThan(0);
	});

	it("flags inverted within ranges and duplicate names", () => {
		const doc = cloneDocument(WITHIN_DOC);
		doc.criteria[0].predicate!.range = [9, 3];
		doc.criteria.push({ ...cloneDocument(WITHIN_DOC).criteria[0] });
		const issues = validateProfile(doc);
		expect(issues.some((issue) => /low must not exceed/.test(issue.message))).toBe(true);
		expect(issues.some((issue) => /unique/.test(issue.message))).toBe(true);
	});
});
