/** Application wiring: criteria editor, submit loop, result views.
 *
 * What-if loop: every edit marks the draft dirty and re-validates;
 * submit posts the document to the service and renders whatever comes
 * back. Nothing is scored client-side.
 */

import { ConflictError, ServiceClient } from "./api.js";
import { exportDraft, importDraft, validateProfile } from "./schema.js";
import {
	clearConflicts,
	renderChoropleth,
	renderConflicts,
	renderExcluded,
	renderIssues,
	renderRanking,
} from "./render.js";
import { ProfileDraftStore, StorageLike } from "./state.js";
import type { CriterionDoc, ProfileDocument } from "./types.js";

export interface App {
	root: HTMLElement;
	store: ProfileDraftStore;
	refresh(): void;
	rebuild(): void;
	replaceDraft(document: ProfileDocument): void;
	submit(): Promise<void>;
	showExcluded(): Promise<void>;
}

function element<K extends keyof HTMLElementTagNameMap>(
	tag: K,
	attrs: Record<string, string> = {},
	text?: string,
): HTMLElementTagNameMap[K] {
	const node = document.createElement(tag);
	for (const [key, value] of Object.entries(attrs)) {
		node.setAttribute(key, value);
	}
	if (text !== undefined) node.textContent = text;
	return node;
}

function labelled(labelText: string, input: HTMLElement): HTMLElement {
	const wrap = element("label", { class: "field" });
	wrap.appendChild(element("span", {}, labelText));
	wrap.appendChild(input);
	return wrap;
}

const SKELETON = `
<section class="editor">
  <h2>Requirement profile</h2>
  <div class="profile-fields"></div>
  <div class="criteria"></div>
  <div class="actions">
    <button class="add-must-have" type="button">add must-have</button>
    <button class="add-preference" type="button">add preference</button>
  </div>
  <div class="issues-box"></div>
  <p class="service-error"></p>
  <button class="submit" type="button">get recommendations</button>
  <details class="draft-io">
    <summary>import / export draft</summary>
    <textarea class="draft-text" rows="8"></textarea>
    <button class="export-draft" type="button">export</button>
    <button class="import-draft" type="button">import</button>
    <p class="draft-io-error"></p>
  </details>
</section>
<section class="output">
  <div class="results"></div>
  <div class="choropleth-box"></div>
  <button class="show-excluded" type="button" hidden>show excluded sites</button>
  <div class="excluded-box"></div>
</section>
`;

export function createApp(
	root: HTMLElement,
	client: ServiceClient,
	storage: StorageLike | null = null,
): App {
	root.innerHTML = SKELETON;
	const store = new ProfileDraftStore(storage);

	const query = <T extends HTMLElement>(selector: string): T => {
		const node = root.querySelector<T>(selector);
		if (!node) throw new Error(`missing element ${selector}`);
		return node;
	};

	const criteriaBox = query<HTMLElement>(".criteria");
	const issuesBox = query<HTMLElement>(".issues-box");
	const submitButton = query<HTMLButtonElement>(".submit");
	const serviceError = query<HTMLElement>(".service-error");
	const resultsBox = query<HTMLElement>(".results");
	const choroplethBox = query<HTMLElement>(".choropleth-box");
	const excludedBox = query<HTMLElement>(".excluded-box");
	const excludedButton = query<HTMLButtonElement>(".show-excluded");

	function refresh(): void {
		const issues = validateProfile(store.document);
		renderIssues(issuesBox, issues);
		submitButton.disabled = issues.length > 0;
		submitButton.title = issues.length > 0 ? "fix the highlighted issues first" : "";
	}

	function bindNumber(input: HTMLInputElement, write: (value: number) => void): void {
		input.addEventListener("input", () => {
			const value = Number(input.value);
			store.update(() => write(value));
			refresh();
		});
	}

	function bindText(input: HTMLInputElement, write: (value: string) => void): void {
		input.addEventListener("input", () => {
			store.update(() => write(input.value));
			refresh();
		});
	}

	function renderProfileFields(): void {
		const box = query<HTMLElement>(".profile-fields");
		box.replaceChildren();
		const doc = store.document;

		const year = element("input", { class: "year-input", type: "number", value: String(doc.year) });
		bindNumber(year as HTMLInputElement, (v) => {
			store.document.year = v;
		});
		box.appendChild(labelled("year", year));

		const level = element("input", { class: "level-input", value: doc.target_level });
		bindText(level as HTMLInputElement, (v) => {
			store.document.target_level = v;
		});
		box.appendChild(labelled("target level", level));

		const focus = element("input", {
			class: "focus-input",
			value: doc.focus.join(", "),
			placeholder: "region keys, comma separated",
		});
		(focus as HTMLInputElement).addEventListener("input", () => {
			const codes = (focus as HTMLInputElement).value
				.split(",")
				.map((code) => code.trim())
				.filter((code) => code.length > 0);
			store.update(() => {
				store.document.focus = codes;
			});
			refresh();
		});
		box.appendChild(labelled("regional focus", focus));
	}

	function criterionCard(criterion: CriterionDoc, index: number): HTMLElement {
		const card = element("div", { class: `criterion ${criterion.kind}` });
		card.dataset.criterionCard = criterion.name;

		const name = element("input", { class: "name-input", value: criterion.name });
		bindText(name as HTMLInputElement, (v) => {
			store.document.criteria[index].name = v;
			card.dataset.criterionCard = v;
		});
		card.appendChild(labelled("name", name));

		if (criterion.kind === "must_have" && criterion.predicate) {
			const predicate = criterion.predicate;
			const factor = element("input", { class: "factor-input", value: predicate.factor });
			bindText(factor as HTMLInputElement, (v) => {
				store.document.criteria[index].predicate!.factor = v;
			});
			card.appendChild(labelled("factor", factor));

			const op = element("select", { class: "op-input" });
			for (const choice of ["ge", "gt", "le", "lt", "within"]) {
				const option = element("option", { value: choice }, choice);
				if (choice === predicate.op) option.setAttribute("selected", "selected");
				op.appendChild(option);
			}
			op.addEventListener("change", () => {
				store.update(() => {
					const target = store.document.criteria[index].predicate!;
					target.op = (op as HTMLSelectElement).value as typeof target.op;
					if (target.op === "within") {
						target.range = target.range ?? [0, 0];
						delete target.threshold;
					} else {
						target.threshold = target.threshold ?? 0;
						delete target.range;
					}
				});
				rebuild();
			});
			card.appendChild(labelled("comparator", op));

			if (predicate.op === "within") {
				const low = element("input", {
					class: "range-low-input", type: "number", value: String(predicate.range?.[0] ?? 0),
				});
				const high = element("input", {
					class: "range-high-input", type: "number", value: String(predicate.range?.[1] ?? 0),
				});
				bindNumber(low as HTMLInputElement, (v) => {
					store.document.criteria[index].predicate!.range![0] = v;
				});
				bindNumber(high as HTMLInputElement, (v) => {
					store.document.criteria[index].predicate!.range![1] = v;
				});
				card.appendChild(labelled("low", low));
				card.appendChild(labelled("high", high));
			} else {
				const threshold = element("input", {
					class: "threshold-input", type: "number", value: String(predicate.threshold ?? 0),
				});
				bindNumber(threshold as HTMLInputElement, (v) => {
					store.document.criteria[index].predicate!.threshold = v;
				});
				card.appendChild(labelled("threshold", threshold));
			}
		}

		if (criterion.kind === "preference") {
			const weight = element("input", {
				class: "weight-input", type: "number", step: "0.1", value: String(criterion.weight ?? 1),
			});
			bindNumber(weight as HTMLInputElement, (v) => {
				store.document.criteria[index].weight = v;
			});
			card.appendChild(labelled("weight", weight));

			const rating = element("textarea", { class: "rating-input", rows: "4" });
			(rating as HTMLTextAreaElement).value = JSON.stringify(
				criterion.rating?.factors ?? [],
				null,
				1,
			);
			rating.addEventListener("input", () => {
				try {
					const factors = JSON.parse((rating as HTMLTextAreaElement).value);
					rating.classList.remove("invalid");
					store.update(() => {
						store.document.criteria[index].rating = { factors };
					});
				} catch {
					rating.classList.add("invalid");
				}
				refresh();
			});
			card.appendChild(labelled("rating factors (JSON)", rating));
		}

		const remove = element("button", { class: "remove-criterion", type: "button" }, "remove");
		remove.addEventListener("click", () => {
			store.update(() => {
				store.document.criteria.splice(index, 1);
			});
			rebuild();
		});
		card.appendChild(remove);
		return card;
	}

	function renderCriteria(): void {
		criteriaBox.replaceChildren();
		store.document.criteria.forEach((criterion, index) => {
			criteriaBox.appendChild(criterionCard(criterion, index));
		});
	}

	function rebuild(): void {
		renderProfileFields();
		renderCriteria();
		refresh();
	}

	function nextName(prefix: string): string {
		const taken = new Set(store.document.criteria.map((criterion) => criterion.name));
		let counter = 1;
		while (taken.has(`${prefix}-${counter}`)) counter += 1;
		return `${prefix}-${counter}`;
	}

	query<HTMLButtonElement>(".add-must-have").addEventListener("click", () => {
		store.update(() => {
			store.document.criteria.push({
				name: nextName("must-have"),
				kind: "must_have",
				predicate: { factor: "inhabitants", op: "ge", threshold: 0 },
			});
		});
		rebuild();
	});

	query<HTMLButtonElement>(".add-preference").addEventListener("click", () => {
		store.update(() => {
			store.document.criteria.push({
				name: nextName("preference"),
				kind: "preference",
				weight: 1,
				rating: { factors: [{ factor: "inhabitants", weight: 1, membership: [[0, 0], [1, 1]] }] },
			});
		});
		rebuild();
	});

	async function submit(): Promise<void> {
		serviceError.textContent = "";
		clearConflicts(criteriaBox);
		const profile: ProfileDocument = store.document;
		try {
			const response = await client.recommend(profile);
			store.markSubmitted(response);
			renderRanking(resultsBox, response);
			renderChoropleth(choroplethBox, profile.focus, response);
			excludedButton.hidden = false;
			excludedBox.replaceChildren();
		} catch (error) {
			if ((error as Error).name === "AbortError") {
				return; // a newer submit superseded this one
			}
			if (error instanceof ConflictError) {
				renderConflicts(criteriaBox, error.conflicts);
				serviceError.textContent = error.message;
				return;
			}
			serviceError.textContent = (error as Error).message;
		}
	}

	async function showExcluded(): Promise<void> {
		try {
			const payload = await client.eliminationDetails(store.document);
			renderExcluded(excludedBox, payload.details ?? []);
		} catch (error) {
			serviceError.textContent = (error as Error).message;
		}
	}

	submitButton.addEventListener("click", () => {
		void submit();
	});
	excludedButton.addEventListener("click", () => {
		void showExcluded();
	});

	query<HTMLButtonElement>(".export-draft").addEventListener("click", () => {
		query<HTMLTextAreaElement>(".draft-text").value = exportDraft(store.document);
		query<HTMLElement>(".draft-io-error").textContent = "";
	});

	query<HTMLButtonElement>(".import-draft").addEventListener("click", () => {
		const errorBox = query<HTMLElement>(".draft-io-error");
		try {
			store.replace(importDraft(query<HTMLTextAreaElement>(".draft-text").value));
			errorBox.textContent = "";
			rebuild();
		} catch (error) {
			errorBox.textContent = (error as Error).message;
		}
	});

	function replaceDraft(document: ProfileDocument): void {
		store.replace(document);
		rebuild();
	}

	rebuild();
	return { root, store, refresh, rebuild, replaceDraft, submit, showExcluded };
}

/** Browser entry point (skipped under tests). */
export function bootstrap(): void {
	const root = document.getElementById("app");
	if (!root) return;
	const base = new URLSearchParams(window.location.search).get("service") ?? "";
	const client = new ServiceClient(base);
	createApp(root, client, window.localStorage);
}

declare global {
	interface Window {
		__SITEREC_TEST__?: boolean;
	}
}

if (typeof window !== "undefined" && typeof document !== "undefined" && !window.__SITEREC_TEST__) {
	if (document.readyState === "loading") {
		document.addEventListener("DOMContentLoaded", bootstrap);
	} else {
		bootstrap();
	}
}
