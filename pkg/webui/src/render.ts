/** DOM renderers. Every number shown here is copied verbatim from a
 * service payload; the UI performs no scoring arithmetic of its own
 * (the choropleth picks the best server score per region, it never
 * recombines them).
 */

import { boundaryFor } from "./boundaries.js";
import type {
	ConflictInfo,
	EvaluateDetail,
	RecommendResponse,
	RecommendationRow,
} from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
	tag: K,
	className?: string,
	text?: string,
): HTMLElementTagNameMap[K] {
	const node = document.createElement(tag);
	if (className) node.className = className;
	if (text !== undefined) node.textContent = text;
	return node;
}

function formatScore(value: number): string {
	return value.toFixed(4);
}

function breakdownList(row: RecommendationRow): HTMLElement {
	const list = el("ul", "breakdown");
	for (const [name, entry] of Object.entries(row.breakdown)) {
		const item = el("li");
		item.dataset.criterion = name;
		const missing = entry.missing ? ` (missing: ${entry.missing_factors.join(", ")})` : "";
		item.textContent =
			`${name}: rating ${formatScore(entry.rating)}, ` +
			`contribution ${formatScore(entry.contribution)}${missing}`;
		list.appendChild(item);
	}
	return list;
}

/** Ranked table with score bars and expandable per-criterion breakdowns. */
export function renderRanking(container: HTMLElement, response: RecommendResponse): void {
	container.replaceChildren();
	container.dataset.version = response.version;

	const caption = el(
		"p",
		"version-label",
		`snapshot ${response.version} - year ${response.year} - ${response.results.length} sites`,
	);
	container.appendChild(caption);

	const table = el("table", "ranking");
	const head = el("tr");
	for (const column of ["rank", "site", "score", ""]) {
		head.appendChild(el("th", undefined, column));
	}
	table.appendChild(head);

	response.results.forEach((row, index) => {
		const tr = el("tr", "ranking-row");
		tr.dataset.site = row.site;
		tr.appendChild(el("td", "rank", String(index + 1)));
		tr.appendChild(el("td", "site", row.site));

		const scoreCell = el("td", "score");
		const bar = el("div", "score-bar");
		bar.style.width = `${Math.round(row.total * 100)}%`;
		const value = el("span", "score-value", formatScore(row.total));
		scoreCell.appendChild(bar);
		scoreCell.appendChild(value);
		tr.appendChild(scoreCell);

		const detailCell = el("td", "detail");
		const details = el("details");
		details.appendChild(el("summary", undefined, "breakdown"));
		details.appendChild(breakdownList(row));
		detailCell.appendChild(details);
		tr.appendChild(detailCell);

		table.appendChild(tr);
	});
	container.appendChild(table);
}

/** Inline conflict messages next to the offending criterion cards. */
export function renderConflicts(editorRoot: HTMLElement, conflicts: ConflictInfo[]): void {
	clearConflicts(editorRoot);
	const cards = Array.from(editorRoot.querySelectorAll<HTMLElement>("[data-criterion-card]"));
	for (const conflict of conflicts) {
		for (const name of [conflict.first, conflict.second]) {
			const card = cards.find((candidate) => candidate.dataset.criterionCard === name);
			if (!card) continue;
			const note = el("p", "conflict-inline");
			note.dataset.conflict = `${conflict.first}|${conflict.second}`;
			note.textContent =
				`conflicts with '${name === conflict.first ? conflict.second : conflict.first}': ` +
				conflict.explanation;
			card.appendChild(note);
		}
	}
}

export function clearConflicts(editorRoot: HTMLElement): void {
	editorRoot.querySelectorAll(".conflict-inline").forEach((node) => node.remove());
}

/** Excluded candidates with their elimination reasons. */
export function renderExcluded(container: HTMLElement, details: EvaluateDetail[]): void {
	container.replaceChildren();
	const excluded = details.filter((detail) => !detail.fulfilled);
	container.appendChild(el("p", undefined, `${excluded.length} excluded sites`));
	const list = el("ul", "excluded");
	for (const detail of excluded) {
		const item = el("li");
		item.dataset.site = detail.site;
		item.textContent = `${detail.site}: ${detail.reasons.join("; ")}`;
		list.appendChild(item);
	}
	container.appendChild(list);
}

/** Choropleth over the focus regions, coloured by the best server score
 * of any ranked site inside each region. */
export function renderChoropleth(
	container: HTMLElement,
	focus: string[],
	response: RecommendResponse,
): void {
	container.replaceChildren();
	const svg = document.createElementNS(SVG_NS, "svg");
	svg.setAttribute("viewBox", "0 0 100 100");
	svg.setAttribute("class", "choropleth");

	const bestByRegion = new Map<string, number>();
	for (const row of response.results) {
		for (const code of focus) {
			if (row.site === code || row.site.startsWith(`${code}.`)) {
				const best = bestByRegion.get(code);
				if (best === undefined || row.total > best) {
					bestByRegion.set(code, row.total);
				}
			}
		}
	}

	for (const code of focus) {
		const stub = boundaryFor(code);
		if (!stub) continue;
		const polygon = document.createElementNS(SVG_NS, "polygon");
		polygon.setAttribute("points", stub.points);
		polygon.dataset.region = code;
		const best = bestByRegion.get(code);
		if (best === undefined) {
			polygon.setAttribute("fill", "#e8e8e8");
		} else {
			const intensity = Math.round(235 - best * 160);
			polygon.setAttribute("fill", `rgb(${intensity}, ${intensity}, 245)`);
			polygon.dataset.bestScore = formatScore(best);
		}
		polygon.setAttribute("stroke", "#555");
		const title = document.createElementNS(SVG_NS, "title");
		title.textContent =
			best === undefined
				? `${stub.name}: no ranked sites`
				: `${stub.name}: best score ${formatScore(best)}`;
		polygon.appendChild(title);
		svg.appendChild(polygon);

		const label = document.createElementNS(SVG_NS, "text");
		label.setAttribute("x", String(stub.labelAt[0]));
		label.setAttribute("y", String(stub.labelAt[1]));
		label.setAttribute("font-size", "4");
		label.setAttribute("text-anchor", "middle");
		label.textContent = stub.name;
		svg.appendChild(label);
	}
	container.appendChild(svg);
}

/** Validation hint block; submit stays disabled while it is non-empty. */
export function renderIssues(container: HTMLElement, issues: { criterion: string; message: string }[]): void {
	container.replaceChildren();
	if (issues.length === 0) return;
	const list = el("ul", "issues");
	for (const issue of issues) {
		const prefix = issue.criterion ? `${issue.criterion}: ` : "";
		list.appendChild(el("li", undefined, `${prefix}${issue.message}`));
	}
	container.appendChild(list);
}
