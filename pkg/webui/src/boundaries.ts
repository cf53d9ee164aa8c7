/** Bundled boundary stubs for the fixture regions.
 *
 * Coarse polygons in an abstract 100x100 viewport — enough for a
 * choropleth over the focus regions of the bundled datasets, no real
 * geometry.
 */

export interface BoundaryStub {
	code: string;
	name: string;
	/** Polygon as "x,y x,y ..." for an SVG <polygon>. */
	points: string;
	/** Anchor for the label. */
	labelAt: [number, number];
}

export const BOUNDARY_STUBS: BoundaryStub[] = [
	// supermarket case-study states
	{ code: "DE.NI", name: "Lower Saxony", points: "2,8 46,4 50,38 28,48 4,44", labelAt: [24, 26] },
	{ code: "DE.ST", name: "Saxony-Anhalt", points: "50,38 46,4 74,10 78,44 56,52", labelAt: [62, 28] },
	{ code: "DE.BB", name: "Brandenburg", points: "78,44 74,10 96,18 94,58 80,60", labelAt: [86, 36] },
	// synthetic country states
	{ code: "SY.S1", name: "State 1", points: "4,62 34,58 36,92 6,94", labelAt: [20, 78] },
	{ code: "SY.S2", name: "State 2", points: "36,58 64,60 66,94 38,92", labelAt: [50, 78] },
	{ code: "SY.S3", name: "State 3", points: "66,60 94,62 92,96 68,94", labelAt: [80, 79] },
];

export function boundaryFor(code: string): BoundaryStub | undefined {
	return BOUNDARY_STUBS.find((stub) => stub.code === code);
}
