/** SVG chart builders, all pure string generators so they render in the
 * browser and assert cleanly under node.
 *
 * Layout per objective count: 2 -> plane scatter, 3 -> isometric scatter,
 * more -> parallel coordinates with per-axis ranges taken from the snapshot.
 * The representative subset is drawn emphasized; the reference point becomes
 * a crosshair (scatters) or a highlighted polyline (parallel coordinates).
 */

export interface ChartOptions {
  width?: number;
  height?: number;
  representative?: number[];
  /** Reference point in DISPLAY orientation (same space as the points). */
  reference?: number[] | null;
}

const PAD = 34;

function extent(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function scaler(lo: number, hi: number, a: number, b: number) {
  return (v: number) => a + ((v - lo) / (hi - lo)) * (b - a);
}

function svgOpen(width: number, height: number): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">`;
}

export function scatter2d(points: number[][], opts: ChartOptions = {}): string {
  const width = opts.width ?? 420;
  const height = opts.height ?? 320;
  const rep = new Set(opts.representative ?? []);
  const xs = points.map((p) => p[0]).concat(opts.reference ? [opts.reference[0]] : []);
  const ys = points.map((p) => p[1]).concat(opts.reference ? [opts.reference[1]] : []);
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = scaler(x0, x1, PAD, width - PAD);
  const sy = scaler(y0, y1, height - PAD, PAD);
  const parts = [svgOpen(width, height)];
  parts.push(
    `<line x1="${PAD}" y1="${height - PAD}" x2="${width - PAD}" y2="${height - PAD}" class="axis"/>`,
    `<line x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${height - PAD}" class="axis"/>`,
  );
  points.forEach((p, i) => {
    const cls = rep.has(i) ? "point rep" : "point";
    const r = rep.has(i) ? 5 : 2.5;
    parts.push(`<circle cx="${sx(p[0]).toFixed(1)}" cy="${sy(p[1]).toFixed(1)}" r="${r}" class="${cls}"/>`);
  });
  if (opts.reference) {
    const [rx, ry] = [sx(opts.reference[0]), sy(opts.reference[1])];
    parts.push(
      `<line x1="${(rx - 7).toFixed(1)}" y1="${ry.toFixed(1)}" x2="${(rx + 7).toFixed(1)}" y2="${ry.toFixed(1)}" class="refpoint"/>`,
      `<line x1="${rx.toFixed(1)}" y1="${(ry - 7).toFixed(1)}" x2="${rx.toFixed(1)}" y2="${(ry + 7).toFixed(1)}" class="refpoint"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Isometric projection of 3-objective points onto the drawing plane. */
function iso(p: number[]): [number, number] {
  const c = Math.cos(Math.PI / 6);
  const s = Math.sin(Math.PI / 6);
  return [(p[0] - p[1]) * c, (p[0] + p[1]) * s - p[2]];
}

export function scatter3d(points: number[][], opts: ChartOptions = {}): string {
  const width = opts.width ?? 420;
  const height = opts.height ?? 320;
  const rep = new Set(opts.representative ?? []);
  const all = opts.reference ? points.concat([opts.reference]) : points;
  const projected = all.map(iso);
  const [x0, x1] = extent(projected.map((p) => p[0]));
  const [y0, y1] = extent(projected.map((p) => p[1]));
  const sx = scaler(x0, x1, PAD, width - PAD);
  const sy = scaler(y0, y1, height - PAD, PAD);
  const parts = [svgOpen(width, height)];
  points.forEach((p, i) => {
    const [u, v] = iso(p);
    const cls = rep.has(i) ? "point rep" : "point";
    const r = rep.has(i) ? 5 : 2.5;
    parts.push(`<circle cx="${sx(u).toFixed(1)}" cy="${sy(v).toFixed(1)}" r="${r}" class="${cls}"/>`);
  });
  if (opts.reference) {
    const [u, v] = iso(opts.reference);
    const [rx, ry] = [sx(u), sy(v)];
    parts.push(
      `<line x1="${(rx - 7).toFixed(1)}" y1="${ry.toFixed(1)}" x2="${(rx + 7).toFixed(1)}" y2="${ry.toFixed(1)}" class="refpoint"/>`,
      `<line x1="${rx.toFixed(1)}" y1="${(ry - 7).toFixed(1)}" x2="${rx.toFixed(1)}" y2="${(ry + 7).toFixed(1)}" class="refpoint"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

export function parallelCoordinates(points: number[][], opts: ChartOptions = {}): string {
  const width = opts.width ?? 560;
  const height = opts.height ?? 320;
  const rep = new Set(opts.representative ?? []);
  const m = points[0]?.length ?? opts.reference?.length ?? 0;
  const axisX = (j: number) => PAD + (j * (width - 2 * PAD)) / Math.max(1, m - 1);
  const ranges: [number, number][] = [];
  for (let j = 0; j < m; j++) {
    const col = points.map((p) => p[j]).concat(opts.reference ? [opts.reference[j]] : []);
    ranges.push(extent(col));
  }
  const sy = (j: number, v: number) =>
    scaler(ranges[j][0], ranges[j][1], height - PAD, PAD)(v);
  const polyline = (p: number[]) =>
    p.map((v, j) => `${axisX(j).toFixed(1)},${sy(j, v).toFixed(1)}`).join(" ");
  const parts = [svgOpen(width, height)];
  for (let j = 0; j < m; j++) {
    parts.push(
      `<line x1="${axisX(j).toFixed(1)}" y1="${PAD}" x2="${axisX(j).toFixed(1)}" y2="${height - PAD}" class="axis"/>`,
    );
  }
  points.forEach((p, i) => {
    const cls = rep.has(i) ? "polyline rep" : "polyline";
    parts.push(`<polyline points="${polyline(p)}" fill="none" class="${cls}"/>`);
  });
  if (opts.reference) {
    parts.push(`<polyline points="${polyline(opts.reference)}" fill="none" class="refline"/>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

export function populationChart(
  points: number[][],
  m: number,
  opts: ChartOptions = {},
): string {
  if (m === 2) return scatter2d(points, opts);
  if (m === 3) return scatter3d(points, opts);
  return parallelCoordinates(points, opts);
}

export interface TrajectoryOptions {
  width?: number;
  height?: number;
  /** Generations where the reference point changed; drawn as vertical rules. */
  elicitationGenerations?: number[];
}

export function trajectoryChart(
  points: { generation: number; value: number }[],
  opts: TrajectoryOptions = {},
): string {
  const width = opts.width ?? 560;
  const height = opts.height ?? 200;
  const parts = [svgOpen(width, height)];
  if (points.length > 0) {
    const [g0, g1] = extent(points.map((p) => p.generation));
    const [v0, v1] = extent(points.map((p) => p.value));
    const sx = scaler(g0, g1, PAD, width - PAD);
    const sy = scaler(v0, v1, height - PAD, PAD);
    for (const gen of opts.elicitationGenerations ?? []) {
      if (gen < g0 || gen > g1) continue;
      parts.push(
        `<line x1="${sx(gen).toFixed(1)}" y1="${PAD}" x2="${sx(gen).toFixed(1)}" y2="${height - PAD}" class="elicit-rule"/>`,
      );
    }
    const path = points
      .map((p) => `${sx(p.generation).toFixed(1)},${sy(p.value).toFixed(1)}`)
      .join(" ");
    parts.push(`<polyline points="${path}" fill="none" class="trajectory"/>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
