import { ResultRow, TrajectoryPoint } from "./csv";
import {
  el, fmt, linearScale, Scale, SERIES_COLORS, text, THEORY_COLOR, tickLabel, ticks,
} from "./svg";

export type FigureKind = "mean_vs_b" | "var_vs_b" | "trajectory" | "alpha_sweep";

export interface FigureSpec {
  kind: FigureKind;
  overlay: boolean;
  width: number;
  height: number;
  title?: string;
}

export const DEFAULT_SPEC: FigureSpec = {
  kind: "mean_vs_b",
  overlay: true,
  width: 640,
  height: 460,
};

const MARGIN = { left: 64, right: 20, top: 36, bottom: 50 };

interface Series {
  label: string;
  color: string;
  points: { x: number; y: number; err: number; theory: number }[];
}

function groupSeries(rows: ResultRow[], kind: FigureKind): Series[] {
  const value = (r: ResultRow) =>
    kind === "var_vs_b" ? { y: r.var_per_time, err: 3 * r.sem_var }
      : { y: r.mean_per_time, err: 3 * r.sem_mean };
  const keys = new Map<string, ResultRow[]>();
  for (const r of rows) {
    const k = `${r.model} γ=${tickLabel(r.gamma)}`;
    if (!keys.has(k)) keys.set(k, []);
    keys.get(k)!.push(r);
  }
  return [...keys.entries()].map(([label, rs], i) => ({
    label,
    color: SERIES_COLORS[i % SERIES_COLORS.length],
    points: rs
      .slice()
      .sort((p, q) => p.b - q.b)
      .map((r) => ({ x: r.b, ...value(r), theory: r.lambda_theory })),
  }));
}

function frame(spec: FigureSpec, xs: Scale, ys: Scale, xlab: string, ylab: string): string {
  const parts: string[] = [];
  const [x0, x1] = xs.range;
  const [y0, y1] = ys.range;
  parts.push(el("rect", {
    x: x0, y: y1, width: x1 - x0, height: y0 - y1,
    fill: "none", stroke: "#444", "stroke-width": 1,
  }));
  for (const tv of ticks(xs.domain[0], xs.domain[1])) {
    const px = xs(tv);
    parts.push(el("line", { x1: px, y1: y0, x2: px, y2: y0 + 5, stroke: "#444" }));
    parts.push(text(px, y0 + 18, tickLabel(tv)));
  }
  for (const tv of ticks(ys.domain[0], ys.domain[1])) {
    const py = ys(tv);
    parts.push(el("line", { x1: x0 - 5, y1: py, x2: x0, y2: py, stroke: "#444" }));
    parts.push(text(x0 - 8, py + 4, tickLabel(tv), "end"));
  }
  parts.push(text((x0 + x1) / 2, y0 + 38, xlab, "middle", 13));
  parts.push(el("g", {
    transform: `translate(16 ${fmt((y0 + y1) / 2)}) rotate(-90)`,
  }, text(0, 0, ylab, "middle", 13)));
  if (spec.title) parts.push(text((x0 + x1) / 2, 20, spec.title, "middle", 14));
  return parts.join("\n");
}

function errorBar(px: number, yLo: number, yHi: number, color: string): string {
  return [
    el("line", { x1: px, y1: yLo, x2: px, y2: yHi, stroke: color, "stroke-width": 1.2 }),
    el("line", { x1: px - 4, y1: yLo, x2: px + 4, y2: yLo, stroke: color, "stroke-width": 1.2 }),
    el("line", { x1: px - 4, y1: yHi, x2: px + 4, y2: yHi, stroke: color, "stroke-width": 1.2 }),
  ].join("");
}

function renderBoxFigure(rows: ResultRow[], spec: FigureSpec): string {
  const series = groupSeries(rows, spec.kind);
  const xsAll = series.flatMap((s) => s.points.map((p) => p.x));
  const ysAll = series.flatMap((s) =>
    s.points.flatMap((p) => [p.y - p.err, p.y + p.err, spec.overlay ? p.theory : p.y]));
  const xLo = xsAll.length ? Math.min(0, ...xsAll) : 0;
  const xHi = xsAll.length ? Math.max(...xsAll) * 1.05 : 1;
  const yLo = ysAll.length ? Math.min(0, ...ysAll) : 0;
  const yHi = ysAll.length ? Math.max(...ysAll) * 1.08 : 1;
  const xs = linearScale([xLo, xHi], [MARGIN.left, spec.width - MARGIN.right]);
  const ys = linearScale([yLo, yHi], [spec.height - MARGIN.bottom, MARGIN.top]);

  const dataParts: string[] = [];
  const theoryParts: string[] = [];
  series.forEach((s, si) => {
    for (const p of s.points) {
      dataParts.push(errorBar(xs(p.x), ys(p.y - p.err), ys(p.y + p.err), s.color));
      dataParts.push(el("circle", { cx: xs(p.x), cy: ys(p.y), r: 3.2, fill: s.color }));
    }
    if (spec.overlay && s.points.length > 0) {
      const path = s.points.map((p) => `${fmt(xs(p.x))},${fmt(ys(p.theory))}`).join(" ");
      theoryParts.push(el("polyline", {
        points: path, fill: "none", stroke: THEORY_COLOR,
        "stroke-width": 1.4, "stroke-dasharray": "6 3",
      }));
    }
    // legend
    const ly = MARGIN.top + 14 + 16 * si;
    dataParts.push(el("circle", { cx: MARGIN.left + 12, cy: ly - 4, r: 3.2, fill: s.color }));
    dataParts.push(text(MARGIN.left + 22, ly, s.label, "start", 11));
  });

  const ylab = spec.kind === "var_vs_b" ? "variance / time" : "mean / time";
  return [
    frame(spec, xs, ys, "box edge b", ylab),
    el("g", { id: "data-layer" }, dataParts.join("\n")),
    el("g", { id: "theory-layer" }, theoryParts.join("\n")),
  ].join("\n");
}

function renderTrajectory(points: TrajectoryPoint[], spec: FigureSpec): string {
  const tHi = points.length ? points[points.length - 1].time : 1;
  const sAll = points.map((p) => p.state);
  const sLo = points.length ? Math.min(0, ...sAll) : 0;
  const sHi = points.length ? Math.max(1, ...sAll) : 1;
  const xs = linearScale([0, tHi], [MARGIN.left, spec.width - MARGIN.right]);
  const ys = linearScale([sLo, sHi], [spec.height - MARGIN.bottom, MARGIN.top]);
  const path = points.map((p) => `${fmt(xs(p.time))},${fmt(ys(p.state))}`).join(" ");
  const body = points.length
    ? el("polyline", { points: path, fill: "none", stroke: SERIES_COLORS[0], "stroke-width": 0.8 })
    : "";
  return [
    frame(spec, xs, ys, "time", "state"),
    el("g", { id: "data-layer" }, body),
    el("g", { id: "theory-layer" }, ""),
  ].join("\n");
}

export function renderResultFigure(rows: ResultRow[], spec: FigureSpec): string {
  const inner = renderBoxFigure(rows, spec);
  return wrap(inner, spec);
}

export function renderTrajectoryFigure(points: TrajectoryPoint[], spec: FigureSpec): string {
  return wrap(renderTrajectory(points, spec), spec);
}

function wrap(inner: string, spec: FigureSpec): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${spec.width}" height="${spec.height}" `
    + `viewBox="0 0 ${spec.width} ${spec.height}">`,
    el("rect", { x: 0, y: 0, width: spec.width, height: spec.height, fill: "#ffffff" }),
    inner,
    "</svg>",
    "",
  ].join("\n");
}
