/** Deterministic SVG assembly: plain string building, fixed styles, no
 * timestamps or random ids, numbers printed through one formatter. */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const r = Math.round(x * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

export function el(tag: string, attrs: Record<string, string | number>, body = ""): string {
  const a = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : v}"`)
    .join(" ");
  return body === "" ? `<${tag} ${a}/>` : `<${tag} ${a}>${body}</${tag}>`;
}

export function text(x: number, y: number, s: string, anchor = "middle", size = 11): string {
  return el("text", {
    x, y, "text-anchor": anchor, "font-family": "Helvetica, Arial, sans-serif",
    "font-size": size, fill: "#222",
  }, escapeXml(s));
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Round tick positions covering the domain (1-2-5 progression). */
export function ticks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const step0 = (hi - lo) / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (mag * m >= step0) { step = mag * m; break; }
  }
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-9 * step; v += step) {
    out.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  return out;
}

export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const av = Math.abs(v);
  if (av >= 1e4 || av < 1e-3) return v.toExponential(1).replace("e+", "e");
  return String(Math.round(v * 1e6) / 1e6);
}

export const SERIES_COLORS = ["#1f6fb5", "#d1495b", "#3b8c5a", "#8a5bbf", "#c98a1e", "#4a4a4a"];
export const THEORY_COLOR = "#111";
