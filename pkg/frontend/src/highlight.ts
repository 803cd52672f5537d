import type { Span } from "./types";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Render text with highlight spans as HTML, wrapping each span in <em>.
 *
 * Span offsets count Unicode code points (the wire format), not UTF-16
 * units, so "héros💡" style inputs stay aligned. Overlapping or
 * out-of-range spans are clamped and merged rather than rejected: the
 * annotator should still see the sentence even if a span is off.
 */
export function renderHighlighted(text: string, spans: Span[]): string {
  const points = Array.from(text);
  const ordered = spans
    .map(([start, end]): Span => [
      Math.max(0, Math.min(start, points.length)),
      Math.max(0, Math.min(end, points.length)),
    ])
    .filter(([start, end]) => start < end)
    .sort((a, b) => a[0] - b[0]);
  const merged: Span[] = [];
  for (const span of ordered) {
    const last = merged[merged.length - 1];
    if (last && span[0] <= last[1]) {
      last[1] = Math.max(last[1], span[1]);
    } else {
      merged.push([span[0], span[1]]);
    }
  }
  const pieces: string[] = [];
  let cursor = 0;
  for (const [start, end] of merged) {
    pieces.push(escapeHtml(points.slice(cursor, start).join("")));
    pieces.push(`<em>${escapeHtml(points.slice(start, end).join(""))}</em>`);
    cursor = end;
  }
  pieces.push(escapeHtml(points.slice(cursor).join("")));
  return pieces.join("");
}
