/** String-level SVG assembly; no DOM, no randomness, no timestamps. */

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, children = ""): string {
  const parts = Object.entries(attrs).map(([k, v]) => `${k}="${v}"`);
  const open = parts.length ? `<${tag} ${parts.join(" ")}` : `<${tag}`;
  return children === "" ? `${open}/>` : `${open}>${children}</${tag}>`;
}

export function text(content: string, attrs: Attrs): string {
  return el("text", attrs, escapeText(content));
}

export function escapeText(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** Fixed-precision coordinate so float jitter can't leak into the output. */
export function px(value: number): string {
  return value.toFixed(2).replace(/^-0\.00$/, "0.00");
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">` +
    body +
    "</svg>\n"
  );
}
