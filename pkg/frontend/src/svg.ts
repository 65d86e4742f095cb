/** Scene serialization to standalone SVG markup. */

import type { Primitive, Scene } from "./scene.js";

const FONT_STACK = "Helvetica, Arial, sans-serif";

function esc(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;");
}

function px(v: number): string {
  // fixed short form keeps payloads small and byte-stable
  return String(Number(v.toFixed(2)));
}

function one(item: Primitive): string {
  switch (item.kind) {
    case "rect":
      return `<rect x="${px(item.x)}" y="${px(item.y)}" width="${px(item.w)}" height="${px(item.h)}" fill="${item.fill}"/>`;
    case "line": {
      const dash = item.dash ? ` stroke-dasharray="${item.dash.join(" ")}"` : "";
      return `<line x1="${px(item.x1)}" y1="${px(item.y1)}" x2="${px(item.x2)}" y2="${px(item.y2)}" stroke="${item.stroke}" stroke-width="${px(item.width)}"${dash}/>`;
    }
    case "polyline": {
      const pts = item.points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
      const dash = item.dash ? ` stroke-dasharray="${item.dash.join(" ")}"` : "";
      return `<polyline points="${pts}" fill="none" stroke="${item.stroke}" stroke-width="${px(item.width)}" stroke-linejoin="round"${dash}/>`;
    }
    case "circle":
      return `<circle cx="${px(item.cx)}" cy="${px(item.cy)}" r="${px(item.r)}" fill="${item.fill}"/>`;
    case "text": {
      const transform = item.rotate
        ? ` transform="rotate(${item.rotate} ${px(item.x)} ${px(item.y)})"`
        : "";
      return `<text x="${px(item.x)}" y="${px(item.y)}" font-family="${FONT_STACK}" font-size="${px(item.size)}" text-anchor="${item.anchor}" fill="${item.color}"${transform}>${esc(item.s)}</text>`;
    }
  }
}

export function toSvg(scene: Scene): string {
  const body = scene.items.map(one).join("\n  ");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">
  <rect x="0" y="0" width="${scene.width}" height="${scene.height}" fill="${scene.background}"/>
  ${body}
</svg>
`;
}
