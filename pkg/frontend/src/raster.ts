/** Scene rasterization to PNG.
 *
 * A deliberately small software renderer: square-brush line walking,
 * scanline-filled circles, and a 5x7 bitmap font (input is lowercased;
 * the vector backend keeps true text).  Encoding goes through pngjs
 * with pinned deflate options so identical scenes produce identical
 * bytes.
 */

import { PNG } from "pngjs";

import { GLYPH_H, GLYPH_W, GLYPHS } from "./font.js";
import type { Primitive, Scene, TextItem } from "./scene.js";

type RGB = readonly [number, number, number];

function parseColor(spec: string): RGB {
  const m = /^#([0-9a-fA-F]{6})$/.exec(spec);
  if (!m) {
    throw new RangeError(`unsupported color ${spec}; use #rrggbb`);
  }
  const v = parseInt(m[1]!, 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

class Canvas {
  readonly png: PNG;

  constructor(readonly width: number, readonly height: number, background: RGB) {
    this.png = new PNG({ width, height });
    for (let i = 0; i < width * height; i += 1) {
      this.png.data[i * 4] = background[0];
      this.png.data[i * 4 + 1] = background[1];
      this.png.data[i * 4 + 2] = background[2];
      this.png.data[i * 4 + 3] = 255;
    }
  }

  set(x: number, y: number, color: RGB): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) {
      return;
    }
    const i = (y * this.width + x) * 4;
    this.png.data[i] = color[0];
    this.png.data[i + 1] = color[1];
    this.png.data[i + 2] = color[2];
    this.png.data[i + 3] = 255;
  }

  brush(x: number, y: number, size: number, color: RGB): void {
    const lo = -Math.floor((size - 1) / 2);
    const hi = Math.ceil((size - 1) / 2);
    for (let dy = lo; dy <= hi; dy += 1) {
      for (let dx = lo; dx <= hi; dx += 1) {
        this.set(x + dx, y + dy, color);
      }
    }
  }

  line(
    x1: number, y1: number, x2: number, y2: number,
    width: number, color: RGB, dash?: readonly number[],
  ): void {
    const length = Math.hypot(x2 - x1, y2 - y1);
    const steps = Math.max(1, Math.ceil(length * 2));
    const size = Math.max(1, Math.round(width));
    const period = dash ? dash.reduce((a, b) => a + b, 0) : 0;
    for (let i = 0; i <= steps; i += 1) {
      const f = i / steps;
      if (dash && period > 0) {
        const along = (length * f) % period;
        let acc = 0;
        let draw = true;
        for (let d = 0; d < dash.length; d += 1) {
          acc += dash[d]!;
          if (along < acc) {
            draw = d % 2 === 0;
            break;
          }
        }
        if (!draw) {
          continue;
        }
      }
      this.brush(
        Math.round(x1 + (x2 - x1) * f),
        Math.round(y1 + (y2 - y1) * f),
        size,
        color,
      );
    }
  }

  disc(cx: number, cy: number, r: number, color: RGB): void {
    const ri = Math.max(1, Math.round(r));
    for (let dy = -ri; dy <= ri; dy += 1) {
      for (let dx = -ri; dx <= ri; dx += 1) {
        if (dx * dx + dy * dy <= ri * ri + 0.25) {
          this.set(Math.round(cx) + dx, Math.round(cy) + dy, color);
        }
      }
    }
  }

  fillRect(x: number, y: number, w: number, h: number, color: RGB): void {
    const x0 = Math.round(x);
    const y0 = Math.round(y);
    for (let yy = y0; yy < y0 + Math.round(h); yy += 1) {
      for (let xx = x0; xx < x0 + Math.round(w); xx += 1) {
        this.set(xx, yy, color);
      }
    }
  }

  text(item: TextItem): void {
    const color = parseColor(item.color);
    const scale = Math.max(1, Math.round(item.size / GLYPH_H));
    const chars = [...item.s.toLowerCase()];
    const advance = (GLYPH_W + 1) * scale;
    const widthPx = chars.length * advance - scale;
    let offset = 0;
    if (item.anchor === "middle") {
      offset = -widthPx / 2;
    } else if (item.anchor === "end") {
      offset = -widthPx;
    }
    const baseX = Math.round(item.x);
    const baseY = Math.round(item.y);
    for (let c = 0; c < chars.length; c += 1) {
      const glyph = GLYPHS[chars[c]!];
      if (!glyph) {
        continue;
      }
      const cellX = offset + c * advance;
      for (let row = 0; row < GLYPH_H; row += 1) {
        const bits = glyph[row]!;
        for (let col = 0; col < GLYPH_W; col += 1) {
          if (((bits >> (GLYPH_W - 1 - col)) & 1) === 0) {
            continue;
          }
          for (let sy = 0; sy < scale; sy += 1) {
            for (let sx = 0; sx < scale; sx += 1) {
              // glyph-local pixel, before placement
              const gx = cellX + col * scale + sx;
              const gy = (row - GLYPH_H) * scale + sy;
              if (item.rotate === -90) {
                this.set(baseX + gy, baseY - gx, color);
              } else {
                this.set(baseX + gx, baseY + gy, color);
              }
            }
          }
        }
      }
    }
  }
}

function draw(canvas: Canvas, item: Primitive): void {
  switch (item.kind) {
    case "rect":
      canvas.fillRect(item.x, item.y, item.w, item.h, parseColor(item.fill));
      break;
    case "line":
      canvas.line(
        item.x1, item.y1, item.x2, item.y2,
        item.width, parseColor(item.stroke), item.dash,
      );
      break;
    case "polyline": {
      const color = parseColor(item.stroke);
      for (let i = 1; i < item.points.length; i += 1) {
        const [x1, y1] = item.points[i - 1]!;
        const [x2, y2] = item.points[i]!;
        canvas.line(x1, y1, x2, y2, item.width, color, item.dash);
      }
      break;
    }
    case "circle":
      canvas.disc(item.cx, item.cy, item.r, parseColor(item.fill));
      break;
    case "text":
      canvas.text(item);
      break;
  }
}

export function toPng(scene: Scene): Buffer {
  const canvas = new Canvas(
    Math.round(scene.width),
    Math.round(scene.height),
    parseColor(scene.background),
  );
  for (const item of scene.items) {
    draw(canvas, item);
  }
  return PNG.sync.write(canvas.png, {
    deflateLevel: 9,
    deflateStrategy: 0,
    filterType: 0,
  });
}
