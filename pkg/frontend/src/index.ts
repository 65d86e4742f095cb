export { EmptyInput, InputNotFound, MissingColumns, RenderError } from "./errors.js";
export { MONOTONE_COLUMNS, TRACE_COLUMNS, readCsv } from "./csv.js";
export {
  flowFigure,
  fmtBeta,
  groupFlows,
  groupMonotone,
  groupScatter,
  marginBars,
  marginFigure,
  monotoneFigure,
  scatterFigure,
} from "./figures.js";
export { renderDirectory, renderFigure } from "./render.js";
export type { FigureKind, FigureSpec, Format } from "./render.js";
export { toSvg } from "./svg.js";
export { toPng } from "./raster.js";
export type { Scene } from "./scene.js";
