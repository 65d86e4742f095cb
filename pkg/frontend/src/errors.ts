/** Error taxonomy for the figure pipeline.
 *
 * Input problems are split by what the caller can do about them: a file
 * with no data rows (EmptyInput), a file whose header lacks required
 * columns (MissingColumns, which lists them), and a directory with
 * nothing renderable in it (InputNotFound).  All of them map to a
 * non-zero process exit in the CLI.
 */

export class RenderError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

export class EmptyInput extends RenderError {
  constructor(public readonly file: string) {
    super(`EmptyInput: ${file} contains no data rows`);
  }
}

export class MissingColumns extends RenderError {
  constructor(
    public readonly file: string,
    public readonly missing: readonly string[],
  ) {
    super(
      `MissingColumns: ${file} lacks required column(s): ${missing.join(", ")}`,
    );
  }
}

export class InputNotFound extends RenderError {
  constructor(public readonly path: string) {
    super(`InputNotFound: ${path} does not exist or holds no renderable inputs`);
  }
}
