/** Input CSV does not carry the headers the requested figure kind needs. */
export class HeaderMismatch extends Error {
  constructor(expected: readonly string[], got: readonly string[]) {
    super(`header mismatch: expected ${expected.join(",")}, got ${got.join(",")}`);
    this.name = "HeaderMismatch";
  }
}

/** Input CSV has a header but no data rows. */
export class EmptyInput extends Error {
  constructor(path: string) {
    super(`no data rows in ${path}`);
    this.name = "EmptyInput";
  }
}
