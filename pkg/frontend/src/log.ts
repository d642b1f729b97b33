/* Request log: every outgoing HTTP-triggering action is recorded with a
 * kind, so tests can assert that a settings change touches only the
 * endpoints it depends on (the dependency-scoped refresh contract). */

export type RequestKind =
  | "raster"
  | "audio"
  | "filter"
  | "labels"
  | "class"
  | "classes"
  | "files"
  | "session"
  | "sites"
  | "metadata"
  | "summary"
  | "palettes";

export interface RequestRecord {
  kind: RequestKind;
  method: string;
  url: string;
}

export class RequestLog {
  readonly entries: RequestRecord[] = [];

  record(kind: RequestKind, method: string, url: string): void {
    this.entries.push({ kind, method, url });
  }

  kinds(): string[] {
    return this.entries.map((e) => e.kind);
  }

  clear(): void {
    this.entries.length = 0;
  }
}
