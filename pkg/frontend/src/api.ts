/* Thin typed client over fetch. Every call is recorded in the request log;
 * the raster goes through fetch (rather than an <img> src) so the extent
 * headers are readable and the blob can be handed to the image element. */

import { RequestLog } from "./log.js";
import type { Extent } from "./state.js";
import type {
  ClassesResponse,
  FileEntry,
  FilterResponse,
  LabelOut,
  MetadataResponse,
  SessionResponse,
  SummaryRow,
} from "./types.js";

export interface RasterParams {
  window?: number;
  overlap?: number;
  window_fn?: string;
  palette?: string;
  floor_db?: number;
  width?: number;
  height?: number;
  clip_s?: number;
  zoom?: string;
  noise_reduce?: boolean;
}

export interface RasterResult {
  blobUrl: string;
  extent: Extent;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
  field?: string;
}

type FetchFn = typeof fetch;

function query(params: Record<string, unknown>): string {
  const pairs = Object.entries(params).filter(([, v]) => v !== undefined && v !== null);
  if (!pairs.length) return "";
  const qs = new URLSearchParams();
  for (const [k, v] of pairs) qs.set(k, String(v));
  return "?" + qs.toString();
}

export class Api {
  private abortRaster: AbortController | null = null;

  constructor(
    private fetchFn: FetchFn,
    readonly log: RequestLog,
    public username: string | null = null,
  ) {}

  private headers(): Record<string, string> {
    return this.username ? { "X-Username": this.username } : {};
  }

  private async request<T>(
    kind: Parameters<RequestLog["record"]>[0],
    method: string,
    url: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    this.log.record(kind, method, url);
    const init: RequestInit = { method, headers: this.headers(), signal };
    if (body !== undefined) {
      init.headers = { ...init.headers, "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(url, init);
    if (!res.ok) {
      let detail: Partial<ApiError> = {};
      try {
        detail = await res.json();
      } catch {
        /* non-JSON error body */
      }
      throw {
        status: res.status,
        code: detail.code ?? "error",
        message: detail.message ?? res.statusText,
        field: detail.field,
      } satisfies ApiError;
    }
    if (res.status === 204) return undefined as T;
    return (await res.json()) as T;
  }

  listFiles(clipS?: number): Promise<FileEntry[]> {
    return this.request("files", "GET", "/api/files" + query({ clip_s: clipS }));
  }

  /** Latest-wins: a new raster fetch aborts the previous in-flight one. */
  async fetchRaster(file: string, segment: number, params: RasterParams): Promise<RasterResult> {
    const url = `/api/files/${encodeURIComponent(file)}/segments/${segment}/spectrogram`
      + query(params as Record<string, unknown>);
    this.abortRaster?.abort();
    this.abortRaster = new AbortController();
    this.log.record("raster", "GET", url);
    const res = await this.fetchFn(url, {
      headers: this.headers(),
      signal: this.abortRaster.signal,
    });
    if (!res.ok) {
      const detail = await res.json().catch(() => ({}));
      throw { status: res.status, code: detail.code ?? "error", message: detail.message ?? "" };
    }
    const blob = await res.blob();
    const extent: Extent = {
      t0: Number(res.headers.get("X-Extent-T0")),
      t1: Number(res.headers.get("X-Extent-T1")),
      f0: Number(res.headers.get("X-Extent-F0")),
      f1: Number(res.headers.get("X-Extent-F1")),
    };
    return { blobUrl: URL.createObjectURL(blob), extent };
  }

  rawAudioUrl(file: string, segment: number, gainDb: number, clipS?: number): string {
    return `/api/files/${encodeURIComponent(file)}/segments/${segment}/audio`
      + query({ gain_db: gainDb || undefined, clip_s: clipS });
  }

  postFilter(
    file: string,
    segment: number,
    body: {
      box?: { t_min_s: number; t_max_s: number; f_min_hz: number; f_max_hz: number };
      f_range?: [number, number];
      mode?: string;
      noise_reduce?: boolean;
      gain_db?: number;
      window?: number;
      overlap?: number;
      clip_s?: number;
    },
  ): Promise<FilterResponse> {
    const url = `/api/files/${encodeURIComponent(file)}/segments/${segment}/filter`;
    return this.request("filter", "POST", url, body);
  }

  getLabels(file: string): Promise<LabelOut[]> {
    return this.request("labels", "GET", `/api/files/${encodeURIComponent(file)}/labels`);
  }

  postLabel(file: string, body: object): Promise<LabelOut> {
    return this.request("labels", "POST", `/api/files/${encodeURIComponent(file)}/labels`, body);
  }

  patchLabel(id: string, changes: object): Promise<LabelOut> {
    return this.request("labels", "PATCH", `/api/labels/${id}`, changes);
  }

  deleteLabel(id: string): Promise<void> {
    return this.request("labels", "DELETE", `/api/labels/${id}`);
  }

  exportUrl(): string {
    return "/api/labels/export";
  }

  getSummary(filePattern?: string, classNames?: string[]): Promise<SummaryRow[]> {
    const qs = new URLSearchParams();
    if (filePattern) qs.set("file", filePattern);
    for (const c of classNames ?? []) qs.append("class", c);
    const suffix = qs.toString() ? "?" + qs.toString() : "";
    return this.request("summary", "GET", "/api/summary" + suffix);
  }

  getSites(): Promise<{ sites: string[] }> {
    return this.request("sites", "GET", "/api/sites");
  }

  getClasses(site: string | null, useCodes: boolean): Promise<ClassesResponse> {
    return this.request(
      "classes", "GET",
      "/api/classes" + query({ site: site ?? undefined, use_codes: useCodes || undefined }),
    );
  }

  addClass(name: string, site: string | null): Promise<{ name: string }> {
    return this.request("class", "POST", "/api/classes", { name, site });
  }

  removeClass(name: string, site: string | null): Promise<void> {
    return this.request(
      "class", "DELETE",
      "/api/classes" + query({ name, site: site ?? undefined }),
    );
  }

  getMetadata(file: string): Promise<MetadataResponse> {
    return this.request("metadata", "GET", `/api/files/${encodeURIComponent(file)}/metadata`);
  }

  getPalettes(): Promise<{ palettes: string[] }> {
    return this.request("palettes", "GET", "/api/palettes");
  }

  getSession(): Promise<SessionResponse> {
    return this.request("session", "GET", "/api/session");
  }

  putSession(body: object): Promise<SessionResponse> {
    return this.request("session", "PUT", "/api/session", body);
  }
}
