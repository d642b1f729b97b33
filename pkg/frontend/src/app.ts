/* Application wiring: owns the view state, routes widget changes to the
 * narrowest possible refresh (raster / audio / overlay only), and keeps the
 * label overlay in sync with the label endpoints. */

import { Api } from "./api.js";
import { renderClassGrid } from "./classgrid.js";
import { HOTKEY_HELP, bindHotkeys } from "./hotkeys.js";
import { RequestLog } from "./log.js";
import { Player } from "./player.js";
import { SpectrogramView } from "./spectro.js";
import { Box, ViewState } from "./state.js";
import { renderEditTable, renderSummaryTable, restoreEditCell } from "./tables.js";
import type { ClassGroups, FileEntry, LabelOut, MetadataResponse } from "./types.js";

export interface AppDeps {
  fetchFn?: typeof fetch;
  log?: RequestLog;
  username?: string | null;
  doc?: Document;
}

const PLOT_WIDTH = 1124;

export class App {
  readonly log: RequestLog;
  readonly api: Api;
  readonly state = new ViewState();
  readonly doc: Document;
  player!: Player;
  spectro!: SpectrogramView;

  files: FileEntry[] = [];
  labels: LabelOut[] = [];
  groups: ClassGroups = { core: [], misc: [], custom: [] };
  plotHeight = 256;
  zeroOutside = true;
  noiseReduce = false;
  /** What the player returns to outside a selection: raw, or the
   * noise-reduced reconstruction while that toggle is on. */
  baseAudioUrl = "";

  private pending = new Set<Promise<unknown>>();

  constructor(deps: AppDeps = {}) {
    this.doc = deps.doc ?? document;
    this.log = deps.log ?? new RequestLog();
    const fetchFn = deps.fetchFn ?? ((...args: Parameters<typeof fetch>) => fetch(...args));
    this.api = new Api(fetchFn, this.log, deps.username ?? null);
  }

  /** Await everything the last interaction kicked off (used by tests). */
  async idle(): Promise<void> {
    while (this.pending.size) {
      await Promise.allSettled([...this.pending]);
    }
  }

  private track<T>(p: Promise<T>): Promise<T> {
    this.pending.add(p);
    const drop = () => this.pending.delete(p);
    p.then(drop, drop);
    return p.catch((err) => {
      this.banner(err?.message ?? String(err));
      return undefined as T;
    });
  }

  private el<T extends HTMLElement>(id: string): T {
    const node = this.doc.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  /* -- boot ------------------------------------------------------------- */

  async boot(): Promise<void> {
    if (this.api.username === null) {
      this.api.username = this.resolveUsername();
    }
    this.player = new Player(this.el<HTMLAudioElement>("player"), this.log);
    this.spectro = new SpectrogramView(
      this.el<HTMLImageElement>("raster"),
      this.el<HTMLCanvasElement>("labels-canvas"),
      this.el<HTMLCanvasElement>("guides-canvas"),
      {
        onSelection: (box) => void this.track(this.onSelection(box)),
        onOutsideClick: () => this.onOutsideClick(),
        onLabelClick: (id) => this.onLabelClick(id),
        onZoomIn: (box) => void this.track(this.zoomIn(box)),
        onZoomReset: () => void this.track(this.zoomReset()),
      },
    );
    this.bindControls();
    this.renderHotkeyHelp();

    const session = await this.api.getSession();
    this.state.settings = session.settings;
    this.state.site = session.selected_site;
    this.syncSettingsWidgets();

    const [sites, palettes] = await Promise.all([this.api.getSites(), this.api.getPalettes()]);
    this.fillSelect("site-select", sites.sites, this.state.site ?? "");
    this.fillSelect("palette-select", palettes.palettes, this.state.settings.palette);

    await this.reloadClasses();
    this.files = await this.api.listFiles(this.state.settings.clip_seconds);
    this.renderFileSelect();
    if (this.files.length) await this.loadFile(this.files[0].file_name);
  }

  private resolveUsername(): string | null {
    try {
      const stored = window.localStorage?.getItem("labeller-name");
      if (stored) return stored;
      const answer = window.prompt?.("Labeller name (letters, digits, _ or -):") ?? "";
      const clean = answer.replace(/[^A-Za-z0-9_-]/g, "").slice(0, 64);
      if (clean) window.localStorage?.setItem("labeller-name", clean);
      return clean || null;
    } catch {
      return null;
    }
  }

  /* -- loading ------------------------------------------------------------ */

  async loadFile(fileName: string, segment = 0): Promise<void> {
    this.state.fileName = fileName;
    const entry = this.files.find((f) => f.file_name === fileName);
    this.state.nSegments = entry?.n_segments ?? 1;
    this.state.segment = Math.min(segment, this.state.nSegments - 1);
    this.state.zoom = null;
    this.state.selectedLabelId = null;
    (this.el<HTMLSelectElement>("file-select")).value = fileName;
    this.labels = await this.api.getLabels(fileName);
    await Promise.all([this.refreshRaster(), this.refreshMetadata()]);
    this.reloadAudio();
    this.renderOverlayAndTables();
    this.renderSegmentIndicator();
  }

  async refreshRaster(): Promise<void> {
    const { fileName, segment, settings } = this.state;
    if (!fileName) return;
    const zoom = this.state.zoom;
    const result = await this.api.fetchRaster(fileName, segment, {
      window: settings.window_size,
      overlap: settings.overlap_fraction,
      window_fn: settings.window_fn,
      palette: settings.palette,
      floor_db: settings.contrast_floor_db,
      width: PLOT_WIDTH,
      height: this.plotHeight,
      clip_s: settings.clip_seconds,
      zoom: zoom ? [zoom.tMin, zoom.tMax, zoom.fMin, zoom.fMax].join(",") : undefined,
      noise_reduce: this.noiseReduce || undefined,
    });
    this.state.extent = result.extent;
    this.spectro.setRaster(result.blobUrl, result.extent, PLOT_WIDTH, this.plotHeight);
    this.spectro.setLabels(this.labels, (cls) => this.groupOf(cls));
    this.el("zoom-indicator").textContent = zoom
      ? `${result.extent.t0.toFixed(2)}-${result.extent.t1.toFixed(2)} s, `
        + `${Math.round(result.extent.f0)}-${Math.round(result.extent.f1)} Hz`
      : "";
  }

  reloadAudio(): void {
    const { fileName, segment, settings } = this.state;
    if (!fileName) return;
    const raw = this.api.rawAudioUrl(fileName, segment, settings.gain_db, settings.clip_seconds);
    this.baseAudioUrl = raw;
    this.player.setRaw(raw);
  }

  async refreshMetadata(): Promise<void> {
    if (!this.state.fileName) return;
    const meta = await this.api.getMetadata(this.state.fileName);
    this.renderMetadata(meta);
  }

  async reloadClasses(): Promise<void> {
    const res = await this.api.getClasses(this.state.site, this.state.settings.use_bto_codes);
    this.groups = res.groups;
    this.renderClasses();
  }

  /* -- annotation loop ------------------------------------------------------ */

  private async onSelection(box: Box): Promise<void> {
    const { fileName, segment, settings } = this.state;
    if (!fileName) return;
    this.state.selection = box;
    const res = await this.api.postFilter(fileName, segment, {
      box: { t_min_s: box.tMin, t_max_s: box.tMax, f_min_hz: box.fMin, f_max_hz: box.fMax },
      mode: this.zeroOutside ? "zero" : "attenuate",
      noise_reduce: this.noiseReduce,
      gain_db: settings.gain_db,
      window: settings.window_size,
      overlap: settings.overlap_fraction,
      clip_s: settings.clip_seconds,
    });
    this.player.setFiltered(res.audio_url);
  }

  /** Recompute what the player should hold after a filter-related toggle. */
  private async rederivePlayback(): Promise<void> {
    const { fileName, segment, settings } = this.state;
    if (!fileName) return;
    const selection = this.state.selection;
    if (selection) {
      await this.onSelection(selection);
      return;
    }
    if (this.noiseReduce) {
      const res = await this.api.postFilter(fileName, segment, {
        noise_reduce: true,
        gain_db: settings.gain_db,
        window: settings.window_size,
        overlap: settings.overlap_fraction,
        clip_s: settings.clip_seconds,
      });
      this.baseAudioUrl = res.audio_url;
      this.player.setFiltered(res.audio_url);
    } else {
      this.baseAudioUrl = this.api.rawAudioUrl(
        fileName, segment, settings.gain_db, settings.clip_seconds);
      this.player.resetToRaw();
    }
  }

  private onOutsideClick(): void {
    this.state.selection = null;
    this.state.selectedLabelId = null;
    this.spectro.setSelectedLabel(null);
    this.player.setTo(this.baseAudioUrl);
  }

  private onLabelClick(id: string): void {
    this.state.selectedLabelId = id;
    this.spectro.setSelectedLabel(id);
  }

  async saveSelection(): Promise<void> {
    const box = this.spectro.currentSelection ?? this.state.selection;
    if (!box) {
      this.hint("Draw a box around a sound first.");
      return;
    }
    if (!this.state.selectedClass) {
      this.hint("Pick a class for the selection first.");
      return;
    }
    if (!this.state.fileName) return;
    const confidence = Number(this.el<HTMLInputElement>("confidence").value);
    const label = await this.api.postLabel(this.state.fileName, {
      t_min_s: box.tMin,
      t_max_s: box.tMax,
      f_min_hz: box.fMin,
      f_max_hz: box.fMax,
      class_name: this.state.selectedClass,
      confidence_pct: confidence,
      call_type: this.el<HTMLInputElement>("call-type").value,
      notes: this.el<HTMLTextAreaElement>("notes").value,
    });
    this.labels.push(label);
    this.state.selection = null;
    this.spectro.clearSelection();
    this.bumpFileCount(this.state.fileName, +1);
    this.renderOverlayAndTables();
  }

  async deleteSelected(): Promise<void> {
    const id = this.state.selectedLabelId ?? this.labels[this.labels.length - 1]?.id;
    if (!id) {
      this.hint("No label selected to delete.");
      return;
    }
    await this.api.deleteLabel(id);
    this.labels = this.labels.filter((l) => l.id !== id);
    this.state.selectedLabelId = null;
    if (this.state.fileName) this.bumpFileCount(this.state.fileName, -1);
    this.renderOverlayAndTables();
  }

  private async zoomIn(box: Box): Promise<void> {
    this.state.selection = null;  // coordinate frame changes under the zoom
    this.state.zoom = box;
    await this.refreshRaster();
  }

  private async zoomReset(): Promise<void> {
    if (!this.state.zoom) return;
    this.state.zoom = null;
    await this.refreshRaster();
  }

  /* -- settings: dependency-scoped refresh ----------------------------------- */

  private bindControls(): void {
    const on = (id: string, event: string, handler: (el: HTMLInputElement) => unknown) => {
      const node = this.el<HTMLInputElement>(id);
      node.addEventListener(event, () => void this.track(Promise.resolve(handler(node))));
    };

    // render-only settings: exactly one raster request each
    on("palette-select", "change", (el) => {
      this.state.settings.palette = el.value;
      return this.refreshRaster();
    });
    on("floor-db", "change", (el) => {
      this.state.settings.contrast_floor_db = Number(el.value);
      return this.refreshRaster();
    });
    on("plot-height", "change", (el) => {
      this.plotHeight = Math.max(64, Number(el.value) || 256);
      return this.refreshRaster();
    });
    on("show-guides", "change", (el) => {
      this.spectro.showGuides = el.checked;  // overlay only, no request
    });

    // sound settings: one audio + one raster request
    on("gain", "change", (el) => {
      this.state.settings.gain_db = Number(el.value) || 0;
      this.reloadAudio();
      return this.refreshRaster();
    });
    on("clip-seconds", "change", (el) => {
      const clip = Number(el.value);
      if (!(clip > 0)) return undefined;
      this.state.settings.clip_seconds = clip;
      this.state.segment = 0;
      this.recomputeSegmentCounts();
      this.reloadAudio();
      return this.refreshRaster();
    });

    // FFT settings: raster only
    on("fft-window", "change", (el) => {
      this.state.settings.window_size = Number(el.value);
      return this.refreshRaster();
    });
    on("fft-overlap", "change", (el) => {
      this.state.settings.overlap_fraction = Number(el.value);
      return this.refreshRaster();
    });
    on("window-fn", "change", (el) => {
      this.state.settings.window_fn = el.value;
      return this.refreshRaster();
    });
    on("zero-outside", "change", (el) => {
      this.zeroOutside = el.checked;  // applies to the next filter request
    });
    // noise reduction applies to the displayed spectrogram and the playback
    on("noise-reduce", "change", (el) => {
      this.noiseReduce = el.checked;
      return Promise.all([this.refreshRaster(), this.rederivePlayback()]);
    });

    // class list settings
    on("use-codes", "change", (el) => {
      this.state.settings.use_bto_codes = el.checked;
      return this.reloadClasses();
    });
    on("layout-select", "change", (el) => {
      this.state.layout = el.value === "flex" ? "flex" : "grid";
      this.renderClasses();
    });
    on("columns", "change", (el) => {
      this.state.columns = Math.max(1, Number(el.value) || 5);
      this.renderClasses();
    });

    on("site-select", "change", (el) => {
      this.state.site = el.value || null;
      return Promise.all([
        this.api.putSession({ selected_site: el.value }),
        this.reloadClasses(),
      ]);
    });

    on("add-class", "click", () => this.addClass());
    on("remove-class", "click", () => this.removeClass());
    on("save-selection", "click", () => this.saveSelection());
    on("delete-label", "click", () => this.deleteSelected());
    on("reset-zoom", "click", () => this.zoomReset());
    on("prev-file", "click", () => this.step(-1));
    on("next-file", "click", () => this.step(+1));
    on("prev-segment", "click", () => this.stepSegment(-1));
    on("next-segment", "click", () => this.stepSegment(+1));
    on("summary-refresh", "click", () => this.refreshSummary());
    on("confidence", "input", (el) => {
      this.el("confidence-value").textContent = `${el.value}%`;
    });
    this.el("file-select").addEventListener("change", () => {
      const value = this.el<HTMLSelectElement>("file-select").value;
      void this.track(this.loadFile(value));
    });
    this.el<HTMLAnchorElement>("download-labels").href = this.api.exportUrl();

    bindHotkeys(this.doc, {
      togglePlayback: () => this.player.toggle(),
      saveSelection: () => void this.track(this.saveSelection()),
      deleteSelected: () => void this.track(this.deleteSelected()),
      prevFile: () => void this.track(this.step(-1)),
      nextFile: () => void this.track(this.step(+1)),
    });
  }

  private async addClass(): Promise<void> {
    const input = this.el<HTMLInputElement>("new-class");
    const name = input.value.trim();
    if (!name) {
      this.hint("Type a class name to add.");
      return;
    }
    try {
      const added = await this.api.addClass(name, this.state.site);
      this.groups.custom.push({ name: added.name, display: added.name });
      input.value = "";
      this.renderClasses();
    } catch (err) {
      this.banner((err as { message?: string }).message ?? "could not add class");
    }
  }

  private async removeClass(): Promise<void> {
    const input = this.el<HTMLInputElement>("new-class");
    const name = input.value.trim();
    if (!name) {
      this.hint("Type the custom class name to remove.");
      return;
    }
    try {
      await this.api.removeClass(name, this.state.site);
      this.groups.custom = this.groups.custom.filter(
        (c) => c.name.toLowerCase() !== name.toLowerCase(),
      );
      if (this.state.selectedClass?.toLowerCase() === name.toLowerCase()) {
        this.state.selectedClass = null;
      }
      input.value = "";
      this.renderClasses();
    } catch (err) {
      this.banner((err as { message?: string }).message ?? "could not remove class");
    }
  }

  private async step(direction: number): Promise<void> {
    if (!this.files.length || !this.state.fileName) return;
    const index = this.files.findIndex((f) => f.file_name === this.state.fileName);
    const next = index + direction;
    if (next < 0 || next >= this.files.length) return;
    await this.loadFile(this.files[next].file_name);
  }

  private async stepSegment(direction: number): Promise<void> {
    const next = this.state.segment + direction;
    if (!this.state.fileName || next < 0 || next >= this.state.nSegments) return;
    await this.loadFile(this.state.fileName, next);
  }

  async onEditTableChange(id: string, changes: Record<string, unknown>): Promise<void> {
    const current = this.labels.find((l) => l.id === id);
    if (!current) return;
    const merged = { ...current, ...changes };
    if (merged.t_max_s <= merged.t_min_s || merged.f_max_hz <= merged.f_min_hz) {
      const field = Object.keys(changes)[0];
      if (field) restoreEditCell(this.el("edit-table"), id, field, current[field as keyof LabelOut]);
      this.hint("Box bounds must keep min < max; change discarded.");
      return;
    }
    try {
      const updated = await this.api.patchLabel(id, changes);
      this.labels = this.labels.map((l) => (l.id === id ? updated : l));
      this.renderOverlayAndTables();
    } catch (err) {
      this.banner((err as { message?: string }).message ?? "edit rejected");
      this.renderOverlayAndTables();  // restore server truth in the table
    }
  }

  async refreshSummary(): Promise<void> {
    const filePattern = this.el<HTMLInputElement>("summary-filter-file").value.trim();
    const classRaw = this.el<HTMLInputElement>("summary-filter-class").value.trim();
    const classes = classRaw ? classRaw.split(",").map((s) => s.trim()).filter(Boolean) : [];
    const rows = await this.api.getSummary(filePattern || undefined, classes);
    renderSummaryTable(this.el("summary-table"), rows,
      (fileName) => void this.track(this.loadFile(fileName)));
  }

  /* -- rendering ------------------------------------------------------------- */

  groupOf(cls: string): string {
    const low = cls.toLowerCase();
    if (this.groups.core.some((c) => c.name.toLowerCase() === low)) return "core";
    if (this.groups.misc.some((c) => c.name.toLowerCase() === low)) return "misc";
    if (this.groups.custom.some((c) => c.name.toLowerCase() === low)) return "custom";
    return "grey";
  }

  private renderClasses(): void {
    renderClassGrid(this.el("class-grid"), this.groups, {
      layout: this.state.layout,
      columns: this.state.columns,
      selected: this.state.selectedClass,
      onSelect: (name) => {
        this.state.selectedClass = name;
        this.renderClasses();
      },
      onRemove: (name) => {
        this.el<HTMLInputElement>("new-class").value = name;
        void this.track(this.removeClass());
      },
    });
    this.spectro?.setLabels(this.labels, (cls) => this.groupOf(cls));
  }

  private renderOverlayAndTables(): void {
    this.spectro.setLabels(this.labels, (cls) => this.groupOf(cls));
    renderEditTable(this.el("edit-table"), this.labels, {
      onEdit: (id, changes) => void this.track(this.onEditTableChange(id, changes)),
      onDelete: (id) => {
        this.state.selectedLabelId = id;
        void this.track(this.deleteSelected());
      },
    });
  }

  private renderFileSelect(): void {
    const select = this.el<HTMLSelectElement>("file-select");
    select.innerHTML = "";
    for (const f of this.files) {
      const option = this.doc.createElement("option");
      option.value = f.file_name;
      option.textContent = `${f.file_name} (${f.n_labels})`;
      select.appendChild(option);
    }
  }

  private renderSegmentIndicator(): void {
    this.el("segment-indicator").textContent =
      `segment ${this.state.segment + 1}/${this.state.nSegments}`;
  }

  private bumpFileCount(fileName: string, delta: number): void {
    const entry = this.files.find((f) => f.file_name === fileName);
    if (entry) entry.n_labels += delta;
    this.renderFileSelect();
    if (this.state.fileName) this.el<HTMLSelectElement>("file-select").value = this.state.fileName;
  }

  private recomputeSegmentCounts(): void {
    for (const f of this.files) {
      f.n_segments = Math.max(1, Math.ceil(f.duration_s / this.state.settings.clip_seconds));
    }
    const entry = this.files.find((f) => f.file_name === this.state.fileName);
    this.state.nSegments = entry?.n_segments ?? 1;
    this.renderSegmentIndicator();
  }

  private renderMetadata(meta: MetadataResponse): void {
    const body = this.el("metadata-body");
    body.innerHTML = "";
    const addRow = (name: string, value: string) => {
      const row = this.doc.createElement("div");
      row.className = "meta-row";
      const key = this.doc.createElement("span");
      key.className = "meta-key";
      key.textContent = name;
      const val = this.doc.createElement("span");
      val.textContent = value;
      row.append(key, val);
      body.appendChild(row);
    };
    addRow("recorded at", meta.recorded_at ?? "");
    if (meta.start_offset_s > 0) addRow("starts at", `+${meta.start_offset_s} s into recording`);
    const site = meta.site;
    addRow("recorder_name", site?.recorder_name ?? "");
    addRow("lat", site?.lat?.toString() ?? "");
    addRow("long", site?.long?.toString() ?? "");
    addRow("location_name", site?.location_name ?? "");
    addRow("location_county", site?.location_county ?? "");
    addRow("habitat_type", site?.habitat_type ?? "");
    addRow("dist_to_coastline", site?.dist_to_coastline?.toString() ?? "");
    for (const [key, value] of site?.extras ?? []) addRow(key, value);
  }

  private renderHotkeyHelp(): void {
    const list = this.el("hotkey-list");
    list.innerHTML = "";
    for (const [key, what] of HOTKEY_HELP) {
      const item = this.doc.createElement("li");
      item.innerHTML = `<kbd></kbd> `;
      (item.firstChild as HTMLElement).textContent = key;
      item.append(` ${what}`);
      list.appendChild(item);
    }
  }

  private fillSelect(id: string, values: string[], selected: string): void {
    const select = this.el<HTMLSelectElement>(id);
    select.innerHTML = "";
    if (id === "site-select") {
      const blank = this.doc.createElement("option");
      blank.value = "";
      blank.textContent = "(choose site)";
      select.appendChild(blank);
    }
    for (const value of values) {
      const option = this.doc.createElement("option");
      option.value = value;
      option.textContent = value;
      select.appendChild(option);
    }
    select.value = selected;
  }

  private syncSettingsWidgets(): void {
    const s = this.state.settings;
    this.el<HTMLInputElement>("gain").value = String(s.gain_db);
    this.el<HTMLInputElement>("clip-seconds").value = String(s.clip_seconds);
    this.el<HTMLInputElement>("floor-db").value = String(s.contrast_floor_db);
    this.el<HTMLSelectElement>("fft-window").value = String(s.window_size);
    this.el<HTMLSelectElement>("fft-overlap").value = String(s.overlap_fraction);
    this.el<HTMLSelectElement>("window-fn").value = s.window_fn;
    this.el<HTMLInputElement>("use-codes").checked = s.use_bto_codes;
  }

  private hint(message: string): void {
    this.el("status").textContent = message;
  }

  private banner(message: string): void {
    const node = this.el("banner");
    node.textContent = message;
    node.hidden = !message;
  }
}

declare global {
  interface Window {
    sonoboxApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("raster")) {
  const app = new App();
  window.sonoboxApp = app;
  void app.boot();
}
