/* The spectrogram stack: an <img> holding the server raster underneath two
 * transparent canvases, one for saved label boxes and one for live drag
 * guides. The raster never needs re-fetching when labels change; only the
 * overlay canvases redraw. */

import { Box, Extent, boxFromDrag, freqToPx, timeToPx } from "./state.js";
import type { LabelOut } from "./types.js";

export const GROUP_COLORS: Record<string, string> = {
  core: "#3cb44b",
  misc: "#f58230",
  custom: "#0082c8",
  grey: "#919191",
};

const MIN_DRAG_PX = 3;

export interface SpectroCallbacks {
  onSelection(box: Box): void;
  onOutsideClick(): void;
  onLabelClick(id: string): void;
  onZoomIn(box: Box): void;
  onZoomReset(): void;
}

interface DragState {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  moved: boolean;
}

export class SpectrogramView {
  extent: Extent | null = null;
  private labels: LabelOut[] = [];
  private groupOf: (cls: string) => string = () => "grey";
  private selection: Box | null = null;
  private selectedLabelId: string | null = null;
  private drag: DragState | null = null;
  showGuides = true;

  constructor(
    private img: HTMLImageElement,
    private labelsCanvas: HTMLCanvasElement,
    private guidesCanvas: HTMLCanvasElement,
    private callbacks: SpectroCallbacks,
  ) {
    const target = guidesCanvas;
    target.addEventListener("mousedown", (e) => this.onDown(e));
    target.addEventListener("mousemove", (e) => this.onMove(e));
    target.addEventListener("mouseup", (e) => this.onUp(e));
    target.addEventListener("mouseleave", () => this.onLeave());
    target.addEventListener("dblclick", (e) => this.onDblClick(e));
  }

  /** Swap in a new raster and its exact extent; canvases adopt its size. */
  setRaster(blobUrl: string, extent: Extent, widthPx: number, heightPx: number): void {
    this.img.src = blobUrl;
    this.extent = extent;
    for (const canvas of [this.labelsCanvas, this.guidesCanvas]) {
      canvas.width = widthPx;
      canvas.height = heightPx;
    }
    this.selection = null;
    this.redrawLabels();
    this.clearGuides();
  }

  setLabels(labels: LabelOut[], groupOf: (cls: string) => string): void {
    this.labels = labels;
    this.groupOf = groupOf;
    this.redrawLabels();
  }

  setSelectedLabel(id: string | null): void {
    this.selectedLabelId = id;
    this.redrawLabels();
  }

  get currentSelection(): Box | null {
    return this.selection;
  }

  clearSelection(): void {
    this.selection = null;
    this.clearGuides();
  }

  /* -- overlay drawing ---------------------------------------------------- */

  redrawLabels(): void {
    const ctx = this.labelsCanvas.getContext("2d");
    if (!ctx || !this.extent) return;
    const { width, height } = this.labelsCanvas;
    ctx.clearRect(0, 0, width, height);
    for (const label of this.labels) {
      const x0 = timeToPx(label.t_min_s, width, this.extent);
      const x1 = timeToPx(label.t_max_s, width, this.extent);
      const y0 = freqToPx(label.f_max_hz, height, this.extent);
      const y1 = freqToPx(label.f_min_hz, height, this.extent);
      if (x1 < 0 || x0 > width || y1 < 0 || y0 > height) continue;
      const color = GROUP_COLORS[this.groupOf(label.class_name)] ?? GROUP_COLORS.grey;
      ctx.strokeStyle = color;
      ctx.lineWidth = label.id === this.selectedLabelId ? 3 : 2;
      ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
      ctx.fillStyle = color;
      const tagY = y0 >= 14 ? y0 - 4 : y1 + 12;
      ctx.font = "11px sans-serif";
      ctx.fillText(label.class_name, Math.max(2, x0 + 2), tagY);
    }
  }

  private clearGuides(): void {
    const ctx = this.guidesCanvas.getContext("2d");
    ctx?.clearRect(0, 0, this.guidesCanvas.width, this.guidesCanvas.height);
  }

  private drawGuides(): void {
    const ctx = this.guidesCanvas.getContext("2d");
    if (!ctx || !this.drag) return;
    const { width, height } = this.guidesCanvas;
    ctx.clearRect(0, 0, width, height);
    const { x0, y0, x1, y1 } = this.drag;
    ctx.save();
    ctx.strokeStyle = "rgba(255,255,255,0.9)";
    ctx.setLineDash([4, 3]);
    ctx.lineWidth = 1;
    // time/frequency guide lines tracing the box edges across the plot
    for (const x of [Math.min(x0, x1), Math.max(x0, x1)]) {
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, height);
      ctx.stroke();
    }
    for (const y of [Math.min(y0, y1), Math.max(y0, y1)]) {
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(width, y);
      ctx.stroke();
    }
    ctx.setLineDash([]);
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 1.5;
    ctx.strokeRect(Math.min(x0, x1), Math.min(y0, y1), Math.abs(x1 - x0), Math.abs(y1 - y0));
    ctx.restore();
  }

  /* -- pointer handling ---------------------------------------------------- */

  /** Event position in canvas pixel coordinates (robust to CSS scaling). */
  private pos(e: MouseEvent): { x: number; y: number } {
    const rect = this.guidesCanvas.getBoundingClientRect();
    const scaleX = rect.width > 0 ? this.guidesCanvas.width / rect.width : 1;
    const scaleY = rect.height > 0 ? this.guidesCanvas.height / rect.height : 1;
    return { x: (e.clientX - rect.left) * scaleX, y: (e.clientY - rect.top) * scaleY };
  }

  private onDown(e: MouseEvent): void {
    const { x, y } = this.pos(e);
    this.drag = { x0: x, y0: y, x1: x, y1: y, moved: false };
  }

  private onMove(e: MouseEvent): void {
    if (!this.drag) return;
    const { x, y } = this.pos(e);
    this.drag.x1 = x;
    this.drag.y1 = y;
    if (Math.abs(x - this.drag.x0) >= MIN_DRAG_PX || Math.abs(y - this.drag.y0) >= MIN_DRAG_PX) {
      this.drag.moved = true;
    }
    if (this.showGuides) this.drawGuides();
  }

  private onUp(e: MouseEvent): void {
    const drag = this.drag;
    this.drag = null;
    if (!drag || !this.extent) return;
    const { x, y } = this.pos(e);
    const wasDrag = drag.moved
      && Math.abs(x - drag.x0) >= MIN_DRAG_PX
      && Math.abs(y - drag.y0) >= MIN_DRAG_PX;
    if (wasDrag) {
      this.selection = boxFromDrag(
        drag.x0, drag.y0, x, y,
        this.guidesCanvas.width, this.guidesCanvas.height, this.extent,
      );
      this.callbacks.onSelection(this.selection);
      return;
    }
    this.clearGuides();
    const hit = this.labelAt(x, y);
    if (hit) {
      this.callbacks.onLabelClick(hit.id);
    } else if (this.selection) {
      // click outside the selected box: selection dropped, audio resets
      this.selection = null;
      this.callbacks.onOutsideClick();
    } else {
      this.callbacks.onOutsideClick();
    }
  }

  private onLeave(): void {
    if (this.drag && !this.drag.moved) this.drag = null;
  }

  private onDblClick(e: MouseEvent): void {
    e.preventDefault();
    if (this.selection) {
      const box = this.selection;
      this.selection = null;
      this.clearGuides();
      this.callbacks.onZoomIn(box);
    } else {
      this.callbacks.onZoomReset();
    }
  }

  private labelAt(x: number, y: number): LabelOut | null {
    if (!this.extent) return null;
    const { width, height } = this.labelsCanvas;
    for (let i = this.labels.length - 1; i >= 0; i--) {
      const label = this.labels[i];
      const x0 = timeToPx(label.t_min_s, width, this.extent);
      const x1 = timeToPx(label.t_max_s, width, this.extent);
      const y0 = freqToPx(label.f_max_hz, height, this.extent);
      const y1 = freqToPx(label.f_min_hz, height, this.extent);
      if (x >= x0 && x <= x1 && y >= y0 && y <= y1) return label;
    }
    return null;
  }
}
