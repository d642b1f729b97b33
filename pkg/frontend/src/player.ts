/* Audio element wrapper. Source swaps are logged as audio requests (the
 * browser fetches the URL itself, with range support for seeking). */

import { RequestLog } from "./log.js";

export class Player {
  private rawUrl = "";

  constructor(readonly el: HTMLAudioElement, private log: RequestLog) {}

  get currentUrl(): string {
    return this.el.getAttribute("src") ?? "";
  }

  get isRaw(): boolean {
    return this.currentUrl === this.rawUrl;
  }

  /** Point the player at the unfiltered segment. */
  setRaw(url: string): void {
    this.rawUrl = url;
    this.load(url);
  }

  /** Temporary filtered audio for the current selection. */
  setFiltered(url: string): void {
    this.load(url);
  }

  /** Back to the raw segment (clicking outside the selected box). */
  resetToRaw(): void {
    if (this.rawUrl && this.currentUrl !== this.rawUrl) this.load(this.rawUrl);
  }

  /** Load a specific URL unless it is already the source. */
  setTo(url: string): void {
    if (url && this.currentUrl !== url) this.load(url);
  }

  toggle(): void {
    if (this.el.paused) void this.el.play()?.catch(() => undefined);
    else this.el.pause();
  }

  private load(url: string): void {
    this.log.record("audio", "GET", url);
    this.el.setAttribute("src", url);
    this.el.load?.();
  }
}
