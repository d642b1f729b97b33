/* Test scaffolding: loads the real index.html markup into jsdom, stubs the
 * canvas 2D context with a recording fake, and patches the few DOM APIs
 * jsdom does not implement (object URLs, media playback). */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

type Call = { op: string; args: unknown[] };

export class FakeContext2D {
  calls: Call[] = [];
  strokeStyle = "";
  fillStyle = "";
  lineWidth = 1;
  font = "";

  private record(op: string, ...args: unknown[]) {
    this.calls.push({ op, args });
  }

  clearRect(...args: unknown[]) { this.record("clearRect", ...args); }
  strokeRect(...args: unknown[]) { this.record("strokeRect", ...args); }
  fillRect(...args: unknown[]) { this.record("fillRect", ...args); }
  fillText(...args: unknown[]) { this.record("fillText", ...args); }
  beginPath() { this.record("beginPath"); }
  moveTo(...args: unknown[]) { this.record("moveTo", ...args); }
  lineTo(...args: unknown[]) { this.record("lineTo", ...args); }
  stroke() { this.record("stroke"); }
  setLineDash(...args: unknown[]) { this.record("setLineDash", ...args); }
  save() { this.record("save"); }
  restore() { this.record("restore"); }

  /** strokeRect calls in the most recent redraw (since the last clearRect). */
  rectsSinceClear(): Call[] {
    let start = 0;
    this.calls.forEach((c, i) => {
      if (c.op === "clearRect") start = i + 1;
    });
    return this.calls.slice(start).filter((c) => c.op === "strokeRect");
  }
}

const contexts = new WeakMap<HTMLCanvasElement, FakeContext2D>();

export function ctxOf(canvas: HTMLCanvasElement): FakeContext2D {
  let ctx = contexts.get(canvas);
  if (!ctx) {
    ctx = new FakeContext2D();
    contexts.set(canvas, ctx);
  }
  return ctx;
}

export function installDomStubs(): void {
  (HTMLCanvasElement.prototype as any).getContext = function (kind: string) {
    return kind === "2d" ? ctxOf(this) : null;
  };
  let counter = 0;
  (URL as any).createObjectURL = () => `blob:mock-${counter++}`;
  (URL as any).revokeObjectURL = () => undefined;
  (HTMLMediaElement.prototype as any).play = () => Promise.resolve();
  (HTMLMediaElement.prototype as any).pause = () => undefined;
  (HTMLMediaElement.prototype as any).load = () => undefined;
}

installDomStubs();

const here = dirname(fileURLToPath(import.meta.url));
const INDEX_HTML = readFileSync(join(here, "..", "public", "index.html"), "utf-8");

/** Mount the real page markup (minus scripts/styles) into the test DOM. */
export function loadDom(): void {
  const body = INDEX_HTML
    .split(/<body>/)[1]
    .split(/<\/body>/)[0]
    .replace(/<script[\s\S]*?<\/script>/g, "");
  document.body.innerHTML = body;
}

export function mouse(
  target: EventTarget,
  type: string,
  clientX: number,
  clientY: number,
): void {
  target.dispatchEvent(new MouseEvent(type, { clientX, clientY, bubbles: true }));
}

export function change(id: string, value: string): void {
  const el = document.getElementById(id) as HTMLInputElement | HTMLSelectElement;
  el.value = value;
  el.dispatchEvent(new Event("change", { bubbles: true }));
}
