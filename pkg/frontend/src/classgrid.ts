/* Class list: color-grouped buttons in a grid (fixed column count) or a
 * wrapping flexbox, optionally showing 2-letter codes instead of names. */

import { GROUP_COLORS } from "./spectro.js";
import type { ClassGroups } from "./types.js";

export interface ClassGridOptions {
  layout: "grid" | "flex";
  columns: number;
  selected: string | null;
  onSelect(name: string): void;
  onRemove(name: string): void;
}

export function renderClassGrid(
  container: HTMLElement,
  groups: ClassGroups,
  opts: ClassGridOptions,
): void {
  container.innerHTML = "";
  container.classList.toggle("class-grid", opts.layout === "grid");
  container.classList.toggle("class-flex", opts.layout === "flex");
  if (opts.layout === "grid") {
    container.style.gridTemplateColumns = `repeat(${opts.columns}, 1fr)`;
  } else {
    container.style.gridTemplateColumns = "";
  }
  const doc = container.ownerDocument;
  for (const [group, entries] of [
    ["core", groups.core],
    ["misc", groups.misc],
    ["custom", groups.custom],
  ] as const) {
    for (const entry of entries) {
      const btn = doc.createElement("button");
      btn.type = "button";
      btn.textContent = entry.display;
      btn.title = entry.name;
      btn.className = `class-btn class-${group}`;
      btn.style.borderColor = GROUP_COLORS[group];
      btn.dataset.className = entry.name;
      btn.dataset.group = group;
      if (entry.name === opts.selected) btn.classList.add("selected");
      btn.addEventListener("click", () => opts.onSelect(entry.name));
      if (group === "custom") {
        btn.addEventListener("contextmenu", (e) => {
          e.preventDefault();
          opts.onRemove(entry.name);
        });
      }
      container.appendChild(btn);
    }
  }
}
