/* Revision tables: the label edit table (current file, editable cells) and
 * the summary table (all files, filterable, click to navigate). */

import type { LabelOut, SummaryRow } from "./types.js";

export interface EditCallbacks {
  onEdit(id: string, changes: Record<string, unknown>): void;
  onDelete(id: string): void;
}

const EDIT_COLUMNS: [keyof LabelOut, string][] = [
  ["t_min_s", "start s"],
  ["t_max_s", "end s"],
  ["f_min_hz", "low Hz"],
  ["f_max_hz", "high Hz"],
  ["class_name", "class"],
  ["confidence_pct", "conf %"],
];

/** Only shows when the current file has at least one label. */
export function renderEditTable(
  container: HTMLElement,
  labels: LabelOut[],
  callbacks: EditCallbacks,
): void {
  container.innerHTML = "";
  container.hidden = labels.length === 0;
  if (!labels.length) return;
  const doc = container.ownerDocument;
  const table = doc.createElement("table");
  table.className = "edit-table";
  const head = table.insertRow();
  for (const [, title] of EDIT_COLUMNS) head.insertCell().textContent = title;
  head.insertCell().textContent = "";

  for (const label of labels) {
    const row = table.insertRow();
    row.dataset.labelId = label.id;
    for (const [field] of EDIT_COLUMNS) {
      const cell = row.insertCell();
      const input = doc.createElement("input");
      input.value = String(label[field]);
      input.dataset.field = field;
      input.addEventListener("change", () => {
        const numeric = field !== "class_name";
        const value: unknown = numeric ? Number(input.value) : input.value;
        if (numeric && !Number.isFinite(value as number)) {
          input.value = String(label[field]);  // reject garbage, restore
          return;
        }
        callbacks.onEdit(label.id, { [field]: value });
      });
      cell.appendChild(input);
    }
    const del = doc.createElement("button");
    del.type = "button";
    del.textContent = "delete";
    del.addEventListener("click", () => callbacks.onDelete(label.id));
    row.insertCell().appendChild(del);
  }
  container.appendChild(table);
}

export function restoreEditCell(container: HTMLElement, id: string, field: string, value: unknown): void {
  const input = container.querySelector<HTMLInputElement>(
    `tr[data-label-id="${id}"] input[data-field="${field}"]`,
  );
  if (input) input.value = String(value);
}

export function renderSummaryTable(
  container: HTMLElement,
  rows: SummaryRow[],
  onRowClick: (fileName: string) => void,
): void {
  container.innerHTML = "";
  const doc = container.ownerDocument;
  const table = doc.createElement("table");
  table.className = "summary-table";
  const head = table.insertRow();
  for (const title of ["file", "class", "count"]) head.insertCell().textContent = title;
  for (const row of rows) {
    const tr = table.insertRow();
    tr.insertCell().textContent = row.file_name;
    tr.insertCell().textContent = row.class_name;
    tr.insertCell().textContent = String(row.count);
    tr.classList.add("summary-row");
    tr.addEventListener("click", () => onRowClick(row.file_name));
  }
  container.appendChild(table);
}
