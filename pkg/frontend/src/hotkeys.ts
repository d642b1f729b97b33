/* Keyboard shortcuts with a focus guard: while the user is typing in a
 * field, keys type characters instead of triggering actions. */

export interface HotkeyActions {
  togglePlayback(): void;
  saveSelection(): void;
  deleteSelected(): void;
  prevFile(): void;
  nextFile(): void;
}

export const HOTKEY_HELP: [string, string][] = [
  ["space", "play / pause"],
  ["s", "save selection"],
  ["d", "delete selected label"],
  ["← / →", "previous / next file"],
];

function isTyping(target: EventTarget | null): boolean {
  if (!(target instanceof HTMLElement)) return false;
  return (
    target instanceof HTMLInputElement
    || target instanceof HTMLTextAreaElement
    || target instanceof HTMLSelectElement
    || target.isContentEditable
  );
}

export function bindHotkeys(doc: Document, actions: HotkeyActions): void {
  doc.addEventListener("keydown", (e) => {
    if (isTyping(e.target)) return;
    switch (e.key) {
      case " ":
        e.preventDefault();
        actions.togglePlayback();
        break;
      case "s":
        actions.saveSelection();
        break;
      case "d":
        actions.deleteSelected();
        break;
      case "ArrowLeft":
        actions.prevFile();
        break;
      case "ArrowRight":
        actions.nextFile();
        break;
    }
  });
}
