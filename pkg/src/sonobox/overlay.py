"""Box and text overlays drawn onto rendered rasters.

Text uses an embedded 5x7 uppercase bitmap font so annotated images are
byte-deterministic and need no system fonts. Used by the offline render
command; the browser UI draws its overlays client-side instead.
"""

from __future__ import annotations

import numpy as np

GROUP_COLORS = {
    "core": (60, 180, 75),     # green
    "misc": (245, 130, 48),    # orange
    "custom": (0, 130, 200),   # blue
    "grey": (145, 145, 145),
}

# Five-bit row masks, top to bottom; text is uppercased before lookup.
_GLYPHS = {
    "A": (0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "B": (0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E),
    "C": (0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E),
    "D": (0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E),
    "E": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F),
    "F": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10),
    "G": (0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F),
    "H": (0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "I": (0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "J": (0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C),
    "K": (0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11),
    "L": (0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F),
    "M": (0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11),
    "N": (0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11),
    "O": (0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "P": (0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10),
    "Q": (0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D),
    "R": (0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11),
    "S": (0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E),
    "T": (0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04),
    "U": (0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "V": (0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04),
    "W": (0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A),
    "X": (0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11),
    "Y": (0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04),
    "Z": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F),
    "0": (0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E),
    "1": (0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "2": (0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F),
    "3": (0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E),
    "4": (0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02),
    "5": (0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E),
    "6": (0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E),
    "7": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08),
    "8": (0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E),
    "9": (0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C),
    " ": (0, 0, 0, 0, 0, 0, 0),
    "-": (0, 0, 0, 0x1F, 0, 0, 0),
    "_": (0, 0, 0, 0, 0, 0, 0x1F),
    ".": (0, 0, 0, 0, 0, 0x0C, 0x0C),
    ",": (0, 0, 0, 0, 0x0C, 0x04, 0x08),
    ":": (0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0),
    "(": (0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02),
    ")": (0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08),
    "/": (0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10),
    "'": (0x04, 0x04, 0, 0, 0, 0, 0),
    "%": (0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03),
    "?": (0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04),
}
_FALLBACK = (0x1F, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1F)

GLYPH_W = 5
GLYPH_H = 7
ADVANCE = 6  # glyph width plus 1px spacing


def text_width(text: str) -> int:
    return max(0, len(text) * ADVANCE - 1)


def draw_text(img: np.ndarray, x: int, y: int, text: str, color) -> None:
    """Stamp text (uppercased) with its top-left corner at (x, y)."""
    h, w = img.shape[:2]
    for ci, ch in enumerate(text.upper()):
        rows = _GLYPHS.get(ch, _FALLBACK)
        gx = x + ci * ADVANCE
        for ry, mask in enumerate(rows):
            py = y + ry
            if not 0 <= py < h:
                continue
            for rx in range(GLYPH_W):
                if mask & (1 << (GLYPH_W - 1 - rx)):
                    px = gx + rx
                    if 0 <= px < w:
                        img[py, px] = color


def draw_rect(img: np.ndarray, x0: int, y0: int, x1: int, y1: int, color, thickness: int = 2) -> None:
    """Rectangle outline; coordinates are clamped to the image."""
    h, w = img.shape[:2]
    x0, x1 = sorted((int(x0), int(x1)))
    y0, y1 = sorted((int(y0), int(y1)))
    for t in range(thickness):
        top, bottom = y0 + t, y1 - t
        left, right = x0 + t, x1 - t
        if top > bottom or left > right:
            break
        if 0 <= top < h:
            img[top, max(left, 0) : min(right + 1, w)] = color
        if 0 <= bottom < h:
            img[bottom, max(left, 0) : min(right + 1, w)] = color
        if 0 <= left < w:
            img[max(top, 0) : min(bottom + 1, h), left] = color
        if 0 <= right < w:
            img[max(top, 0) : min(bottom + 1, h), right] = color


def draw_tag(img: np.ndarray, x: int, y: int, text: str, color) -> None:
    """Filled name tag whose bottom-left corner sits at (x, y); flips below
    the anchor when it would run off the top of the image."""
    h, w = img.shape[:2]
    pad = 2
    tag_w = text_width(text) + 2 * pad
    tag_h = GLYPH_H + 2 * pad
    top = y - tag_h
    if top < 0:
        top = y
    left = min(max(0, x), max(0, w - tag_w))
    bottom = min(top + tag_h, h)
    img[max(top, 0) : bottom, left : min(left + tag_w, w)] = color
    draw_text(img, left + pad, top + pad, text, (255, 255, 255))
